#!/usr/bin/env python3
"""Train the example networks and write them as network JSON files.

  double_integrator_controller.json  2-10-5-1 ReLU controller imitating a box-constrained
                                     MPC law, output saturated to [-1, 1]
  pendulum_dynamics.json             2-12-2 ReLU model of a damped pendulum step
                                     (angles in degrees)

Runs on CPU in about a minute. Seeds are fixed, but torch kernels are not guaranteed to
be bit-identical across versions, so the committed files are the reference copies.
"""

import argparse
import json
import math
from pathlib import Path

import cvxpy as cp
import numpy as np
import torch
from torch import nn

A_DI = np.array([[1.0, 1.0], [0.0, 1.0]])
B_DI = np.array([[0.5], [1.0]])


def mpc_policy(horizon=10):
    x0 = cp.Parameter(2)
    x = cp.Variable((2, horizon + 1))
    u = cp.Variable((1, horizon))
    cost = 0
    cons = [x[:, 0] == x0]
    for k in range(horizon):
        cost += cp.sum_squares(x[:, k + 1]) + 0.5 * cp.sum_squares(u[:, k])
        cons += [x[:, k + 1] == A_DI @ x[:, k] + B_DI @ u[:, k], cp.abs(u[:, k]) <= 1.0]
    problem = cp.Problem(cp.Minimize(cost), cons)

    def act(state):
        x0.value = state
        problem.solve(solver=cp.OSQP, eps_abs=1e-7, eps_rel=1e-7)
        return float(u.value[0, 0])

    return act


def pendulum_step(theta, omega, dt=0.05, g_over_l=9.81, damping=0.5):
    accel = -g_over_l * np.degrees(np.sin(np.radians(theta))) - damping * omega
    return theta + dt * omega, omega + dt * accel


def fit(model, xs, ys, epochs, lr):
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, epochs)
    loader = torch.utils.data.DataLoader(torch.utils.data.TensorDataset(xs, ys), batch_size=256, shuffle=True)
    for _ in range(epochs):
        for xb, yb in loader:
            opt.zero_grad()
            loss = nn.functional.mse_loss(model(xb), yb)
            loss.backward()
            opt.step()
        sched.step()
    with torch.no_grad():
        return nn.functional.mse_loss(model(xs), ys).item()


def to_network_json(model, saturation=None):
    layers = [m for m in model if isinstance(m, nn.Linear)]
    out = {
        "weights": [m.weight.detach().double().tolist() for m in layers],
        "biases": [m.bias.detach().double().tolist() for m in layers],
    }
    if saturation is not None:
        out["saturation"] = {"lower": saturation[0], "upper": saturation[1]}
    return out


def train_double_integrator(rng, samples):
    act = mpc_policy()
    states = np.column_stack([rng.uniform(-10, 10, samples), rng.uniform(-4, 4, samples)])
    controls = np.array([[act(s)] for s in states])
    model = nn.Sequential(nn.Linear(2, 10), nn.ReLU(), nn.Linear(10, 5), nn.ReLU(), nn.Linear(5, 1))
    xs = torch.tensor(states, dtype=torch.float32)
    ys = torch.tensor(controls, dtype=torch.float32)
    mse = fit(model, xs, ys, epochs=400, lr=3e-3)
    return to_network_json(model, saturation=([-1.0], [1.0])), mse


def train_pendulum(rng, samples):
    states = rng.uniform(-90, 90, (samples, 2))
    nxt = np.column_stack(pendulum_step(states[:, 0], states[:, 1]))
    # Train on a scaled copy, then fold the scaling into the first and last layers.
    scale = 90.0
    model = nn.Sequential(nn.Linear(2, 12), nn.ReLU(), nn.Linear(12, 2))
    xs = torch.tensor(states / scale, dtype=torch.float32)
    ys = torch.tensor(nxt / scale, dtype=torch.float32)
    mse = fit(model, xs, ys, epochs=400, lr=3e-3)
    net = to_network_json(model)
    net["weights"][0] = (np.array(net["weights"][0]) / scale).tolist()
    net["weights"][1] = (np.array(net["weights"][1]) * scale).tolist()
    net["biases"][1] = (np.array(net["biases"][1]) * scale).tolist()
    return net, mse * scale * scale


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "tests" / "data")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--samples", type=int, default=3000)
    args = parser.parse_args()

    torch.manual_seed(args.seed)
    rng = np.random.default_rng(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)

    di, di_mse = train_double_integrator(rng, args.samples)
    (args.out / "double_integrator_controller.json").write_text(json.dumps(di, indent=1) + "\n")
    print(f"double integrator controller: mse {di_mse:.3g}")

    pend, pend_mse = train_pendulum(rng, args.samples)
    (args.out / "pendulum_dynamics.json").write_text(json.dumps(pend, indent=1) + "\n")
    print(f"pendulum dynamics: mse {pend_mse:.3g} (deg^2)")


if __name__ == "__main__":
    main()
