#!/usr/bin/env python3
"""Plot trajectory logs written by `polarstab`.

usage: plot.py TRAJECTORY.csv [MORE.csv ...] [--save PREFIX]

Draws the path in the plane, x/y/theta against time and the commanded
v/omega against time. Several CSV files are overlaid (ring experiments).
"""
import argparse
import csv
import math

import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    cols = {k: [float(r[k]) for r in rows] for k in rows[0] if k != "regime"} if rows else {}
    cols["regime"] = [r["regime"] for r in rows]
    return cols


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv", nargs="+")
    ap.add_argument("--save", metavar="PREFIX", help="write PNGs instead of showing windows")
    args = ap.parse_args()
    logs = [(p, load(p)) for p in args.csv]

    fig_path, ax = plt.subplots(figsize=(6, 6))
    for name, d in logs:
        if not d.get("x"):
            continue
        ax.plot(d["x"], d["y"], lw=1, label=name)
        ax.plot(d["x"][0], d["y"][0], "o", ms=4)
    ax.plot(0, 0, "k*", ms=10)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_aspect("equal", adjustable="datalim")
    ax.grid(True)
    if len(logs) > 1:
        ax.legend(fontsize="small")

    fig_state, axes = plt.subplots(3, 1, sharex=True, figsize=(7, 7))
    for name, d in logs:
        for a, key, unit in zip(axes, ("x", "y", "theta"), ("m", "m", "deg")):
            vals = d.get(key, [])
            if key == "theta":
                vals = [math.degrees(v) for v in vals]
            a.plot(d.get("t", []), vals, lw=1)
            a.set_ylabel(f"{key} [{unit}]")
            a.grid(True)
    axes[-1].set_xlabel("t [s]")

    fig_cmd, axes = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
    for name, d in logs:
        axes[0].plot(d.get("t", []), d.get("v", []), lw=1)
        axes[1].plot(d.get("t", []), d.get("omega", []), lw=1)
    axes[0].set_ylabel("v [m/s]")
    axes[1].set_ylabel("omega [rad/s]")
    axes[1].set_xlabel("t [s]")
    for a in axes:
        a.grid(True)

    if args.save:
        for suffix, fig in (("path", fig_path), ("state", fig_state), ("command", fig_cmd)):
            fig.tight_layout()
            fig.savefig(f"{args.save}_{suffix}.png", dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
