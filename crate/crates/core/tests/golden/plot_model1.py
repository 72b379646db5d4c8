#!/usr/bin/env python3
# Profiles and mid-gap history for model model1.
import csv
import os

import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
SNAPSHOTS = [
    (0.25, "snapshot_00_cycle_0.25.csv"),
    (0.5, "snapshot_01_cycle_0.5.csv"),
    (1, "snapshot_02_cycle_1.csv"),
]
CENTERLINE = "centerline.csv"
TITLE = "model1: Re=10, Pe=1000, p_g=5, p_A=0, p_B=0"


def read(name):
    with open(os.path.join(HERE, name), newline="") as f:
        rows = list(csv.reader(f))
    header, body = rows[0], rows[1:]
    return {key: [float(row[i]) for row in body] for i, key in enumerate(header)}


def main():
    fields = [("v_hat", "v"), ("w_hat", "w"), ("c_hat", "c"), ("mu_hat", "mu")]
    fig, axes = plt.subplots(2, 2, figsize=(10, 8))
    for cycle, name in SNAPSHOTS:
        data = read(name)
        for ax, (key, label) in zip(axes.flat, fields):
            ax.plot(data["r_hat"], data[key], label="cycle %g" % cycle)
            ax.set_xlabel("r")
            ax.set_ylabel(label)
    for ax in axes.flat:
        ax.legend()
    fig.suptitle(TITLE)
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, "profiles.png"), dpi=150)

    series = read(CENTERLINE)
    fig, axes = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    axes[0].plot(series["cycle"], series["mu_hat"])
    axes[0].set_ylabel("mu at r = 0.5")
    axes[1].plot(series["cycle"], series["w_hat"])
    axes[1].set_ylabel("w at r = 0.5")
    axes[1].set_xlabel("cycles")
    fig.suptitle(TITLE)
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, "centerline.png"), dpi=150)


if __name__ == "__main__":
    main()
