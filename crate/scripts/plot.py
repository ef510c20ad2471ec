#!/usr/bin/env python3
"""Plot merid CSV outputs.

usage: plot.py FILE.csv [--save OUT.png]

Recognizes diagram*.csv, coherence.csv, optomech.csv and pattern_*.csv by
their header. Needs matplotlib.
"""
import argparse
import csv
import math

import matplotlib.pyplot as plt


def read(path):
    with open(path) as f:
        rows = [line for line in f if not line.startswith("#")]
    reader = csv.DictReader(rows)
    return reader.fieldnames, list(reader)


def col(rows, key):
    return [float(r[key]) if r[key] not in ("", "inf") else math.nan for r in rows]


def band(ax, d, lo, hi, **kw):
    ax.fill_between(d, lo, hi, where=[not math.isnan(v) for v in lo], **kw)


def plot(path, ax):
    fields, rows = read(path)
    if "d_lo_std_m" in fields:
        d = [v * 1e9 for v in col(rows, "D_m")]
        nm = lambda k: [v * 1e9 for v in col(rows, k)]
        band(ax, d, nm("d_lo_std_m"), nm("d_hi_std_m"), color="0.8", label="standard")
        band(ax, d, nm("green_detect_lo_m"), nm("green_detect_hi_m"), color="tab:green", label="green")
        ax.set(xscale="log", yscale="log", xlabel="D (nm)", ylabel="d (nm)")
    elif "xi_m" in fields:
        t = col(rows, "t_s")
        ax.loglog(t, col(rows, "xi_m"), label="xi")
        ax.loglog(t, col(rows, "xi_s_m"), "--", label="xi_s")
        ax.set(xlabel="t (s)", ylabel="coherence length (m)")
    elif "t1_om_s" in fields:
        d = [v * 1e9 for v in col(rows, "D_m")]
        ax.loglog(d, col(rows, "t1_om_s"), label="t1_OM (s)")
        ax.loglog(d, col(rows, "chi_max"), label="chi_max")
        ax.set(xlabel="D (nm)")
    else:
        ax.plot(col(rows, "x_m"), col(rows, "probability_density_per_m"))
        ax.set(xlabel="x (m)", ylabel="P(x) (1/m)")
    ax.legend() if ax.get_legend_handles_labels()[0] else None


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv")
    ap.add_argument("--save")
    a = ap.parse_args()
    fig, ax = plt.subplots()
    plot(a.csv, ax)
    if a.save:
        fig.savefig(a.save, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
