#!/usr/bin/env python3
"""Optional rendering helper for bias-bench output (the core emits CSV only).

Usage: plot_bias.py <bias_report.csv> [out.png]
Requires matplotlib; not a dependency of the library or CLI.
"""
import csv
import sys
from collections import defaultdict


def main() -> int:
    if len(sys.argv) < 2:
        print(__doc__)
        return 2
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else "bias_report.png"

    rows = defaultdict(lambda: defaultdict(list))  # method -> level -> values
    cosines = defaultdict(lambda: defaultdict(list))
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            level = float(row["noise_level"])
            rows[row["method"]][level].append(float(row["rel_l2"]))
            cosines[row["method"]][level].append(float(row["cosine"]))

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for method in sorted(rows):
        levels = sorted(rows[method])
        mean_rel = [sum(rows[method][t]) / len(rows[method][t]) for t in levels]
        mean_cos = [sum(cosines[method][t]) / len(cosines[method][t]) for t in levels]
        ax1.plot(levels, mean_rel, marker="o", label=method)
        ax2.plot(levels, mean_cos, marker="o", label=method)
    ax1.set_xscale("log")
    ax1.set_xlabel("noise level")
    ax1.set_ylabel("relative L2 error")
    ax1.legend()
    ax2.set_xscale("log")
    ax2.set_xlabel("noise level")
    ax2.set_ylabel("cosine similarity")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
