"""Optional post-processing: plot norm decay curves from a scenario CSV.

Usage:  python3 scripts/plot_decay.py <out_dir>/decay.csv [plot.png]

Reads the (t, l2_norm, lq_norm) columns written by the semigroup-decay
scenario (the global-solve CSV works too, using its velocity column) and
saves a log-linear plot with the fitted rate. Plotting stays outside the
acceptance surface; the CSVs are the artifact of record.
"""

import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def main(argv):
    if not 2 <= len(argv) <= 3:
        print(__doc__)
        return 2
    path = argv[1]
    out = argv[2] if len(argv) == 3 else "decay.png"
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    t = np.array([float(r["t"]) for r in rows])
    cols = [c for c in rows[0] if c != "t"]
    fig, ax = plt.subplots(figsize=(6, 4))
    for col in cols:
        y = np.array([float(r[col]) for r in rows])
        keep = y > 0
        ax.semilogy(t[keep], y[keep], label=col)
        if np.count_nonzero(keep) > 10:
            tail = slice(len(t) // 3, None)
            slope = np.polyfit(t[keep][tail], np.log(y[keep][tail]), 1)[0]
            ax.plot([], [], " ", label=f"  rate {-slope:.3f}")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
