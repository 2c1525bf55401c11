#!/usr/bin/env python3
"""Re-derive the Nemenyi q constants by brute-force Monte Carlo.

The embedded table in tabbench.stats holds the (1 - alpha) quantiles of
range(Z_1..Z_k) / sqrt(2) for k iid standard normals.  This script
re-estimates each entry and prints the deviation from the table, so the
constants can be audited or regenerated at higher precision.

Usage: python scripts/regen_nemenyi_q.py [samples_per_entry]
"""

import sys

import numpy as np

sys.path.insert(0, "src")

from tabbench.stats import _NEMENYI_Q  # noqa: E402


def estimate(k: int, alpha: float, samples: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    chunks = []
    remaining = samples
    while remaining > 0:
        m = min(remaining, 500_000)
        z = rng.standard_normal((m, k))
        chunks.append((z.max(axis=1) - z.min(axis=1)) / np.sqrt(2.0))
        remaining -= m
    return float(np.quantile(np.concatenate(chunks), 1.0 - alpha))


def main() -> int:
    samples = int(sys.argv[1]) if len(sys.argv) > 1 else 4_000_000
    print(f"# {samples} samples per entry")
    worst = 0.0
    for alpha, row in sorted(_NEMENYI_Q.items()):
        for k, table_q in enumerate(row, start=2):
            mc = estimate(k, alpha, samples, seed=1000 * k + int(alpha * 100))
            diff = abs(mc - table_q)
            worst = max(worst, diff)
            print(f"alpha={alpha:.2f} k={k:2d}  table={table_q:.3f}  "
                  f"mc={mc:.4f}  |diff|={diff:.4f}")
    print(f"# worst deviation: {worst:.4f}")
    return 0 if worst < 0.01 else 1


if __name__ == "__main__":
    sys.exit(main())
