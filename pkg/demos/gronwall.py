"""Fractional Gronwall bound for the scalar problem d^a y = y + 1, y(0) = 0.

The L1 time-stepping solution stays below the Mittag-Leffler bound; the
gap closes as the step shrinks.
"""

from __future__ import annotations

import numpy as np

from fracenergy import TimeSeries, UniformGrid, check_lemma2, ml_two
from fracenergy.fractional_ops import solve_linear_l1


def main() -> None:
    alpha = 0.5
    exact = ml_two(alpha, alpha + 1.0, 1.0)
    for nt in (16, 64, 256, 1024):
        grid = UniformGrid(1.0, 1.0, 4, nt)
        ones = TimeSeries(grid, np.ones(nt + 1))
        y = solve_linear_l1(1.0, ones, alpha)
        rep = check_lemma2(y, 1.0, ones, alpha)
        print(
            f"Nt={nt:5d}: y(1)={y.values[-1]:.8f} (exact {exact:.8f}), "
            f"bound(1)={rep.rhs.values[-1]:.8f}, margin at T {rep.margin[-1]:.4f}, "
            f"hypothesis {'ok' if rep.hypotheses_ok else 'violated'}"
        )


if __name__ == "__main__":
    main()
