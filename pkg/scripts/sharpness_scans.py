"""Tables for the two sharpness examples: the L^p function on R^3 whose
line integrals diverge, and the function on S^4 whose Funk integrals diverge.

Usage: python3 scripts/sharpness_scans.py
"""
import numpy as np

from igt import euclid as E
from igt import funk as F


def f0_table(p, delta, jmax):
    radii = 2.0 ** np.arange(1, jmax + 1)
    T = E.divergence_scan_f0(3, 1, p, delta, radii)
    print(f"\nf0 on R^3, k=1, p={p:g}, delta={delta:g}")
    print(f"{'Lambda':>12} {'T(Lambda)':>14} {'increment':>12}")
    for i, (r, t) in enumerate(zip(radii, T)):
        inc = f"{t - T[i - 1]:12.4e}" if i else ""
        print(f"{r:12.0f} {t:14.8f} {inc}")
    print(f"ratio T(last)/T(first) = {T[-1] / T[0]:.4f}, "
          f"increasing = {E.is_strictly_increasing(T)}, settles = {E.cauchy_settles(T)}")


def main():
    f0_table(2.0, 0.25, 12)
    f0_table(3.0, 0.25, 12)
    f0_table(1.2, 0.1, 39)

    sc = F.counterexample_scan_ftilde(4, 1)
    print(f"\nf~ on S^4, k=1, p={4 - 1}")
    print(f"norm integral -> {sc.norm_values[-1]:.12f} (closed form {sc.norm_closed_form}), "
          f"Cauchy gap {sc.norm_cauchy:.2e}")
    print(f"{'eps':>12} {'Funk trunc.':>14} {'closed form':>14}")
    for e, v, c in zip(sc.eps, sc.funk_values, sc.funk_closed_form):
        print(f"{e:12.3e} {v:14.10f} {c:14.10f}")


if __name__ == "__main__":
    main()
