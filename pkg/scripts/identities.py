"""Funk duality, Funk-Hecke multipliers and the hyperbolic identities.

Usage: python3 scripts/identities.py
"""
import numpy as np

from igt import funk as F
from igt import hyperbolic as H
from igt import numkit as nk


def main():
    print("Funk duality on S^n (lhs, rhs, rel error)")
    for n, k, f in [(3, 1, F.ConstantSphereField(3)),
                    (3, 1, F.ZonalProfileField(3, axis=np.full(4, 0.5), a=1.0)),
                    (4, 2, F.ZonalProfileField(4, axis=np.ones(5) / np.sqrt(5), a=-1.5))]:
        c = F.duality_identity_check(f, n, k)
        print(f"  n={n} k={k} {type(f).__name__:20s} {c.lhs:.12f} {c.rhs:.12f} {c.rel_error:.2e}")

    print("Funk-Hecke multipliers on S^2 (computed, P_m(0))")
    q = nk.make_sphere_quadrature(2, 24)
    for m in range(0, 9, 2):
        Y = F.spherical_harmonic_field(2, m)
        y = Y(q.points)
        mu = F.sphere_funk_transform(Y, q.points, 64) @ y / (y @ y)
        print(f"  m={m}: {mu:+.12f} {nk.legendre_p_at_zero(m):+.12f}")

    print("Hyperbolic duality, n=2, f = exp(2(1 - x_3))")
    f2 = H.ExpDecayField(2, 2.0)
    for s in ([1.0, 0.0], [0.6, 0.8]):
        c = H.duality_identity_h(f2, 2, np.array(s))
        print(f"  sigma={s}: {c.lhs:.12f} {c.rhs:.12f} {c.rel_error:.2e}")
    c = H.slice_identity_check(H.ExpDecayField(3, 1.0), 3, 1)
    print(f"Hyperbolic slice identity n=3 k=1: {c.lhs:.12f} {c.rhs:.12f} {c.rel_error:.2e}")
    mc = H.measure_decompositions(H.ExpDecayField(3, 1.0), 3)
    print(f"H^3 measure decompositions: {mc.values} spread {mc.max_rel_spread:.2e}")


if __name__ == "__main__":
    main()
