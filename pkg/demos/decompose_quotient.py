"""T_i(f) for f = z1/(2 - z2) on the unit ball by every applicable method.

Interior points use direct_contour and approximant_limit; collar points use
sy_system and approximant_limit.  For this f, T_1 = -log(1 - z2/2)/z2 in
closed form, which gives an independent check.
"""

import numpy as np

from gleason import collar_cover, collar_membership, decompose_at_point, make_domain, named_oracle


def main():
    ball = make_domain("ball", {"n": 2})
    cover = collar_cover(ball)
    f = named_oracle("quotient")
    print(f"collar width sigma = {cover.sigma:.3f}, clearance A = {cover.clearance:.4f}")
    points = [np.array([0.3, 0.2]), np.array([0.1 + 0.4j, -0.3j]), np.array([0.97, 0.05j])]
    for z in points:
        exact_t1 = -np.log(1 - z[1] / 2) / z[1] if z[1] != 0 else 0.5
        contour = "direct_contour" if collar_membership(cover, ball, z) is None else "sy_system"
        print(f"\nz = {np.round(z, 3)}  (exact T_1 = {exact_t1:.12f})")
        for method in (contour, "approximant_limit"):
            rep = decompose_at_point(f, z, ball, cover, method)
            err = abs(rep.values[0] - exact_t1)
            print(f"  {method:18s} T_1 = {rep.values[0]:.12f}  |error| = {err:.1e}  residual = {rep.residual:.1e}")


if __name__ == "__main__":
    main()
