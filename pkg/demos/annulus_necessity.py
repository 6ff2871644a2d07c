"""Why curves replace segments: integrating along [0, z] on a non C-convex domain.

The annulus product {1/2 < |z1 - 0.75| < 1} x {|z2| < 1} contains 0, but the
segment from 0 to z = (0.75 + 0.55i, 0.1) passes through the hole around the
pole of f = 1/(z1 - 0.75) + 1/0.75.  The straight integral aborts, while the
planned path goes around the hole and recovers f(z) = sum z_i T_i(f)(z).
"""

import numpy as np

from gleason import decompose_at_point, interior_cover, make_domain, named_oracle, plan_path
from gleason.core import integrate_I, straight_plan
from gleason.errors import CircleExitsDomain


def main():
    domain = make_domain("annulus_product", {"inner": 0.5, "outer": 1.0, "center": 0.75})
    cover = interior_cover(domain, 0.02)
    f = named_oracle("annulus_pole", center=0.75)
    z = np.array([0.75 + 0.55j, 0.1])
    worst = np.max(domain.r(np.linspace(0, 1, 401)[:, None] * z))
    print(f"max r along the straight segment: {worst:+.3f} (positive: the segment leaves the domain)")
    try:
        integrate_I(f, z, [1, 0], straight_plan(z, cover.clearance), domain, cover)
    except CircleExitsDomain as exc:
        print(f"straight segment: CircleExitsDomain ({exc})")
    plan = plan_path(domain, cover, z)
    print(f"planned path nodes (lam plane): {np.round(plan.nodes, 3)}")
    print(f"clearance along the path: {plan.clearance:.4f} >= A = {cover.clearance}")
    rep = decompose_at_point(f, z, domain, cover, "direct_contour", plan=plan)
    print(f"T(f)(z) = {np.round(rep.values, 10)}")
    print(f"residual |f(z) - sum z_i T_i(f)(z)| = {rep.residual:.2e}")


if __name__ == "__main__":
    main()
