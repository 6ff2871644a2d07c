"""The Grange domain |z1|^2 + h(|z2|) < 1 with h(x) = -x/log x near (1, 0).

The boundary is C^1 but not Holder at |z1| = 1, z2 = 0.  The sampled
collar-membership test fails there with the smooth-domain exponent, and the
empirical key-estimate ratio is tabulated for test balls approaching (1, 0).
For a fixed polynomial degree the ratio stays bounded, and the table depends
on the cover.
"""

import numpy as np

from gleason import collar_cover, make_domain, verify_lemma1
from gleason.experiments import grange_approach


def main():
    domain = make_domain("grange", {}, epsilon=0.1)
    for budget in (24, 48):
        cover = collar_cover(domain, patch_budget=budget, require_lemma1=False)
        print(f"\n{budget} patches: sigma = {cover.sigma:.3f}, A = {cover.clearance:.4f}")
        for eps in (0.1, 1.0):
            report = verify_lemma1(domain, cover, 4000, epsilon=eps)
            print(f"  membership test with epsilon = {eps}: {report.violations} violations in 4000")
        rows = grange_approach(domain, cover, ks=range(2, 9), degree=10, trials=50)
        for k, dist, ratio in rows:
            print(f"  k = {k}  distance = {dist:.4f}  max ratio = {ratio:.3f}")
        ratios = np.array([r for *_, r in rows])
        print(f"  strictly increasing: {bool(np.all(np.diff(ratios) > 0))}")


if __name__ == "__main__":
    main()
