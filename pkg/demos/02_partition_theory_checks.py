"""Monte-Carlo verification of the closed-form partition laws.

Runs the four statistical verifiers at a desk scale and prints their
verdicts: exact expected leaf count, the cell distribution around a point
(boundary atoms + truncated-exponential interior + independence), the cell
diameter bounds, and the restriction property.  Sample sizes here are kept
small for a quick run; the acceptance suite runs the full-scale versions.
"""

import mondrianforest as mf


def show(report):
    print(f"--- {report.name}: {'PASS' if report.passed else 'FAIL'} "
          f"({report.wall_clock:.1f} s)")
    for verdict in report.verdicts:
        print(f"  [{'ok' if verdict.passed else 'XX'}] {verdict.name}: "
              f"statistic {verdict.statistic:.5g} vs threshold {verdict.threshold:.5g}")
    print()


print("expected leaf count, d=2, lifetime 5 (exact law: 36 leaves on average)")
show(mf.verify_leaf_count(d=2, lifetime=5.0, samples=3000, seed=1))

print("split counts in one dimension follow a Poisson law")
show(mf.verify_leaf_count(d=1, lifetime=3.0, samples=4000, seed=2))

print("cell of the point (0.5, 0.5): atoms, interior law, independence")
show(mf.verify_cell_distribution(d=2, lifetime=10.0, x=[0.5, 0.5], samples=2000, seed=3))

print("cell diameter tail and second-moment bounds")
show(mf.verify_diameter(d=2, lifetime=4.0, x=[0.5, 0.5], samples=3000, seed=4))

print("restriction to [0.2,0.6]x[0.1,0.4] behaves like a direct sample")
sub = mf.BoxRegion([0.2, 0.1], [0.6, 0.4])
show(mf.verify_restriction(d=2, lifetime=5.0, sub=sub, samples=3000, seed=5))
