"""Sampling Mondrian partitions and working with their geometry.

Walks through the core partition operations: sampling at a lifetime, point
location, pruning, exact lifetime extension, restriction to a sub-box, and
JSON serialization.  Everything is driven by explicit seeds, so rerunning the
script reproduces the same numbers.
"""

import numpy as np

import mondrianforest as mf

box = mf.BoxRegion.unit(2)
rng = mf.RngStream(seed=7)

print("=== sampling ===")
part = mf.sample_mondrian(box, lifetime=3.0, rng=rng)
print(f"lifetime 3.0 partition: {mf.leaf_count(part)} leaves, "
      f"{part.n_splits} splits, {part.seed_provenance['draws']} RNG draws")

for leaf in part.leaves()[:4]:
    b = leaf.box
    print(f"  leaf born t={leaf.birth_time:.3f} "
          f"[{b.lower[0]:.3f},{b.upper[0]:.3f}]x[{b.lower[1]:.3f},{b.upper[1]:.3f}] "
          f"pending clock {leaf.pending_clock:.3f}")

print("\n=== point location (ties go to the left cell) ===")
x = np.array([0.25, 0.6])
leaf = mf.locate_leaf(part, x)
print(f"x={x.tolist()} lands in the cell with volume {leaf.box.volume:.4f}")
print(f"cell l2 diameter: {mf.cell_l2_diameter(leaf.box):.4f}")

print("\n=== prune and extend are exact inverses ===")
grown = mf.extend(part, 6.0, mf.RngStream(8))
back = mf.prune(grown, 3.0)
print(f"extend to 6.0: {mf.leaf_count(grown)} leaves; prune back to 3.0: "
      f"{mf.leaf_count(back)} leaves; node-for-node equal: "
      f"{back.structurally_equal(part)}")

print("\n=== leaf counts track the exact law (1 + lifetime)^d ===")
for lifetime in (1.0, 3.0, 5.0):
    counts = [
        mf.sample_mondrian(box, lifetime, mf.RngStream(100, (i,))).n_leaves
        for i in range(2000)
    ]
    print(f"  lifetime {lifetime:>3}: empirical mean {np.mean(counts):6.2f}  "
          f"exact {mf.expected_leaf_count(lifetime, 2):6.2f}")

print("\n=== restriction to a sub-box ===")
sub = mf.BoxRegion([0.2, 0.1], [0.6, 0.4])
restricted = mf.restrict(part, sub)
print(f"restricted partition has {mf.leaf_count(restricted)} leaves; "
      f"expected over draws: {mf.expected_leaf_count_box(3.0, sub.side_lengths):.2f}")

print("\n=== serialization round trip ===")
text = mf.partition_to_json(part)
clone = mf.partition_from_json(text)
print(f"JSON payload: {len(text)} bytes; round trip structurally equal: "
      f"{clone.structurally_equal(part)}")
