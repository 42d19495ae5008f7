"""Axis-aligned boxes and Mondrian partitions.

A Mondrian partition of a box is a rooted binary tree of axis-aligned splits,
each born at a random time: a cell with linear dimension ``|C|`` (the sum of
its side lengths) waits an Exp(|C|) time, then splits along axis ``j`` with
probability proportional to its side length, at a threshold uniform on that
side.  The recursion stops at a lifetime ``lambda``; every leaf keeps the
candidate split time that exceeded the lifetime (its *pending clock*), which
makes lifetime extension exact: extending to a larger lifetime and pruning
back reproduces the original partition node for node.

Conventions, fixed so that sampling is bit-reproducible:

* draw order per cell is clock, then split axis, then threshold;
  the left subtree is always processed before the right one;
* a point equal to a threshold belongs to the left child (closed-left);
* thresholds are redrawn if they land exactly on a cell boundary;
* degenerate cells (``|C| == 0``) never split and carry an infinite
  pending clock.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .rng import RngStream

__all__ = [
    "SplitLimitError",
    "BoxRegion",
    "SplitRecord",
    "PartitionNode",
    "MondrianPartition",
    "sample_mondrian",
    "prune",
    "extend",
    "restrict",
    "locate_leaf",
    "leaf_cells",
    "leaf_count",
    "cell_l2_diameter",
    "partition_to_dict",
    "partition_from_dict",
    "partition_to_json",
    "partition_from_json",
]

PARTITION_SCHEMA = "mondrian-partition/1"

DEFAULT_MAX_SPLITS = 1_000_000


class SplitLimitError(RuntimeError):
    """Raised when sampling would exceed the configured split budget."""


class BoxRegion:
    """Axis-aligned hyper-rectangle with per-axis lower-edge inclusion flags.

    Upper edges are always inclusive; ``left_closed[j]`` says whether the
    lower edge on axis ``j`` is inclusive.  Splitting at threshold ``s``
    produces a left child closed at ``s`` and a right child open at its new
    lower edge, so the two children partition the parent exactly.
    """

    __slots__ = ("lower", "upper", "left_closed")

    def __init__(self, lower, upper, left_closed=None):
        lower = np.asarray(lower, dtype=np.float64).copy()
        upper = np.asarray(upper, dtype=np.float64).copy()
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise ValueError("lower and upper must be 1-d arrays of equal length")
        if lower.size == 0:
            raise ValueError("box must have at least one axis")
        if not (np.isfinite(lower).all() and np.isfinite(upper).all()):
            raise ValueError("box bounds must be finite")
        if np.any(lower > upper):
            raise ValueError("lower must be <= upper on every axis")
        if left_closed is None:
            left_closed = np.ones(lower.shape, dtype=bool)
        else:
            left_closed = np.asarray(left_closed, dtype=bool).copy()
            if left_closed.shape != lower.shape:
                raise ValueError("left_closed must match the box dimension")
        lower.setflags(write=False)
        upper.setflags(write=False)
        left_closed.setflags(write=False)
        self.lower = lower
        self.upper = upper
        self.left_closed = left_closed

    @classmethod
    def unit(cls, dim: int) -> "BoxRegion":
        """The unit cube [0, 1]^dim, closed on all edges."""
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        return cls(np.zeros(dim), np.ones(dim))

    @classmethod
    def _make(cls, lower, upper, left_closed) -> "BoxRegion":
        # trusted internal constructor: arrays are adopted (and may be
        # shared between boxes) rather than copied and validated
        box = object.__new__(cls)
        lower.setflags(write=False)
        upper.setflags(write=False)
        left_closed.setflags(write=False)
        box.lower = lower
        box.upper = upper
        box.left_closed = left_closed
        return box

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def side_lengths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def linear_dimension(self) -> float:
        """Sum of the side lengths; the split intensity of the cell."""
        return float((self.upper - self.lower).sum())

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    @property
    def l2_diameter(self) -> float:
        """Euclidean length of the main diagonal."""
        return float(np.sqrt(np.sum((self.upper - self.lower) ** 2)))

    def contains(self, x) -> bool:
        """Point membership under the edge-inclusion flags."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.lower.shape:
            raise ValueError(f"point has dimension {x.size}, box has {self.dim}")
        at_lower_ok = np.where(self.left_closed, x >= self.lower, x > self.lower)
        return bool(np.all(at_lower_ok) and np.all(x <= self.upper))

    def contains_box(self, other: "BoxRegion") -> bool:
        """Whether ``other`` is contained in this box as a point set."""
        if other.dim != self.dim:
            return False
        lower_ok = (other.lower > self.lower) | (
            (other.lower == self.lower) & (self.left_closed | ~other.left_closed)
        )
        return bool(np.all(lower_ok) and np.all(other.upper <= self.upper))

    def intersect(self, other: "BoxRegion") -> "BoxRegion":
        """Intersection box, combining lower-edge flags exactly."""
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        lower = np.maximum(self.lower, other.lower)
        upper = np.minimum(self.upper, other.upper)
        if np.any(lower > upper):
            raise ValueError("boxes do not intersect")
        flags = np.where(
            self.lower > other.lower,
            self.left_closed,
            np.where(other.lower > self.lower, other.left_closed, self.left_closed & other.left_closed),
        )
        return BoxRegion(lower, upper, flags)

    def split(self, dim: int, threshold: float) -> tuple["BoxRegion", "BoxRegion"]:
        """Left/right children for a split strictly inside axis ``dim``."""
        a, b = self.lower[dim], self.upper[dim]
        if not (a < threshold < b):
            raise ValueError(f"threshold {threshold} not interior to [{a}, {b}] on axis {dim}")
        left_upper = self.upper.copy()
        left_upper[dim] = threshold
        right_lower = self.lower.copy()
        right_lower[dim] = threshold
        right_flags = self.left_closed.copy()
        right_flags[dim] = False
        left = BoxRegion._make(self.lower, left_upper, self.left_closed)
        right = BoxRegion._make(right_lower, self.upper, right_flags)
        return left, right

    def __eq__(self, other) -> bool:
        if not isinstance(other, BoxRegion):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
            and np.array_equal(self.left_closed, other.left_closed)
        )

    def __repr__(self) -> str:  # pragma: no cover
        sides = ", ".join(
            f"{'[' if c else '('}{lo:g}, {up:g}]"
            for lo, up, c in zip(self.lower, self.upper, self.left_closed)
        )
        return f"BoxRegion({sides})"


def cell_l2_diameter(box: BoxRegion) -> float:
    """Euclidean diagonal length of a cell; 0 for degenerate cells."""
    return box.l2_diameter


@dataclass(frozen=True)
class SplitRecord:
    """One split: axis, threshold strictly inside the cell, and birth time."""

    dim: int
    threshold: float
    time: float


class PartitionNode:
    """Node of a Mondrian partition tree.

    Internal nodes carry a :class:`SplitRecord` and two children; leaves
    carry a pending clock, the already-drawn candidate split time that
    exceeded the partition lifetime (``inf`` for degenerate cells).
    """

    __slots__ = ("box", "birth_time", "split", "left", "right", "pending_clock")

    def __init__(self, box, birth_time, split=None, left=None, right=None, pending_clock=None):
        self.box = box
        self.birth_time = birth_time
        self.split = split
        self.left = left
        self.right = right
        self.pending_clock = pending_clock

    @property
    def is_leaf(self) -> bool:
        return self.split is None

    @property
    def children(self):
        """(left, right) for internal nodes, None for leaves."""
        if self.split is None:
            return None
        return (self.left, self.right)


class MondrianPartition:
    """A sampled Mondrian partition: tree, lifetime, and seed provenance.

    Immutable after construction; :func:`prune`, :func:`extend` and
    :func:`restrict` return new partitions.  Concurrent reads are safe.
    """

    __slots__ = ("root", "lifetime", "dim", "seed_provenance", "_flat")

    def __init__(self, root: PartitionNode, lifetime: float, dim: int, seed_provenance=None):
        self.root = root
        self.lifetime = float(lifetime)
        self.dim = int(dim)
        self.seed_provenance = seed_provenance
        self._flat = None

    # -- traversal ---------------------------------------------------------

    def iter_nodes(self):
        """Depth-first, left-before-right node iterator."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if node.split is not None:
                stack.append(node.right)
                stack.append(node.left)

    def leaves(self):
        """Leaves in depth-first, left-first order."""
        return [node for node in self.iter_nodes() if node.is_leaf]

    @property
    def n_leaves(self) -> int:
        return sum(1 for node in self.iter_nodes() if node.is_leaf)

    @property
    def n_splits(self) -> int:
        return sum(1 for node in self.iter_nodes() if not node.is_leaf)

    # -- point location ----------------------------------------------------

    def locate_leaf(self, x) -> PartitionNode:
        """Unique leaf containing ``x``; ties on a threshold go left."""
        x = np.asarray(x, dtype=np.float64)
        if not self.root.box.contains(x):
            raise ValueError(f"point {x.tolist()} is outside the root box")
        node = self.root
        while node.split is not None:
            if x[node.split.dim] <= node.split.threshold:
                node = node.left
            else:
                node = node.right
        return node

    def _flat_arrays(self):
        # "dim" is -1 at leaves; leaf_rank is the DFS-left-first leaf index.
        if self._flat is None:
            nodes = list(self.iter_nodes())
            n = len(nodes)
            dim = np.full(n, -1, dtype=np.int64)
            thr = np.zeros(n, dtype=np.float64)
            left = np.zeros(n, dtype=np.int64)
            right = np.zeros(n, dtype=np.int64)
            leaf_rank = np.full(n, -1, dtype=np.int64)
            index_of = {id(node): i for i, node in enumerate(nodes)}
            rank = 0
            for i, node in enumerate(nodes):
                if node.split is None:
                    leaf_rank[i] = rank
                    rank += 1
                else:
                    dim[i] = node.split.dim
                    thr[i] = node.split.threshold
                    left[i] = index_of[id(node.left)]
                    right[i] = index_of[id(node.right)]
            self._flat = (dim, thr, left, right, leaf_rank, rank)
        return self._flat

    def leaf_indices(self, X) -> np.ndarray:
        """DFS-left-first leaf index for each row of ``X`` (shape (n, dim))."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise ValueError(f"X must have shape (n, {self.dim})")
        bad = self._rows_outside_root(X)
        if bad.size:
            raise ValueError(f"points outside the root box at indices {bad.tolist()}")
        dim, thr, left, right, leaf_rank, _ = self._flat_arrays()
        pos = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while rows.size:
            cur = pos[rows]
            internal = dim[cur] >= 0
            rows = rows[internal]
            if rows.size == 0:
                break
            cur = cur[internal]
            go_left = X[rows, dim[cur]] <= thr[cur]
            pos[rows] = np.where(go_left, left[cur], right[cur])
        return leaf_rank[pos]

    def _rows_outside_root(self, X) -> np.ndarray:
        box = self.root.box
        at_lower_ok = np.where(box.left_closed, X >= box.lower, X > box.lower)
        inside = at_lower_ok.all(axis=1) & (X <= box.upper).all(axis=1)
        return np.nonzero(~inside)[0]

    # -- comparisons -------------------------------------------------------

    def structurally_equal(self, other: "MondrianPartition") -> bool:
        """Node-for-node equality of boxes, splits, times, and pending clocks.

        Seed provenance is not compared.
        """
        if self.dim != other.dim or self.lifetime != other.lifetime:
            return False
        stack = [(self.root, other.root)]
        while stack:
            a, b = stack.pop()
            if (a.split is None) != (b.split is None):
                return False
            if a.birth_time != b.birth_time or a.box != b.box:
                return False
            if a.split is None:
                if a.pending_clock != b.pending_clock:
                    return False
            else:
                if a.split != b.split:
                    return False
                stack.append((a.right, b.right))
                stack.append((a.left, b.left))
        return True


def sample_mondrian(
    box: BoxRegion,
    lifetime: float,
    rng: RngStream,
    max_splits: int = DEFAULT_MAX_SPLITS,
) -> MondrianPartition:
    """Sample a Mondrian partition of ``box`` with the given lifetime.

    Each cell draws an Exp(|C|) clock; if the accumulated time stays within
    the lifetime the cell splits (axis with probability proportional to side
    length, threshold uniform on the side) and both children recurse,
    otherwise the cell becomes a leaf and keeps the clock as its pending
    clock.  Degenerate cells (|C| = 0) never split.

    Raises
    ------
    ValueError
        If ``lifetime`` is negative.
    SplitLimitError
        If the construction would exceed ``max_splits`` splits.
    """
    if lifetime < 0:
        raise ValueError(f"lifetime must be >= 0, got {lifetime}")
    counter_before = rng.counter
    root = PartitionNode(box, 0.0)
    n_splits = 0
    stack = [(root, 0.0)]
    while stack:
        node, birth = stack.pop()
        cell = node.box
        sides = cell.upper - cell.lower
        clock = birth + rng.exponential(float(sides.sum()))
        if clock <= lifetime:
            if n_splits >= max_splits:
                raise SplitLimitError(
                    f"partition exceeded the split budget of {max_splits}; "
                    f"raise max_splits or lower the lifetime"
                )
            n_splits += 1
            axis = rng.categorical(sides.tolist())
            a, b = cell.lower[axis], cell.upper[axis]
            threshold = a + (b - a) * rng.uniform()
            while not (a < threshold < b):
                threshold = a + (b - a) * rng.uniform()
            node.split = SplitRecord(dim=axis, threshold=threshold, time=clock)
            left_box, right_box = cell.split(axis, threshold)
            node.left = PartitionNode(left_box, clock)
            node.right = PartitionNode(right_box, clock)
            stack.append((node.right, clock))
            stack.append((node.left, clock))
        else:
            node.pending_clock = clock
    provenance = {
        "op": "sample",
        "algorithm": "philox4x64",
        "seed": rng.seed,
        "stream_path": list(rng.path),
        "draws": rng.counter - counter_before,
    }
    return MondrianPartition(root, lifetime, box.dim, provenance)


def _copy_node(node: PartitionNode) -> PartitionNode:
    return PartitionNode(
        node.box, node.birth_time, node.split, None, None, node.pending_clock
    )


def prune(partition: MondrianPartition, new_lifetime: float) -> MondrianPartition:
    """Remove every split born after ``new_lifetime``.

    A removed subtree collapses to a leaf whose pending clock is the earliest
    removed split time (its own split time, since times increase downward).
    """
    if new_lifetime < 0:
        raise ValueError(f"new_lifetime must be >= 0, got {new_lifetime}")
    if new_lifetime > partition.lifetime:
        raise ValueError(
            f"new_lifetime {new_lifetime} exceeds lifetime {partition.lifetime}; use extend"
        )
    root = _copy_node(partition.root)
    stack = [(partition.root, root)]
    while stack:
        src, dst = stack.pop()
        if src.split is None:
            continue
        if src.split.time > new_lifetime:
            dst.split = None
            dst.pending_clock = src.split.time
            continue
        dst.left = _copy_node(src.left)
        dst.right = _copy_node(src.right)
        stack.append((src.right, dst.right))
        stack.append((src.left, dst.left))
    provenance = {"op": "prune", "base": partition.seed_provenance}
    return MondrianPartition(root, new_lifetime, partition.dim, provenance)


def extend(
    partition: MondrianPartition,
    new_lifetime: float,
    rng: RngStream,
    max_splits: int = DEFAULT_MAX_SPLITS,
) -> MondrianPartition:
    """Continue the construction to a larger lifetime.

    Existing structure is untouched.  A leaf whose pending clock falls within
    the new lifetime splits exactly at that clock (axis and threshold drawn
    fresh) and the recursion resumes below it; other leaves persist with
    their clocks.  Because the retained clock has the memoryless conditional
    law, the output is marginally a Mondrian partition at the new lifetime,
    and pruning back at the old lifetime restores the input exactly.
    """
    if new_lifetime < partition.lifetime:
        raise ValueError(
            f"new_lifetime {new_lifetime} is below lifetime {partition.lifetime}; use prune"
        )
    counter_before = rng.counter
    root = _copy_node(partition.root)
    n_splits = 0
    # work items: ("copy", src, dst) mirrors existing nodes; ("grow", dst,
    # birth) resumes the sampler below a former leaf.  Fresh clocks are drawn
    # on cell entry, left subtree before right, matching the sampling order.
    stack = [("copy", partition.root, root)]
    while stack:
        item = stack.pop()
        if item[0] == "copy":
            _, src, dst = item
            if src.split is not None:
                dst.left = _copy_node(src.left)
                dst.right = _copy_node(src.right)
                stack.append(("copy", src.right, dst.right))
                stack.append(("copy", src.left, dst.left))
                continue
            if src.pending_clock > new_lifetime:
                continue
            # former leaf: split at the retained clock, then keep growing
            dst.pending_clock = None
            split_time = src.pending_clock
        else:
            _, dst, birth = item
            split_time = birth + rng.exponential(dst.box.linear_dimension)
            if split_time > new_lifetime:
                dst.pending_clock = split_time
                continue
        if n_splits >= max_splits:
            raise SplitLimitError(
                f"extension exceeded the split budget of {max_splits}"
            )
        n_splits += 1
        cell = dst.box
        axis = rng.categorical((cell.upper - cell.lower).tolist())
        a, b = cell.lower[axis], cell.upper[axis]
        threshold = a + (b - a) * rng.uniform()
        while not (a < threshold < b):
            threshold = a + (b - a) * rng.uniform()
        dst.split = SplitRecord(dim=axis, threshold=threshold, time=split_time)
        left_box, right_box = cell.split(axis, threshold)
        dst.left = PartitionNode(left_box, split_time)
        dst.right = PartitionNode(right_box, split_time)
        stack.append(("grow", dst.right, split_time))
        stack.append(("grow", dst.left, split_time))
    provenance = {
        "op": "extend",
        "base": partition.seed_provenance,
        "algorithm": "philox4x64",
        "seed": rng.seed,
        "stream_path": list(rng.path),
        "draws": rng.counter - counter_before,
    }
    return MondrianPartition(root, new_lifetime, partition.dim, provenance)


def restrict(partition: MondrianPartition, sub: BoxRegion) -> MondrianPartition:
    """Partition of ``sub`` induced by an existing partition.

    Splits whose threshold lies strictly inside ``sub`` on their axis are
    kept with their birth times and their cells clipped to ``sub``; splits
    that miss the interior of ``sub`` are dropped and the walk descends into
    the child that covers ``sub``.  Node birth times become the maximum over
    retained ancestors' split times.  Leaves inherit the pending clock of the
    original leaf they were clipped from.
    """
    if sub.dim != partition.dim:
        raise ValueError("sub-box dimension mismatch")
    if not partition.root.box.contains_box(sub):
        raise ValueError("sub-box is not contained in the root box")
    new_root = PartitionNode(sub, 0.0)
    # (src_node, dest_node) pairs; dest box is already clipped.
    stack = [(partition.root, new_root)]
    while stack:
        src, dst = stack.pop()
        while src.split is not None:
            axis, s = src.split.dim, src.split.threshold
            if dst.box.lower[axis] < s < dst.box.upper[axis]:
                break
            # split misses the interior of dst.box: descend one side
            src = src.left if s >= dst.box.upper[axis] else src.right
        if src.split is None:
            dst.pending_clock = src.pending_clock
            continue
        time = src.split.time
        dst.split = SplitRecord(dim=src.split.dim, threshold=src.split.threshold, time=time)
        left_box, right_box = dst.box.split(src.split.dim, src.split.threshold)
        dst.left = PartitionNode(left_box, time)
        dst.right = PartitionNode(right_box, time)
        stack.append((src.right, dst.right))
        stack.append((src.left, dst.left))
    provenance = {"op": "restrict", "base": partition.seed_provenance}
    return MondrianPartition(new_root, partition.lifetime, partition.dim, provenance)


def locate_leaf(partition: MondrianPartition, x) -> PartitionNode:
    """Leaf of ``partition`` whose cell contains ``x``."""
    return partition.locate_leaf(x)


def leaf_cells(partition: MondrianPartition) -> list[BoxRegion]:
    """Leaf boxes in depth-first, left-first order."""
    return [leaf.box for leaf in partition.leaves()]


def leaf_count(partition: MondrianPartition) -> int:
    """Number of leaves; always one more than the number of splits."""
    return partition.n_leaves


# -- serialization ----------------------------------------------------------


def _clock_to_json(clock: float):
    return None if math.isinf(clock) else clock


def _clock_from_json(value) -> float:
    return math.inf if value is None else float(value)


def partition_to_dict(partition: MondrianPartition, include_provenance: bool = True) -> dict:
    """JSON-ready dict: root box plus depth-first node records.

    Internal nodes serialize as ``{"split": {"dim", "threshold", "time"}}``
    (0-based axis), leaves as ``{"leaf": {"pending_clock"}}`` with ``null``
    for an infinite clock.  Boxes and birth times are reconstructed from the
    split records on load.
    """
    box = partition.root.box
    nodes = []
    for node in partition.iter_nodes():
        if node.split is None:
            nodes.append({"leaf": {"pending_clock": _clock_to_json(node.pending_clock)}})
        else:
            nodes.append(
                {
                    "split": {
                        "dim": node.split.dim,
                        "threshold": node.split.threshold,
                        "time": node.split.time,
                    }
                }
            )
    out = {
        "schema": PARTITION_SCHEMA,
        "dim": partition.dim,
        "lifetime": partition.lifetime,
        "box": {
            "lower": box.lower.tolist(),
            "upper": box.upper.tolist(),
            "left_closed": box.left_closed.tolist(),
        },
        "nodes": nodes,
    }
    if include_provenance:
        out["seed_provenance"] = partition.seed_provenance
    return out


def partition_from_dict(data: dict) -> MondrianPartition:
    """Inverse of :func:`partition_to_dict`; validates the schema tag."""
    if data.get("schema") != PARTITION_SCHEMA:
        raise ValueError(f"unsupported partition schema: {data.get('schema')!r}")
    box = BoxRegion(
        data["box"]["lower"], data["box"]["upper"], data["box"]["left_closed"]
    )
    records = iter(data["nodes"])

    root = PartitionNode(box, 0.0)
    stack = [root]
    consumed = 0
    while stack:
        node = stack.pop()
        try:
            rec = next(records)
        except StopIteration:
            raise ValueError("truncated node list") from None
        consumed += 1
        if "split" in rec:
            spec = rec["split"]
            split = SplitRecord(int(spec["dim"]), float(spec["threshold"]), float(spec["time"]))
            left_box, right_box = node.box.split(split.dim, split.threshold)
            node.split = split
            node.left = PartitionNode(left_box, split.time)
            node.right = PartitionNode(right_box, split.time)
            stack.append(node.right)
            stack.append(node.left)
        elif "leaf" in rec:
            node.pending_clock = _clock_from_json(rec["leaf"]["pending_clock"])
        else:
            raise ValueError(f"node record must contain 'split' or 'leaf': {rec}")
    if consumed != len(data["nodes"]):
        raise ValueError("extra node records after the tree was complete")
    return MondrianPartition(
        root, float(data["lifetime"]), int(data["dim"]), data.get("seed_provenance")
    )


def partition_to_json(partition: MondrianPartition, **kwargs) -> str:
    return json.dumps(partition_to_dict(partition, **kwargs), indent=2)


def partition_from_json(text: str) -> MondrianPartition:
    return partition_from_dict(json.loads(text))


def validate_partition(partition: MondrianPartition) -> None:
    """Check structural invariants; raises AssertionError on violation.

    Used by tests and after deserialization: birth times strictly increase
    along every path, split times stay within the lifetime, thresholds are
    interior, children partition their parent, and live leaves carry pending
    clocks beyond the lifetime.
    """
    stack = [partition.root]
    while stack:
        node = stack.pop()
        if node.split is not None:
            assert (node.left is not None) and (node.right is not None)
            assert node.split.time <= partition.lifetime
            assert node.split.time > node.birth_time
            assert node.left.birth_time == node.split.time
            assert node.right.birth_time == node.split.time
            a = node.box.lower[node.split.dim]
            b = node.box.upper[node.split.dim]
            assert a < node.split.threshold < b
            assert node.left.box.upper[node.split.dim] == node.split.threshold
            assert node.right.box.lower[node.split.dim] == node.split.threshold
            assert not node.right.box.left_closed[node.split.dim]
            stack.append(node.right)
            stack.append(node.left)
        else:
            assert node.left is None and node.right is None
            assert node.pending_clock is not None
            if node.box.linear_dimension > 0:
                assert node.pending_clock > partition.lifetime
            else:
                assert math.isinf(node.pending_clock)
