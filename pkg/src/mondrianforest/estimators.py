"""Mondrian tree and forest regressors and the plug-in classifier.

Partitions are sampled independently of the data (the defining property of a
purely random forest); fitting only aggregates per-leaf label statistics, so
a fitted tree stores one count and one label sum per leaf.  Empty leaves
predict exactly 0.  A forest is the plain arithmetic mean of its trees, and
tree ``m`` is derived from ``(master_seed, m)`` alone, so growing a forest
never changes the trees it already has.

Label sums are accumulated exactly, as integers in units of 2^-1074 (the
smallest positive float64).  Exact integer addition is associative and
commutative, which buys two properties float accumulation cannot offer:
permuting the training data leaves every prediction bit-identical, and a fold
of single-point updates equals a batch fit exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .partition import (
    BoxRegion,
    MondrianPartition,
    partition_from_dict,
    partition_to_dict,
    sample_mondrian,
)
from .rng import RngStream

__all__ = [
    "LeafStatistics",
    "MondrianTreeModel",
    "MondrianForestModel",
    "fit_tree",
    "predict_tree",
    "update_tree",
    "fit_forest",
    "predict_forest",
    "predict_class",
    "lifetime_schedule",
    "forest_size_schedule",
    "tree_model_to_dict",
    "tree_model_from_dict",
    "forest_model_to_dict",
    "forest_model_from_dict",
    "model_to_json",
    "model_from_json",
]

TREE_MODEL_SCHEMA = "mondrian-tree-model/1"
FOREST_MODEL_SCHEMA = "mondrian-forest-model/1"

# label values are scaled by 2^1074 to integers; 2^-1074 is the smallest
# positive float64, so every finite float64 is an exact multiple of it
_SCALE_BITS = 1074
_MANT = 2.0**53


def _scaled_int(value: float) -> int:
    """Exact integer representation of a finite float64 in 2^-1074 units."""
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"labels must be finite, got {value}")
    m, e = math.frexp(value)
    mant = int(m * _MANT)
    shift = e - 53 + _SCALE_BITS
    if shift >= 0:
        return mant << shift
    return mant >> (-shift)  # subnormal: the dropped bits are zero


def _scaled_ints(y: np.ndarray) -> list[int]:
    if y.size == 0:
        return []
    if not np.isfinite(y).all():
        raise ValueError("labels must be finite")
    m, e = np.frexp(y)
    mants = (m * _MANT).astype(np.int64).tolist()
    shifts = (e.astype(np.int64) + (_SCALE_BITS - 53)).tolist()
    return [(mant << s) if s >= 0 else (mant >> (-s)) for mant, s in zip(mants, shifts)]


def _scaled_to_float(total: int) -> float:
    return total / (1 << _SCALE_BITS)  # int/int division is correctly rounded


def _scaled_mean(total: int, count: int) -> float:
    return total / (count << _SCALE_BITS)


@dataclass(frozen=True)
class LeafStatistics:
    """Per-leaf sample count and exact label sum.

    ``scaled_sum`` is the exact sum of the leaf's labels in 2^-1074 units;
    ``label_sum`` and ``mean`` are its correctly rounded float views.
    """

    count: int
    scaled_sum: int

    @property
    def label_sum(self) -> float:
        return _scaled_to_float(self.scaled_sum)

    @property
    def mean(self) -> float:
        """Leaf prediction: average label, or exactly 0 for an empty leaf."""
        if self.count == 0:
            return 0.0
        return _scaled_mean(self.scaled_sum, self.count)

    @property
    def class_counts(self) -> tuple[int, int]:
        """(count of label 0, count of label 1) for binary 0/1 labels."""
        ones, rem = divmod(self.scaled_sum, 1 << _SCALE_BITS)
        if rem != 0 or not 0 <= ones <= self.count:
            raise ValueError("labels were not all in {0, 1}")
        return (self.count - ones, ones)


class MondrianTreeModel:
    """A partition plus per-leaf label statistics.

    Treat as immutable: :func:`update_tree` returns a new model.  Refitting
    on the same data in any order reproduces identical statistics, because
    label accumulation is exact.
    """

    __slots__ = ("partition", "n_seen", "_counts", "_totals", "_means")

    def __init__(self, partition: MondrianPartition, counts: np.ndarray, totals: list[int], n_seen: int):
        self.partition = partition
        self._counts = counts
        self._totals = totals
        self.n_seen = n_seen
        self._means = None

    @property
    def n_leaves(self) -> int:
        return len(self._totals)

    def leaf_statistics(self) -> list[LeafStatistics]:
        """Statistics per leaf, in depth-first leaf order."""
        return [LeafStatistics(int(c), t) for c, t in zip(self._counts, self._totals)]

    @property
    def leaf_stats(self) -> dict:
        """Map from leaf node to its statistics."""
        return dict(zip(self.partition.leaves(), self.leaf_statistics()))

    def _leaf_means(self) -> np.ndarray:
        if self._means is None:
            self._means = np.array(
                [
                    _scaled_mean(t, int(c)) if c else 0.0
                    for c, t in zip(self._counts, self._totals)
                ],
                dtype=np.float64,
            )
        return self._means

    def predict(self, x):
        """Prediction at a point (1-d input) or batch of points (2-d input)."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            return float(self.predict(x[None, :])[0])
        ranks = self.partition.leaf_indices(x)
        return self._leaf_means()[ranks]


def fit_tree(partition: MondrianPartition, X, y) -> MondrianTreeModel:
    """Aggregate labels into the leaves of a fixed partition.

    ``X`` has shape (n, dim), ``y`` shape (n,).  The partition is untouched;
    points outside the root box raise a ValueError naming the offending rows.
    """
    X, y = _check_data(partition.dim, X, y)
    return _fit_prepared(partition, X, _scaled_ints(y))


def _check_data(dim: int, X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != dim:
        raise ValueError(f"X must have shape (n, {dim})")
    if y.shape != (X.shape[0],):
        raise ValueError("y must have shape (n,)")
    return X, y


def _fit_prepared(partition: MondrianPartition, X: np.ndarray, scaled: list[int]) -> MondrianTreeModel:
    n_leaves = partition._flat_arrays()[5]
    if X.shape[0] == 0:
        return MondrianTreeModel(partition, np.zeros(n_leaves, dtype=np.int64), [0] * n_leaves, 0)
    ranks = partition.leaf_indices(X)
    counts = np.bincount(ranks, minlength=n_leaves)
    totals = [0] * n_leaves
    for rank, value in zip(ranks.tolist(), scaled):
        totals[rank] += value
    return MondrianTreeModel(partition, counts, totals, X.shape[0])


def predict_tree(model: MondrianTreeModel, x):
    """Leaf-mean prediction; exactly 0 on empty leaves."""
    return model.predict(x)


def update_tree(model: MondrianTreeModel, x, y) -> MondrianTreeModel:
    """New model equivalent to refitting on the data plus one point."""
    x = np.asarray(x, dtype=np.float64)
    rank = int(model.partition.leaf_indices(x[None, :])[0])
    counts = model._counts.copy()
    totals = list(model._totals)
    counts[rank] += 1
    totals[rank] += _scaled_int(y)
    return MondrianTreeModel(model.partition, counts, totals, model.n_seen + 1)


class MondrianForestModel:
    """Average of independently grown Mondrian trees.

    Tree ``m`` is grown from the child stream ``(master_seed, m)``, so models
    with different tree counts share their leading trees exactly.
    ``master_seed`` is an int for a root stream, or ``(seed, path...)`` when
    the forest was grown from a derived stream.
    """

    __slots__ = ("trees", "lifetime", "master_seed")

    def __init__(self, trees: list[MondrianTreeModel], lifetime: float, master_seed):
        if not trees:
            raise ValueError("a forest needs at least one tree")
        self.trees = list(trees)
        self.lifetime = float(lifetime)
        self.master_seed = master_seed if isinstance(master_seed, tuple) else int(master_seed)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def per_tree_predictions(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        preds = np.stack([tree.predict(x) for tree in self.trees])
        return preds[:, 0] if single else preds

    def predict(self, x):
        """Arithmetic mean of tree predictions, summed in tree order."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            return float(self.predict(x[None, :])[0])
        acc = np.zeros(x.shape[0], dtype=np.float64)
        for tree in self.trees:
            acc += tree.predict(x)
        return acc / self.n_trees

    def predict_class(self, x):
        """Plug-in classifier: 1 where the regression estimate is >= 1/2."""
        pred = self.predict(x)
        if np.ndim(pred) == 0:
            return int(pred >= 0.5)
        return (pred >= 0.5).astype(np.int64)


def fit_forest(
    box: BoxRegion,
    d: int,
    lifetime: float,
    n_trees: int,
    X,
    y,
    master_seed,
    max_splits: int = 1_000_000,
) -> MondrianForestModel:
    """Grow ``n_trees`` independent partitions and fit each with the data.

    ``master_seed`` is an integer, or an :class:`RngStream` whose children
    drive the trees (used for composing experiments from derived streams).
    """
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    if lifetime < 0:
        raise ValueError("lifetime must be >= 0")
    if box.dim != d:
        raise ValueError(f"box has dimension {box.dim}, expected {d}")
    X, y = _check_data(d, X, y)
    scaled = _scaled_ints(y)
    if isinstance(master_seed, RngStream):
        master = master_seed
        master_seed = (master.seed,) + master.path
    else:
        master = RngStream(master_seed)
    trees = []
    for m in range(n_trees):
        part = sample_mondrian(box, lifetime, master.child(m), max_splits=max_splits)
        trees.append(_fit_prepared(part, X, scaled))
    return MondrianForestModel(trees, lifetime, master_seed)


def predict_forest(model: MondrianForestModel, x):
    """Forest prediction: exact mean of the tree predictions."""
    return model.predict(x)


def predict_class(model: MondrianForestModel, x):
    """Plug-in class label(s); a value of exactly 1/2 maps to class 1."""
    return model.predict_class(x)


_LIFETIME_EXPONENTS = {
    "lipschitz": lambda d: 1.0 / (d + 2),
    "c2": lambda d: 1.0 / (d + 4),
    # any exponent in (0, 1/d) keeps lifetime^d / n vanishing; 1/(2d) is our
    # pick among the valid regimes and is not canonical
    "consistency": lambda d: 1.0 / (2 * d),
}


def lifetime_schedule(kind: str, n: int, d: int, scale: float = 1.0) -> float:
    """Lifetime as a function of the sample size.

    ``lipschitz``: scale * n^(1/(d+2)); ``c2``: scale * n^(1/(d+4));
    ``consistency``: scale * n^(1/(2d)).
    """
    if kind not in _LIFETIME_EXPONENTS:
        raise ValueError(f"unknown schedule kind {kind!r}; expected one of {sorted(_LIFETIME_EXPONENTS)}")
    _check_schedule_args(n, d, scale)
    return scale * float(n) ** _LIFETIME_EXPONENTS[kind](d)


def forest_size_schedule(kind: str, n: int, d: int, scale: float = 1.0) -> int:
    """Tree count as a function of the sample size: ceil(scale * n^(2/(d+4)))."""
    if kind != "c2":
        raise ValueError(f"unknown forest-size schedule kind {kind!r}; expected 'c2'")
    _check_schedule_args(n, d, scale)
    raw = scale * float(n) ** (2.0 / (d + 4))
    # pow can land a hair above an exact integer; don't let that inflate ceil
    return max(1, math.ceil(raw - 1e-9))


def _check_schedule_args(n: int, d: int, scale: float) -> None:
    if n < 1:
        raise ValueError("n must be >= 1")
    if d < 1:
        raise ValueError("d must be >= 1")
    if scale <= 0:
        raise ValueError("scale must be > 0")


# -- serialization ----------------------------------------------------------


def tree_model_to_dict(model: MondrianTreeModel) -> dict:
    """Partition schema extended with per-leaf statistics.

    Exact label sums serialize as decimal strings of the 2^-1074-unit
    integers, so a round trip preserves predictions bit-exactly.
    """
    return {
        "schema": TREE_MODEL_SCHEMA,
        "partition": partition_to_dict(model.partition),
        "n_seen": model.n_seen,
        "leaf_stats": [
            [int(c), str(t)] for c, t in zip(model._counts, model._totals)
        ],
    }


def tree_model_from_dict(data: dict) -> MondrianTreeModel:
    if data.get("schema") != TREE_MODEL_SCHEMA:
        raise ValueError(f"unsupported tree model schema: {data.get('schema')!r}")
    partition = partition_from_dict(data["partition"])
    stats = data["leaf_stats"]
    if len(stats) != partition.n_leaves:
        raise ValueError("leaf_stats length does not match the partition")
    counts = np.array([int(c) for c, _ in stats], dtype=np.int64)
    totals = [int(t) for _, t in stats]
    return MondrianTreeModel(partition, counts, totals, int(data["n_seen"]))


def forest_model_to_dict(model: MondrianForestModel) -> dict:
    return {
        "schema": FOREST_MODEL_SCHEMA,
        "lifetime": model.lifetime,
        "master_seed": model.master_seed,
        "trees": [tree_model_to_dict(tree) for tree in model.trees],
    }


def forest_model_from_dict(data: dict) -> MondrianForestModel:
    if data.get("schema") != FOREST_MODEL_SCHEMA:
        raise ValueError(f"unsupported forest model schema: {data.get('schema')!r}")
    trees = [tree_model_from_dict(t) for t in data["trees"]]
    master_seed = data["master_seed"]
    if isinstance(master_seed, list):
        master_seed = tuple(master_seed)
    return MondrianForestModel(trees, float(data["lifetime"]), master_seed)


def model_to_json(model) -> str:
    if isinstance(model, MondrianForestModel):
        return json.dumps(forest_model_to_dict(model), indent=2)
    if isinstance(model, MondrianTreeModel):
        return json.dumps(tree_model_to_dict(model), indent=2)
    raise TypeError(f"not a model: {type(model).__name__}")


def model_from_json(text: str):
    data = json.loads(text)
    schema = data.get("schema")
    if schema == FOREST_MODEL_SCHEMA:
        return forest_model_from_dict(data)
    if schema == TREE_MODEL_SCHEMA:
        return tree_model_from_dict(data)
    raise ValueError(f"unsupported model schema: {schema!r}")
