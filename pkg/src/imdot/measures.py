"""Discrete measures, labeled datasets and ground costs.

Everything downstream (enumeration families, transport solvers, the toy
experiments) works on the three types defined here.  All types are immutable
after construction and safe to share between worker processes.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

__all__ = [
    "DiscreteMeasure",
    "LabeledDataset",
    "CostMatrix",
    "empirical_measure",
    "class_conditionals",
    "cost_matrix",
    "mix",
    "save_dataset",
    "load_dataset",
    "save_measure",
    "load_measure",
]

#: Probability measures must carry total mass 1 within this tolerance.
PROBABILITY_TOL = 1e-12

#: Two atoms count as the same support point when every coordinate agrees
#: within this tolerance.
ATOM_MATCH_TOL = 1e-12


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class DiscreteMeasure:
    """A nonnegative measure given by finitely many weighted atoms.

    Parameters
    ----------
    points : (n, d) array
        Atom coordinates.  Duplicate coordinates are allowed and are never
        merged; consumers must tolerate duplicated atoms.
    weights : (n,) array
        Nonnegative atom masses.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        if points.ndim != 2:
            raise ValueError("points must be a (n, d) array")
        if weights.ndim != 1 or len(weights) != len(points):
            raise ValueError(
                f"got {len(weights)} weights for {len(points)} points"
            )
        if not np.all(np.isfinite(points)):
            raise ValueError("points must be finite")
        if not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "points", _freeze(points))
        object.__setattr__(self, "weights", _freeze(weights))

    @property
    def n_atoms(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def is_probability(self) -> bool:
        return abs(self.total_mass - 1.0) <= PROBABILITY_TOL

    def support_points(self) -> np.ndarray:
        """Atoms carrying strictly positive mass."""
        return self.points[self.weights > 0]

    def scaled(self, factor: float) -> "DiscreteMeasure":
        """The measure with every weight multiplied by ``factor`` >= 0."""
        if factor < 0:
            raise ValueError("scaling factor must be nonnegative")
        return DiscreteMeasure(self.points, factor * self.weights)

    def to_dict(self) -> dict:
        return {"points": self.points.tolist(), "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteMeasure":
        return cls(np.asarray(data["points"], dtype=float),
                   np.asarray(data["weights"], dtype=float))


@dataclass(frozen=True)
class LabeledDataset:
    """Points with class labels in ``{1, ..., n_classes}``."""

    points: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        labels = np.asarray(self.labels)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        if labels.ndim != 1 or len(labels) != len(points):
            raise ValueError("labels must be a vector matching points")
        if not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == labels.astype(int)):
                raise ValueError("labels must be integers")
        labels = labels.astype(int)
        if self.n_classes < 1:
            raise ValueError("n_classes must be >= 1")
        if len(labels) and (labels.min() < 1 or labels.max() > self.n_classes):
            raise ValueError(
                f"labels must lie in 1..{self.n_classes}, "
                f"got range [{labels.min()}, {labels.max()}]"
            )
        object.__setattr__(self, "points", _freeze(points))
        object.__setattr__(self, "labels", _freeze(labels))

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes + 1)[1:]

    def class_proportions(self) -> np.ndarray:
        """Empirical class proportions n_k / n (sums to 1 up to 1e-12)."""
        if len(self) == 0:
            raise ValueError("empty dataset has no class proportions")
        return self.class_counts() / len(self)

    def class_indices(self, k: int) -> np.ndarray:
        """Positions of the class-``k`` points, in dataset order."""
        return np.flatnonzero(self.labels == k)


@dataclass(frozen=True)
class CostMatrix:
    """Dense matrix of nonnegative ground distances between two point sets."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2:
            raise ValueError("cost entries must form a 2-d matrix")
        if entries.size and (not np.all(np.isfinite(entries)) or entries.min() < 0):
            raise ValueError("cost entries must be finite and nonnegative")
        object.__setattr__(self, "entries", _freeze(entries))

    @property
    def row_count(self) -> int:
        return self.entries.shape[0]

    @property
    def col_count(self) -> int:
        return self.entries.shape[1]


def empirical_measure(dataset: LabeledDataset) -> DiscreteMeasure:
    """Uniform measure over the sample: every point gets weight 1/n."""
    n = len(dataset)
    if n == 0:
        raise ValueError("cannot build the empirical measure of an empty dataset")
    return DiscreteMeasure(dataset.points, np.full(n, 1.0 / n))


def class_conditionals(dataset: LabeledDataset):
    """Per-class uniform conditionals and the class-proportion vector.

    Returns
    -------
    conditionals : list of DiscreteMeasure
        ``conditionals[k-1]`` is uniform over the class-``k`` points (mass 1),
        or an empty mass-0 measure when the class has no members.
    proportions : (n_classes,) array
        ``n_k / n``; components of empty classes are 0 and the vector sums
        to 1.
    """
    if len(dataset) == 0:
        raise ValueError("cannot decompose an empty dataset")
    conditionals = []
    for k in range(1, dataset.n_classes + 1):
        idx = dataset.class_indices(k)
        if len(idx) == 0:
            conditionals.append(
                DiscreteMeasure(np.empty((0, dataset.dim)), np.empty(0))
            )
        else:
            conditionals.append(
                DiscreteMeasure(dataset.points[idx], np.full(len(idx), 1.0 / len(idx)))
            )
    return conditionals, dataset.class_proportions()


def cost_matrix(a, b, metric: str = "euclidean") -> CostMatrix:
    """Pairwise ground distances ``d(a_i, b_j)``.

    Only the Euclidean metric is supported; the parameter exists so callers
    can be explicit and future metrics slot in without API changes.
    """
    if metric != "euclidean":
        raise ValueError(f"unsupported metric {metric!r}")
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise ValueError(
            f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}"
        )
    if a.shape[0] == 0 or b.shape[0] == 0:
        return CostMatrix(np.zeros((a.shape[0], b.shape[0])))
    return CostMatrix(cdist(a, b))


def mix(base: DiscreteMeasure,
        components: Sequence[DiscreteMeasure],
        coeffs) -> DiscreteMeasure:
    """``base + sum_k coeffs[k] * components[k]`` as one measure.

    Atoms are concatenated; coordinates appearing both in the base and in a
    component stay duplicated.  Components with a zero coefficient are
    dropped, so a zero coefficient vector returns a measure identical to the
    base.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.ndim != 1 or len(coeffs) != len(components):
        raise ValueError("one coefficient per component is required")
    if np.any(coeffs < 0):
        raise ValueError("mix coefficients must be nonnegative")
    points = [base.points]
    weights = [base.weights]
    for coeff, comp in zip(coeffs, components):
        if comp.dim != base.dim and comp.n_atoms > 0:
            raise ValueError("component dimension differs from base")
        if coeff == 0 or comp.n_atoms == 0:
            continue
        points.append(comp.points)
        weights.append(coeff * comp.weights)
    return DiscreteMeasure(np.vstack(points), np.concatenate(weights))


# ---------------------------------------------------------------------------
# File formats: CSV datasets (header x1,...,xD,label) and JSON measures.
# ---------------------------------------------------------------------------

def save_dataset(dataset: LabeledDataset, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(dataset.dim)] + ["label"])
        for row, label in zip(dataset.points, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def load_dataset(path, n_classes: int | None = None) -> LabeledDataset:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[-1] != "label":
            raise ValueError(f"{path}: expected a trailing 'label' column")
        dim = len(header) - 1
        points, labels = [], []
        for row in reader:
            if not row:
                continue
            points.append([float(v) for v in row[:dim]])
            labels.append(int(row[dim]))
    labels = np.asarray(labels, dtype=int)
    if n_classes is None:
        n_classes = int(labels.max()) if len(labels) else 1
    return LabeledDataset(np.asarray(points, dtype=float), labels, n_classes)


def save_measure(measure: DiscreteMeasure, path) -> None:
    Path(path).write_text(json.dumps(measure.to_dict()))


def load_measure(path) -> DiscreteMeasure:
    return DiscreteMeasure.from_dict(json.loads(Path(path).read_text()))
