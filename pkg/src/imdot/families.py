"""Enumerable function families with global and per-class localization.

A family member is represented by its value vector over a fixed finite
ground set (the union of all measure atoms in play); a measure enters the
computations only through its weight vector on that ground set.  In the
discrete setting this representation is lossless.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .measures import ATOM_MATCH_TOL, DiscreteMeasure, _freeze

__all__ = [
    "FunctionFamily",
    "Localization",
    "FamilyTooLargeError",
    "indicator_family",
    "grid_family",
    "hdh_family",
    "lipschitz_family",
    "no_localization",
    "global_localization",
    "per_class_localization",
    "enumerate_members",
    "ground_union",
    "weights_on_ground",
    "mixture",
    "localization_inclusion_check",
    "load_hypotheses",
]

KIND_INDICATORS = "bounded01_indicators"
KIND_GRID = "bounded01_grid"
KIND_HDH = "hdh"
KIND_LIPSCHITZ = "lipschitz_lp"

#: Hard cap on brute-force enumeration (2^22 members).
MAX_MEMBERS = 1 << 22
MAX_INDICATOR_ATOMS = 22
MAX_HYPOTHESES = 60

#: Slack on localization membership tests E[f] <= eps, absorbing the float
#: error between a mixture expectation and its per-class decomposition.
MEMBERSHIP_TOL = 1e-12

_BATCH = 1 << 14


class FamilyTooLargeError(ValueError):
    """Enumeration would exceed the brute-force caps."""


@dataclass(frozen=True)
class FunctionFamily:
    """A family of nonnegative functions on a finite ground set.

    Kinds
    -----
    - ``bounded01_indicators``: all subset indicators of the ground set.
    - ``bounded01_grid``: all functions with values on the quantized grid
      ``{0, step, ..., 1}``; the enumerable stand-in for the convex family
      of [0, 1]-valued functions.
    - ``hdh``: disagreement indicators ``[h1 != h2]`` over all pairs from an
      explicit finite hypothesis list (labels over the ground points).
    - ``lipschitz_lp``: nonnegative 1-Lipschitz functions; not enumerable,
      handled analytically by the transport solvers in :mod:`imdot.ot`.

    Every enumerable kind contains the null function.
    """

    kind: str
    ground_points: np.ndarray
    hypotheses: np.ndarray | None = None
    grid_step: float = 0.25

    def __post_init__(self):
        if self.kind not in (KIND_INDICATORS, KIND_GRID, KIND_HDH, KIND_LIPSCHITZ):
            raise ValueError(f"unknown family kind {self.kind!r}")
        pts = np.asarray(self.ground_points, dtype=float)
        if pts.ndim != 2 or len(pts) == 0:
            raise ValueError("ground_points must be a nonempty (n, d) array")
        object.__setattr__(self, "ground_points", _freeze(pts))
        if self.kind == KIND_HDH:
            if self.hypotheses is None:
                raise ValueError("hdh families need an explicit hypothesis list")
            hyp = np.asarray(self.hypotheses, dtype=int)
            if hyp.ndim != 2 or hyp.shape[1] != len(pts):
                raise ValueError("hypotheses must be (m, n_ground) label rows")
            object.__setattr__(self, "hypotheses", _freeze(hyp))
        if self.kind == KIND_GRID:
            levels = 1.0 / self.grid_step
            if abs(levels - round(levels)) > 1e-9:
                raise ValueError("grid_step must divide 1 exactly")

    @property
    def n_ground(self) -> int:
        return len(self.ground_points)

    def member_count(self) -> int:
        if self.kind == KIND_INDICATORS:
            return 1 << self.n_ground
        if self.kind == KIND_GRID:
            return (int(round(1.0 / self.grid_step)) + 1) ** self.n_ground
        if self.kind == KIND_HDH:
            m = len(self.hypotheses)
            return m * (m + 1) // 2
        raise FamilyTooLargeError(
            "lipschitz_lp families are not enumerable; use the LP solvers in imdot.ot"
        )


def indicator_family(ground_points) -> FunctionFamily:
    return FunctionFamily(KIND_INDICATORS, np.asarray(ground_points, dtype=float))


def grid_family(ground_points, step: float = 0.25) -> FunctionFamily:
    return FunctionFamily(KIND_GRID, np.asarray(ground_points, dtype=float),
                          grid_step=step)


def hdh_family(ground_points, hypotheses) -> FunctionFamily:
    return FunctionFamily(KIND_HDH, np.asarray(ground_points, dtype=float),
                          hypotheses=np.asarray(hypotheses, dtype=int))


def lipschitz_family(ground_points) -> FunctionFamily:
    return FunctionFamily(KIND_LIPSCHITZ, np.asarray(ground_points, dtype=float))


def load_hypotheses(path) -> np.ndarray:
    """Hypothesis list from JSON: an array of label vectors over ground points."""
    data = json.loads(Path(path).read_text())
    return np.asarray(data, dtype=int)


# ---------------------------------------------------------------------------
# Localization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Localization:
    """Expectation constraints restricting a family.

    ``global``: keep members with ``E_reference[f] <= eps``.
    ``per_class``: keep members with ``E_conditional_k[f] <= eps[k]`` for
    every class; infinite components make the corresponding constraint
    vacuous.
    """

    mode: str
    eps: object = None
    reference: object = None

    def __post_init__(self):
        if self.mode not in ("none", "global", "per_class"):
            raise ValueError(f"unknown localization mode {self.mode!r}")
        if self.mode == "global":
            if np.ndim(self.eps) != 0 or self.eps < 0:
                raise ValueError("global localization needs a scalar eps >= 0")
            if not isinstance(self.reference, DiscreteMeasure):
                raise ValueError("global localization needs a reference measure")
        if self.mode == "per_class":
            eps = np.asarray(self.eps, dtype=float)
            if eps.ndim != 1 or np.any(eps < 0):
                raise ValueError("per-class localization needs a vector eps >= 0")
            object.__setattr__(self, "eps", _freeze(eps))
            ref = tuple(self.reference)
            if len(ref) != len(eps):
                raise ValueError("one conditional per eps component is required")
            object.__setattr__(self, "reference", ref)


def no_localization() -> Localization:
    return Localization("none")


def global_localization(eps: float, reference: DiscreteMeasure) -> Localization:
    return Localization("global", float(eps), reference)


def per_class_localization(eps, conditionals: Sequence[DiscreteMeasure]) -> Localization:
    return Localization("per_class", eps, tuple(conditionals))


def _admission_mask(batch: np.ndarray, loc: Localization,
                    ground_points: np.ndarray) -> np.ndarray:
    if loc.mode == "none":
        return np.ones(len(batch), dtype=bool)
    if loc.mode == "global":
        w = weights_on_ground(loc.reference, ground_points)
        return batch @ w <= loc.eps + MEMBERSHIP_TOL
    mask = np.ones(len(batch), dtype=bool)
    for eps_k, cond in zip(loc.eps, loc.reference):
        if np.isinf(eps_k):
            continue
        w = weights_on_ground(cond, ground_points)
        mask &= batch @ w <= eps_k + MEMBERSHIP_TOL
    return mask


# ---------------------------------------------------------------------------
# Ground-set plumbing
# ---------------------------------------------------------------------------

def ground_union(*point_sets, tol: float = ATOM_MATCH_TOL) -> np.ndarray:
    """Deduplicated union of atom coordinate sets, first occurrence kept."""
    arrays = [np.atleast_2d(np.asarray(p, dtype=float)) for p in point_sets
              if len(np.atleast_2d(p)) > 0]
    if not arrays:
        raise ValueError("cannot build a ground set from empty point sets")
    stacked = np.vstack(arrays)
    kept: list[np.ndarray] = []
    for row in stacked:
        if not any(np.max(np.abs(row - prev)) <= tol for prev in kept):
            kept.append(row)
    return np.asarray(kept)


def weights_on_ground(measure: DiscreteMeasure, ground_points: np.ndarray,
                      tol: float = ATOM_MATCH_TOL) -> np.ndarray:
    """Weight vector of ``measure`` over ``ground_points``.

    Every atom must match a ground point coordinate-wise within ``tol``;
    duplicated atoms accumulate onto the matched ground point.
    """
    ground_points = np.asarray(ground_points, dtype=float)
    w = np.zeros(len(ground_points))
    if measure.n_atoms == 0:
        return w
    if measure.points.shape[1] != ground_points.shape[1]:
        raise ValueError("measure and ground set have different dimensions")
    dist = cdist(measure.points, ground_points, metric="chebyshev")
    idx = np.argmin(dist, axis=1)
    if np.any(dist[np.arange(len(idx)), idx] > tol):
        bad = int(np.argmax(dist[np.arange(len(idx)), idx]))
        raise ValueError(
            f"atom {measure.points[bad].tolist()} is not on the ground set"
        )
    np.add.at(w, idx, measure.weights)
    return w


def mixture(conditionals: Sequence[DiscreteMeasure], coeffs) -> DiscreteMeasure:
    """``sum_k coeffs[k] * conditionals[k]`` as a single measure."""
    coeffs = np.asarray(coeffs, dtype=float)
    points = [c.points for c in conditionals if c.n_atoms]
    weights = [float(a) * c.weights for a, c in zip(coeffs, conditionals) if c.n_atoms]
    if not points:
        raise ValueError("mixture of empty conditionals")
    return DiscreteMeasure(np.vstack(points), np.concatenate(weights))


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def member_batches(family: FunctionFamily,
                   batch_size: int = _BATCH) -> Iterator[np.ndarray]:
    """Member value vectors in deterministic order, as (batch, n) arrays.

    Indicators are ordered by subset mask (bit j of the mask is the value at
    ground point j); grid members by mixed-radix counting; hdh members by
    hypothesis pair (i <= j).  The first member of every kind is the null
    function.
    """
    n = family.n_ground
    if family.kind == KIND_INDICATORS:
        if n > MAX_INDICATOR_ATOMS:
            raise FamilyTooLargeError(
                f"{n} ground atoms exceed the 2^{MAX_INDICATOR_ATOMS} indicator "
                "enumeration cap; use the LP-based families instead"
            )
        total = 1 << n
        bit = 1 << np.arange(n, dtype=np.int64)
        for start in range(0, total, batch_size):
            masks = np.arange(start, min(start + batch_size, total), dtype=np.int64)
            yield ((masks[:, None] & bit) > 0).astype(float)
    elif family.kind == KIND_GRID:
        levels = int(round(1.0 / family.grid_step)) + 1
        total = levels ** n
        if total > MAX_MEMBERS:
            raise FamilyTooLargeError(
                f"{levels}^{n} grid members exceed the {MAX_MEMBERS} enumeration "
                "cap; use the LP-based families instead"
            )
        radix = levels ** np.arange(n, dtype=np.int64)
        for start in range(0, total, batch_size):
            idx = np.arange(start, min(start + batch_size, total), dtype=np.int64)
            yield (idx[:, None] // radix % levels) * family.grid_step
    elif family.kind == KIND_HDH:
        hyp = family.hypotheses
        if len(hyp) > MAX_HYPOTHESES:
            raise FamilyTooLargeError(
                f"{len(hyp)} hypotheses exceed the {MAX_HYPOTHESES} cap"
            )
        members = [(hyp[i] != hyp[j]).astype(float)
                   for i in range(len(hyp)) for j in range(i, len(hyp))]
        yield np.asarray(members)
    else:
        raise FamilyTooLargeError(
            "lipschitz_lp families are not enumerable; use the LP solvers in imdot.ot"
        )


def enumerate_members(family: FunctionFamily,
                      loc: Localization | None = None) -> Iterator[np.ndarray]:
    """Yield exactly the member value vectors admitted by ``loc``.

    The null function always passes any localization (its expectations are
    all zero).
    """
    if loc is None:
        loc = no_localization()
    for batch in member_batches(family):
        mask = _admission_mask(batch, loc, family.ground_points)
        for row in batch[mask]:
            yield row


# ---------------------------------------------------------------------------
# Localization inclusion checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InclusionReport:
    per_class_in_global: bool
    global_in_per_class: bool
    per_class_size: int
    global_size: int
    counterexample: np.ndarray | None

    @property
    def ok(self) -> bool:
        return self.per_class_in_global and self.global_in_per_class


def localization_inclusion_check(family: FunctionFamily,
                                 conditionals: Sequence[DiscreteMeasure],
                                 proportions,
                                 eps_vec,
                                 eps: float | None = None) -> InclusionReport:
    """Check both localization inclusions on an enumerable family.

    Direction 1: the family localized per class at ``eps_vec`` is contained
    in the family localized globally at ``proportions @ eps_vec``.
    Direction 2: the family localized globally at ``eps`` (default
    ``proportions @ eps_vec``) is contained in the per-class localization at
    ``eta_k = eps / proportions[k]`` (infinite where a class is empty).
    """
    p = np.asarray(proportions, dtype=float)
    eps_vec = np.asarray(eps_vec, dtype=float)
    if eps is None:
        eps = float(p @ eps_vec)
    reference = mixture(conditionals, p)

    eta = np.where(p > 0, eps / np.where(p > 0, p, 1.0), np.inf)

    per_class = per_class_localization(eps_vec, conditionals)
    glob_pte = global_localization(float(p @ eps_vec), reference)
    glob_eps = global_localization(eps, reference)
    per_class_eta = per_class_localization(eta, conditionals)

    ok1 = ok2 = True
    size_pc = size_glob = 0
    counterexample = None
    for batch in member_batches(family):
        in_pc = _admission_mask(batch, per_class, family.ground_points)
        in_glob_pte = _admission_mask(batch, glob_pte, family.ground_points)
        in_glob = _admission_mask(batch, glob_eps, family.ground_points)
        in_pc_eta = _admission_mask(batch, per_class_eta, family.ground_points)
        size_pc += int(in_pc.sum())
        size_glob += int(in_glob.sum())
        bad1 = in_pc & ~in_glob_pte
        bad2 = in_glob & ~in_pc_eta
        if bad1.any():
            ok1 = False
            if counterexample is None:
                counterexample = batch[int(np.argmax(bad1))].copy()
        if bad2.any():
            ok2 = False
            if counterexample is None:
                counterexample = batch[int(np.argmax(bad2))].copy()
    return InclusionReport(ok1, ok2, size_pc, size_glob, counterexample)
