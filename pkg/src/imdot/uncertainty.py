"""Scoring-function uncertainty and its source-guided combination.

Scores live on the probability simplex (softmax outputs) or, for the binary
hinge case, as a scalar margin.  Hypotheses over finite samples are plain
integer label arrays, so every infimum here is an exact scan.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "min_entropy_uncertainty",
    "renyi_entropy",
    "hinge_uncertainty",
    "zero_one_loss",
    "cross_entropy_loss",
    "l1_label_loss",
    "scaled_l1_loss",
    "loss_satisfies_triangle",
    "loss_pair_condition_holds",
    "FiniteHypothesisRisks",
    "hypothesis_risks",
    "source_guided_uncertainty",
    "SguPropertiesReport",
    "verify_sgu_properties",
]

SIMPLEX_TOL = 1e-12
LOG_CLIP = 1e-12


def _check_simplex(score) -> np.ndarray:
    v = np.asarray(score, dtype=float)
    if v.ndim != 1 or len(v) == 0:
        raise ValueError("a score vector must be a nonempty 1-d array")
    if np.any(v < 0) or abs(v.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError("score vector must lie on the probability simplex")
    return v


def min_entropy_uncertainty(score) -> float:
    """``-log(max_i score_i)``: the cross-entropy self-uncertainty of a scorer."""
    v = _check_simplex(score)
    top = float(v.max())
    if top <= 0:
        raise ValueError("degenerate all-zero score vector")
    return -np.log(top)


def renyi_entropy(score, alpha: float) -> float:
    """Renyi entropy ``(1/(1-alpha)) log sum_i v_i^alpha`` of a simplex vector.

    ``alpha = 1`` is the Shannon limit (computed directly), ``alpha = inf``
    the min-entropy and ``alpha = 0`` the log support size.  Nonincreasing in
    ``alpha``, so ``H_inf <= H_alpha`` for every ``alpha``.
    """
    v = _check_simplex(score)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if np.isinf(alpha):
        return min_entropy_uncertainty(v)
    if alpha == 1:
        pos = v[v > 0]
        return float(-np.sum(pos * np.log(pos)))
    if alpha == 0:
        return float(np.log(np.count_nonzero(v > 0)))
    return float(np.log(np.sum(v ** alpha)) / (1.0 - alpha))


def hinge_uncertainty(margin: float) -> float:
    """``(1 - |margin|)_+`` for a binary margin score."""
    return max(0.0, 1.0 - abs(float(margin)))


# ---------------------------------------------------------------------------
# Losses on (score, label) and (label, label) pairs
# ---------------------------------------------------------------------------

def zero_one_loss(prediction, label) -> float:
    return 0.0 if prediction == label else 1.0


def cross_entropy_loss(score, label) -> float:
    """``-log score[label]`` with scores clipped below at 1e-12."""
    v = np.asarray(score, dtype=float)
    return float(-np.log(max(v[int(label) - 1], LOG_CLIP)))


def l1_label_loss(prediction, label) -> float:
    """L1 distance between one-hot encodings: 0 on agreement, 2 otherwise."""
    return 0.0 if prediction == label else 2.0


def scaled_l1_loss(logit_bound: float, n_classes: int) -> Callable:
    """``(2R + log K) * ||. - .||_1`` on one-hot labels, for logits in [-R, R]."""
    factor = 2.0 * logit_bound + np.log(n_classes)
    return lambda prediction, label: factor * l1_label_loss(prediction, label)


def loss_satisfies_triangle(loss: Callable, n_classes: int,
                            tol: float = 1e-12) -> bool:
    """Exhaustively check ``l(a, c) <= l(a, b) + l(b, c)`` on the label set."""
    labels = range(1, n_classes + 1)
    return all(
        loss(a, c) <= loss(a, b) + loss(b, c) + tol
        for a in labels for b in labels for c in labels
    )


def loss_pair_condition_holds(l1: Callable, l2: Callable, scores,
                              n_classes: int, tol: float = 1e-12) -> bool:
    """Check ``l1(u, y1) - l2(y2, y1) <= l1(u, y2)`` on given score vectors.

    This is the compatibility condition under which a bound on the target
    risk of classifiers transfers to scoring functions; it holds e.g. for
    the cross-entropy paired with ``scaled_l1_loss(R, K)`` when the softmax
    logits are bounded by ``R``.
    """
    labels = range(1, n_classes + 1)
    for u in np.atleast_2d(np.asarray(scores, dtype=float)):
        for y1 in labels:
            for y2 in labels:
                if l1(u, y1) - l2(y2, y1) > l1(u, y2) + tol:
                    return False
    return True


# ---------------------------------------------------------------------------
# Source-guided uncertainty on finite hypothesis sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteHypothesisRisks:
    """Per-hypothesis disagreement risk on T (w.r.t. g) and risk on S."""

    target: np.ndarray
    source: np.ndarray

    def __post_init__(self):
        if np.any(self.target < 0) or np.any(self.source < 0):
            raise ValueError("risks must be nonnegative")


def _target_disagreement(g_scores, hyp_target: np.ndarray, l1: Callable) -> np.ndarray:
    risks = np.empty(len(hyp_target))
    for h, labels in enumerate(hyp_target):
        risks[h] = np.mean([l1(g_scores[i], labels[i]) for i in range(len(labels))])
    return risks


def _source_risk(hyp_source: np.ndarray, source_labels: np.ndarray,
                 l2: Callable) -> np.ndarray:
    risks = np.empty(len(hyp_source))
    for h, labels in enumerate(hyp_source):
        risks[h] = np.mean([l2(labels[i], source_labels[i])
                            for i in range(len(labels))])
    return risks


def hypothesis_risks(g_scores, hyp_target, hyp_source, source_labels,
                     l1: Callable = zero_one_loss,
                     l2: Callable = zero_one_loss) -> FiniteHypothesisRisks:
    """The two risk vectors entering the source-guided uncertainty.

    ``g_scores[i]`` is the score (or predicted label, for classifier ``g``)
    at target point ``i``; ``hyp_target``/``hyp_source`` hold each
    hypothesis's labels on the two samples, row per hypothesis.
    """
    hyp_target = np.asarray(hyp_target)
    hyp_source = np.asarray(hyp_source)
    if len(hyp_target) != len(hyp_source):
        raise ValueError("each hypothesis needs labels on both samples")
    return FiniteHypothesisRisks(
        _target_disagreement(g_scores, hyp_target, l1),
        _source_risk(hyp_source, np.asarray(source_labels), l2),
    )


def source_guided_uncertainty(g_scores, hyp_target, hyp_source, source_labels,
                              l1: Callable = zero_one_loss,
                              l2: Callable = zero_one_loss):
    """``inf_h  R_T(g, h) + R_S(h)`` over a finite hypothesis list.

    Returns the exact minimum and the minimizing hypothesis index (ties go
    to the smallest index).
    """
    if len(np.asarray(hyp_target)) == 0:
        raise ValueError("the hypothesis list is empty")
    risks = hypothesis_risks(g_scores, hyp_target, hyp_source, source_labels, l1, l2)
    totals = risks.target + risks.source
    best = int(np.argmin(totals))
    return float(totals[best]), best


@dataclass(frozen=True)
class SguPropertiesReport:
    point1_ok: bool
    point2_ok: bool
    point3_ok: bool
    point2_values: tuple
    point3_values: tuple

    @property
    def ok(self) -> bool:
        return self.point1_ok and self.point2_ok and self.point3_ok


def verify_sgu_properties(hyp_target, hyp_source, source_labels, target_labels,
                          tilde_target, tilde_source, n_classes: int,
                          loss: Callable = zero_one_loss,
                          tol: float = 1e-12) -> SguPropertiesReport:
    """Exhaustively verify the three source-guided uncertainty properties.

    ``(hyp_target, hyp_source)`` is the finite class H, ``(tilde_target,
    tilde_source)`` a superset used as the scoring-function pool; the loss
    must satisfy the triangle inequality on the label set and vanish on the
    diagonal (checked before anything is asserted).

    Point 1: ``U_H(h) <= R_S(h)`` for every classifier h in H.
    Point 2: ``min over g in the superset of U_H(g)`` equals
    ``min_h R_S(h)``.
    Point 3: ``U_H(h) = R_S(h)`` at the best-source hypothesis and at the
    joint-risk minimizer (which needs the target labels).
    """
    if not loss_satisfies_triangle(loss, n_classes, tol):
        raise ValueError("the loss does not satisfy the triangle inequality")
    for a in range(1, n_classes + 1):
        if loss(a, a) != 0:
            raise ValueError("the loss must vanish on the diagonal")
    hyp_target = np.asarray(hyp_target)
    hyp_source = np.asarray(hyp_source)
    tilde_target = np.asarray(tilde_target)
    tilde_source = np.asarray(tilde_source)
    for ht, hs in zip(hyp_target, hyp_source):
        present = np.any(np.all(tilde_target == ht, axis=1)
                         & np.all(tilde_source == hs, axis=1))
        if not present:
            raise ValueError("the hypothesis class is not contained in its superset")

    source_labels = np.asarray(source_labels)
    target_labels = np.asarray(target_labels)
    risks_s = _source_risk(hyp_source, source_labels, loss)

    def uncertainty(g_labels):
        value, _ = source_guided_uncertainty(
            g_labels, hyp_target, hyp_source, source_labels, loss, loss)
        return value

    point1_ok = all(
        uncertainty(hyp_target[h]) <= risks_s[h] + tol
        for h in range(len(hyp_target))
    )

    inf_over_pool = min(uncertainty(g) for g in tilde_target)
    inf_source = float(risks_s.min())
    point2_ok = abs(inf_over_pool - inf_source) <= tol

    risks_t_true = _source_risk(hyp_target, target_labels, loss)
    h_s = int(np.argmin(risks_s))
    h_star = int(np.argmin(risks_t_true + risks_s))
    u_hs = uncertainty(hyp_target[h_s])
    u_hstar = uncertainty(hyp_target[h_star])
    point3_ok = (abs(u_hs - risks_s[h_s]) <= tol
                 and abs(u_hstar - risks_s[h_star]) <= tol)

    return SguPropertiesReport(
        point1_ok, point2_ok, point3_ok,
        (inf_over_pool, inf_source),
        ((u_hs, float(risks_s[h_s])), (u_hstar, float(risks_s[h_star]))),
    )
