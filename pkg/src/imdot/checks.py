"""Self-contained property suites behind ``imdot check``.

Each suite re-derives its expected values independently (enumeration,
closed forms, paired LP formulations) on internally generated random
instances, so a fresh clone can audit the solvers without the test harness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import imd as imd_mod
from . import ot as ot_mod
from . import uncertainty as unc
from .datagen import shared_atom_label_shift
from .families import (
    grid_family,
    ground_union,
    hdh_family,
    indicator_family,
    localization_inclusion_check,
    no_localization,
    global_localization,
)
from .measures import DiscreteMeasure, cost_matrix, mix

__all__ = ["CheckResult", "run_suite", "SUITES"]


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return {"suite": self.suite, "name": self.name,
                "passed": self.passed, "detail": self.detail}


def _random_points(rng, n, dim=2):
    return rng.uniform(-1.5, 1.5, size=(n, dim))


def _random_weights(rng, n, normalize=False):
    # dyadic weights keep the enumeration sums exact in binary floating point
    w = rng.integers(1, 1 << 16, size=n).astype(float) / (1 << 16)
    if normalize:
        w = w / w.sum()
    return w


def _random_measure_pair(rng, n):
    pts = _random_points(rng, n)
    return (DiscreteMeasure(pts, _random_weights(rng, n)),
            DiscreteMeasure(pts, _random_weights(rng, n)))


def _suite_imd(seed: int):
    rng = np.random.default_rng(seed)
    results = []

    fails = 0
    for _ in range(60):
        n = int(rng.integers(2, 8))
        pts = _random_points(rng, n)
        fam = indicator_family(pts)
        ms = [DiscreteMeasure(pts, _random_weights(rng, n)) for _ in range(3)]
        vals = {(i, j): imd_mod.imd_bruteforce(ms[i], ms[j], fam).value
                for i in range(3) for j in range(3) if i != j}
        if any(v < 0 for v in vals.values()):
            fails += 1
        if vals[(0, 2)] > vals[(0, 1)] + vals[(1, 2)]:
            fails += 1
    results.append(("imd_nonneg_triangle_indicators", fails == 0,
                    f"{fails} failures over 60 random triples"))

    fails = 0
    for _ in range(20):
        n = int(rng.integers(2, 5))
        pts = _random_points(rng, n)
        fam = grid_family(pts)
        ms = [DiscreteMeasure(pts, _random_weights(rng, n)) for _ in range(3)]
        v02 = imd_mod.imd_bruteforce(ms[0], ms[2], fam).value
        v01 = imd_mod.imd_bruteforce(ms[0], ms[1], fam).value
        v12 = imd_mod.imd_bruteforce(ms[1], ms[2], fam).value
        if v02 > v01 + v12 or min(v01, v12, v02) < 0:
            fails += 1
    results.append(("imd_nonneg_triangle_grid", fails == 0,
                    f"{fails} failures over 20 random triples"))

    q = DiscreteMeasure([[0.0, 0.0], [1.0, 0.0]], [0.25, 0.5])
    fam = indicator_family(q.points)
    asym_zero = imd_mod.imd_bruteforce(q, q.scaled(2.0), fam).value
    asym_pos = imd_mod.imd_bruteforce(q.scaled(2.0), q, fam).value
    results.append(("imd_asymmetry_witness",
                    asym_zero == 0.0 and asym_pos > 0,
                    f"IMD(Q,2Q)={asym_zero!r} IMD(2Q,Q)={asym_pos!r}"))

    fails = 0
    for _ in range(60):
        n = int(rng.integers(2, 8))
        q1, q2 = _random_measure_pair(rng, n)
        if rng.random() < 0.4:  # force dominated pairs into the mix
            q2 = DiscreteMeasure(q1.points, q1.weights + _random_weights(rng, n))
        fam = indicator_family(q1.points)
        value = imd_mod.imd_bruteforce(q1, q2, fam).value
        dominated = bool(np.all(q1.weights <= q2.weights))
        if dominated != (value == 0.0):
            fails += 1
    results.append(("imd_null_characterization", fails == 0,
                    f"{fails} failures over 60 random pairs"))

    fails = 0
    for _ in range(40):
        n = int(rng.integers(2, 9))
        q1, q2 = _random_measure_pair(rng, n)
        closed = imd_mod.imd_tv_closed_form(q1, q2)
        brute = imd_mod.imd_bruteforce(q1, q2, indicator_family(q1.points)).value
        if closed != brute:
            fails += 1
    results.append(("imd_tv_matches_bruteforce", fails == 0,
                    f"{fails} mismatches over 40 instances"))

    fails = 0
    for _ in range(40):
        pts = _random_points(rng, 8)
        t = DiscreteMeasure(pts, _random_weights(rng, 8))
        mask = rng.random(8) < 0.6
        s_w = np.where(mask, _random_weights(rng, 8), 0.0)
        s = DiscreteMeasure(pts, s_w)
        direct = imd_mod.imd_f0_support_mass(t, s)
        fam = indicator_family(pts)
        brute = imd_mod.imd_bruteforce(t, s, fam, global_localization(0.0, s)).value
        if abs(direct - brute) > 1e-12:
            fails += 1
    results.append(("imd_f0_support_mass", fails == 0,
                    f"{fails} mismatches over 40 instances"))

    worst = 0.0
    bad_ineq = 0
    alpha_grid = np.linspace(0.0, 5.0, 26)
    for _ in range(25):
        n = int(rng.integers(2, 5))
        pts = _random_points(rng, n)
        t = DiscreteMeasure(pts, _random_weights(rng, n, normalize=True))
        s = DiscreteMeasure(pts, _random_weights(rng, n, normalize=True))
        report = imd_mod.duality_check(t, s, grid_family(pts), 0.1, alpha_grid)
        if not report.inequality_holds:
            bad_ineq += 1
        worst = max(worst, abs(report.hull_gap))
    results.append(("imd_duality_convex_gap", bad_ineq == 0 and worst <= 1e-3,
                    f"max hull gap {worst:.2e}, {bad_ineq} inequality failures"))

    fails = 0
    for _ in range(30):
        n = int(rng.integers(3, 7))
        pts = _random_points(rng, n)
        hyp = rng.integers(1, 3, size=(int(rng.integers(2, 6)), n))
        fam = hdh_family(pts, hyp)
        t = DiscreteMeasure(pts, _random_weights(rng, n, normalize=True))
        s = DiscreteMeasure(pts, _random_weights(rng, n, normalize=True))
        beta = float(rng.uniform(0, 1))
        res = imd_mod.hdh_imd(t, s, fam, beta=beta)
        brute = imd_mod.imd_bruteforce(t, s.scaled(1 + beta), fam).value
        if abs(res.value - brute) > 1e-12:
            fails += 1
        if not imd_mod.hdh_support_bound_check(t, s, fam).holds:
            fails += 1
    results.append(("hdh_imd_and_support_bound", fails == 0,
                    f"{fails} failures over 30 instances"))

    fails = 0
    for _ in range(25):
        n = int(rng.integers(3, 7))
        k = int(rng.integers(2, 4))
        pts = _random_points(rng, n)
        labels = rng.integers(0, k, size=n)
        conds = []
        p = np.zeros(k)
        counts = np.bincount(labels, minlength=k)
        for c in range(k):
            idx = np.flatnonzero(labels == c)
            p[c] = counts[c] / n
            if len(idx):
                conds.append(DiscreteMeasure(pts[idx], np.full(len(idx), 1.0 / len(idx))))
            else:
                conds.append(DiscreteMeasure(np.empty((0, 2)), np.empty(0)))
        eps_vec = rng.uniform(0, 0.5, size=k)
        rep = localization_inclusion_check(indicator_family(pts), conds, p, eps_vec)
        if not rep.ok:
            fails += 1
    results.append(("localization_inclusions", fails == 0,
                    f"{fails} failures over 25 instances"))
    return results


def _random_transport_instance(rng, max_atoms=8, n_classes=None):
    k = n_classes or int(rng.integers(2, 4))
    pts_per_class = [
        _random_points(rng, int(rng.integers(1, max(2, max_atoms // k + 1))))
        for _ in range(k)
    ]
    p = _random_weights(rng, k, normalize=True)
    conds = [DiscreteMeasure(a, np.full(len(a), 1.0 / len(a))) for a in pts_per_class]
    source = mix(DiscreteMeasure(np.empty((0, 2)), np.empty(0)), conds, p)
    n_t = int(rng.integers(2, max_atoms))
    target = DiscreteMeasure(_random_points(rng, n_t),
                             _random_weights(rng, n_t, normalize=True))
    costs = [cost_matrix(target.points, c.points) for c in conds]
    return target, source, conds, p, costs


def _suite_ot(seed: int):
    rng = np.random.default_rng(seed)
    results = []

    worst = 0.0
    for _ in range(30):
        target, source, conds, p, costs = _random_transport_instance(rng)
        beta_vec = rng.uniform(0, 0.8, size=len(p))
        plan_set = ot_mod.partial_ot_per_class(target, conds, p, beta_vec, costs)
        relaxed = mix(source, conds, beta_vec)
        dual_value, _ = ot_mod.lipschitz_imd_dual(target, relaxed)
        worst = max(worst, abs(plan_set.objective - dual_value))
    results.append(("ot_primal_dual_agreement", worst <= 1e-6,
                    f"max |primal - dual| = {worst:.2e} over 30 instances"))

    worst = 0.0
    for _ in range(15):
        target, source, conds, p, costs = _random_transport_instance(rng)
        cost_full = cost_matrix(target.points, source.points)
        w1, _ = ot_mod.wasserstein1(target, source, cost_full)
        zero = np.zeros(len(p))
        v_pc = ot_mod.partial_ot_per_class(target, conds, p, zero, costs).objective
        v_gl, _ = ot_mod.partial_ot_global(target, source, cost_full, 0.0)
        worst = max(worst, abs(w1 - v_pc), abs(w1 - v_gl))
    results.append(("ot_beta_zero_degeneracy", worst <= 1e-8,
                    f"max deviation from Wasserstein-1 = {worst:.2e}"))

    bad = 0
    for _ in range(15):
        target, source, conds, p, costs = _random_transport_instance(rng)
        cost_full = cost_matrix(target.points, source.points)
        betas = np.sort(rng.uniform(0, 2, size=3))
        vals = [ot_mod.partial_ot_global(target, source, cost_full, b)[0]
                for b in betas]
        if not all(vals[i] >= vals[i + 1] - 1e-8 for i in range(2)):
            bad += 1
        v_prop = ot_mod.partial_ot_per_class(
            target, conds, p, betas[1] * p, costs).objective
        v_glob = ot_mod.partial_ot_global(target, source, cost_full, betas[1])[0]
        if abs(v_prop - v_glob) > 1e-8:
            bad += 1
        v_split = ot_mod.partial_ot_beta_split(
            target, conds, p, betas[1], costs).objective
        if v_split > v_prop + 1e-8:
            bad += 1
    results.append(("ot_monotonicity_and_split_dominance", bad == 0,
                    f"{bad} failures over 15 instances"))

    source, conds, target = shared_atom_label_shift(
        [[[0.0, 0.0]], [[1.0, 0.0]]], [0.8, 0.2], [0.5, 0.5])
    costs = [cost_matrix(target.points, c.points) for c in conds]
    at = ot_mod.partial_ot_per_class(target, conds, [0.8, 0.2],
                                     [0.0, 0.3], costs).objective
    below = ot_mod.partial_ot_per_class(target, conds, [0.8, 0.2],
                                        [0.0, 0.29], costs).objective
    cost_full = cost_matrix(target.points, source.points)
    g_at, _ = ot_mod.partial_ot_global(target, source, cost_full, 1.5)
    g_below, _ = ot_mod.partial_ot_global(target, source, cost_full, 1.49)
    ok = (abs(at) <= 1e-8 and below > 1e-6
          and abs(g_at) <= 1e-8 and g_below > 1e-6)
    results.append(("ot_label_shift_thresholds", ok,
                    f"per-class ({at:.2e}, {below:.2e}); global ({g_at:.2e}, {g_below:.2e})"))

    worst = 0.0
    for _ in range(25):
        n_t, n_s = int(rng.integers(2, 7)), int(rng.integers(2, 7))
        target = DiscreteMeasure(_random_points(rng, n_t),
                                 _random_weights(rng, n_t, normalize=True))
        source = DiscreteMeasure(_random_points(rng, n_s),
                                 _random_weights(rng, n_s, normalize=True))
        direct = ot_mod.support_distance_imd(target, source)
        lp_value, _ = ot_mod.lipschitz_imd_dual(target, source, zero_on_support=True)
        worst = max(worst, abs(direct - lp_value))
    results.append(("ot_support_distance_identity", worst <= 1e-6,
                    f"max deviation {worst:.2e} over 25 instances"))
    return results


def _suite_uncertainty(seed: int):
    rng = np.random.default_rng(seed)
    results = []

    bad = 0
    for _ in range(2000):
        k = int(rng.integers(2, 6))
        v = rng.dirichlet(np.ones(k))
        h_inf = unc.min_entropy_uncertainty(v)
        for alpha in (1.0, 1.5, 2.0, 4.0, np.inf):
            if h_inf > unc.renyi_entropy(v, alpha) + 1e-12:
                bad += 1
    results.append(("entropy_ordering", bad == 0,
                    f"{bad} violations over 2000 simplex vectors"))

    spot = (unc.hinge_uncertainty(1.5) == 0.0
            and unc.hinge_uncertainty(0.0) == 1.0
            and abs(unc.hinge_uncertainty(0.4) - 0.6) <= 1e-15)
    results.append(("hinge_uncertainty_values", spot, "spot formulas"))

    fails = 0
    for _ in range(25):
        n_t, n_s = int(rng.integers(3, 8)), int(rng.integers(3, 8))
        k = int(rng.integers(2, 4))
        m = int(rng.integers(2, 6))
        m_tilde = m + int(rng.integers(0, 4))
        tilde_t = rng.integers(1, k + 1, size=(m_tilde, n_t))
        tilde_s = rng.integers(1, k + 1, size=(m_tilde, n_s))
        report = unc.verify_sgu_properties(
            tilde_t[:m], tilde_s[:m],
            rng.integers(1, k + 1, size=n_s),
            rng.integers(1, k + 1, size=n_t),
            tilde_t, tilde_s, k)
        if not report.ok:
            fails += 1
    results.append(("sgu_properties", fails == 0,
                    f"{fails} failures over 25 random instances"))

    fails = 0
    for _ in range(20):
        n_t, n_s = 5, 5
        k = 3
        m = int(rng.integers(2, 5))
        hyp_t = rng.integers(1, k + 1, size=(m + 2, n_t))
        hyp_s = rng.integers(1, k + 1, size=(m + 2, n_s))
        y_s = rng.integers(1, k + 1, size=n_s)
        g = rng.integers(1, k + 1, size=n_t)
        small, _ = unc.source_guided_uncertainty(g, hyp_t[:m], hyp_s[:m], y_s)
        large, _ = unc.source_guided_uncertainty(g, hyp_t, hyp_s, y_s)
        if large > small + 1e-12:
            fails += 1
    results.append(("sgu_monotone_in_hypotheses", fails == 0,
                    f"{fails} failures over 20 instances"))
    return results


SUITES = {
    "imd": _suite_imd,
    "ot": _suite_ot,
    "uncertainty": _suite_uncertainty,
}


def run_suite(name: str, seed: int = 20240) -> list:
    """Run one named suite (or all) and return CheckResult entries."""
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise ValueError(f"unknown suite {name!r}; choose from "
                         f"{', '.join(SUITES)} or 'all'")
    out = []
    for suite_name in names:
        for check_name, passed, detail in SUITES[suite_name](seed):
            out.append(CheckResult(suite_name, check_name, bool(passed), detail))
    return out
