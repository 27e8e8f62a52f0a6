"""Generic linear-program layer used by every transport and dual solve.

Problems are stated as ``minimize c @ x`` under row constraints with
relations in ``{<=, =, >=}`` and per-variable bounds (default ``x >= 0``).
Solving is delegated to HiGHS through :func:`scipy.optimize.linprog`; every
optimal solution is re-certified here (primal feasibility and duality gap)
so a numerically broken solve raises instead of returning a silently wrong
answer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

__all__ = [
    "LinearProgram",
    "LpSolution",
    "LpError",
    "solve",
    "dual_of",
    "dump_lp",
]

RELATIONS = ("<=", "=", ">=")

#: Primal feasibility residual allowed on an optimal solution,
#: relative to ``1 + ||b||_inf``.
FEASIBILITY_TOL = 1e-8

#: Relative duality-gap tolerance certifying optimality.
OPTIMALITY_TOL = 1e-9


class LpError(RuntimeError):
    """Numerical breakdown or solver failure, with diagnostics attached."""


def _as_matrix(A, n_rows, n_cols):
    if sp.issparse(A):
        A = A.tocsr()
    else:
        A = np.asarray(A, dtype=float)
        if A.ndim != 2:
            raise ValueError("constraint matrix must be 2-d")
    if A.shape != (n_rows, n_cols):
        raise ValueError(f"constraint matrix is {A.shape}, expected {(n_rows, n_cols)}")
    return A


@dataclass(frozen=True)
class LinearProgram:
    """``minimize c @ x  s.t.  A x (<=|=|>=) b,  lower <= x <= upper``.

    ``A`` may be dense or ``scipy.sparse``; the transport problems built by
    :mod:`imdot.ot` use sparse matrices since their constraint matrices are
    two-nonzeros-per-column incidence structures.
    """

    c: np.ndarray
    A: object
    relations: tuple
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __init__(self, c, A, relations: Sequence[str], b, lower=None, upper=None):
        c = np.asarray(c, dtype=float)
        b = np.asarray(b, dtype=float)
        if c.ndim != 1 or b.ndim != 1:
            raise ValueError("c and b must be vectors")
        A = _as_matrix(A, len(b), len(c))
        relations = tuple(relations)
        if len(relations) != len(b):
            raise ValueError("one relation per constraint row is required")
        for rel in relations:
            if rel not in RELATIONS:
                raise ValueError(f"unknown relation {rel!r}")
        lower = np.zeros(len(c)) if lower is None else np.asarray(lower, dtype=float)
        upper = np.full(len(c), np.inf) if upper is None else np.asarray(upper, dtype=float)
        if lower.shape != c.shape or upper.shape != c.shape:
            raise ValueError("bounds must match the variable count")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "relations", relations)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n_vars(self) -> int:
        return len(self.c)

    @property
    def n_rows(self) -> int:
        return len(self.b)

    def row(self, i: int) -> np.ndarray:
        if sp.issparse(self.A):
            return np.asarray(self.A.getrow(i).todense()).ravel()
        return self.A[i]


@dataclass(frozen=True)
class LpSolution:
    status: str                # "optimal" | "infeasible" | "unbounded"
    value: float
    x: np.ndarray
    iterations: int


def _split_rows(lp: LinearProgram):
    rel = np.asarray(lp.relations)
    le = np.flatnonzero(rel == "<=")
    ge = np.flatnonzero(rel == ">=")
    eq = np.flatnonzero(rel == "=")
    stack = sp.vstack if sp.issparse(lp.A) else np.vstack

    A_ub = b_ub = None
    if len(le) or len(ge):
        parts, rhs = [], []
        if len(le):
            parts.append(lp.A[le])
            rhs.append(lp.b[le])
        if len(ge):
            parts.append(-lp.A[ge])
            rhs.append(-lp.b[ge])
        A_ub = stack(parts) if len(parts) > 1 else parts[0]
        b_ub = np.concatenate(rhs)
    A_eq = lp.A[eq] if len(eq) else None
    b_eq = lp.b[eq] if len(eq) else None
    return A_ub, b_ub, A_eq, b_eq


def _certify(lp, res, A_ub, b_ub, A_eq, b_eq):
    """Feasibility and duality-gap check of a claimed-optimal solution."""
    x = res.x
    scale = 1.0 + (np.max(np.abs(lp.b)) if len(lp.b) else 0.0)
    residual = 0.0
    if A_eq is not None:
        residual = max(residual, float(np.max(np.abs(A_eq @ x - b_eq))))
    if A_ub is not None:
        residual = max(residual, float(np.max(np.maximum(A_ub @ x - b_ub, 0.0))))
    residual = max(residual, float(np.max(np.maximum(lp.lower - x, 0.0), initial=0.0)))
    residual = max(residual, float(np.max(np.maximum(x - lp.upper, 0.0), initial=0.0)))
    if residual > FEASIBILITY_TOL * scale:
        raise LpError(
            f"optimal solution violates feasibility: residual {residual:.3e} "
            f"exceeds {FEASIBILITY_TOL:.0e} * {scale:.3e}\n" + dump_lp(lp)
        )

    # Duality gap from the HiGHS marginals; a clean gap certifies optimality.
    dual = 0.0
    if b_eq is not None:
        dual += float(b_eq @ res.eqlin.marginals)
    if b_ub is not None:
        dual += float(b_ub @ res.ineqlin.marginals)
    finite_lo = np.isfinite(lp.lower)
    if np.any(finite_lo):
        dual += float(lp.lower[finite_lo] @ res.lower.marginals[finite_lo])
    finite_up = np.isfinite(lp.upper)
    if np.any(finite_up):
        dual += float(lp.upper[finite_up] @ res.upper.marginals[finite_up])
    gap = abs(res.fun - dual)
    if gap > 1e-7 * (1.0 + abs(res.fun)):
        raise LpError(
            f"duality gap {gap:.3e} too large for an optimality certificate\n"
            + dump_lp(lp)
        )
    return residual, gap


def solve(lp: LinearProgram) -> LpSolution:
    """Solve ``lp`` to proven optimality, or report infeasible/unbounded.

    Raises
    ------
    LpError
        On solver breakdown or when the returned solution fails the
        feasibility / duality-gap certificate.
    """
    A_ub, b_ub, A_eq, b_eq = _split_rows(lp)
    bounds = np.column_stack([lp.lower, lp.upper])
    res = linprog(
        lp.c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
        options={
            "primal_feasibility_tolerance": 1e-9,
            "dual_feasibility_tolerance": 1e-9,
        },
    )
    if res.status == 2:
        return LpSolution("infeasible", float("nan"), np.empty(0), int(res.nit))
    if res.status == 3:
        return LpSolution("unbounded", float("nan"), np.empty(0), int(res.nit))
    if res.status != 0:
        raise LpError(f"solver failed (status {res.status}): {res.message}\n" + dump_lp(lp))
    _certify(lp, res, A_ub, b_ub, A_eq, b_eq)
    value = float(res.fun)
    check = float(lp.c @ res.x)
    if abs(value - check) > 1e-9 * (1.0 + abs(check)):
        raise LpError(
            f"objective mismatch: reported {value!r} vs recomputed {check!r}"
        )
    return LpSolution("optimal", value, np.asarray(res.x), int(res.nit))


def dual_of(lp: LinearProgram) -> LinearProgram:
    """Explicit dual of an LP whose variables are all bounded by ``x >= 0``.

    The dual is returned in minimization form, so strong duality reads
    ``solve(lp).value == -solve(dual_of(lp)).value``.
    """
    if np.any(lp.lower != 0) or np.any(np.isfinite(lp.upper)):
        raise ValueError("dual_of only supports x >= 0 variable bounds")
    rel = np.asarray(lp.relations)
    eq = np.flatnonzero(rel == "=")
    le = np.flatnonzero(rel == "<=")
    ge = np.flatnonzero(rel == ">=")

    dense = lp.A.toarray() if sp.issparse(lp.A) else np.asarray(lp.A)
    A_eq = dense[eq]
    A_le = np.vstack([dense[le], -dense[ge]]) if (len(le) or len(ge)) else np.empty((0, lp.n_vars))
    b_le = np.concatenate([lp.b[le], -lp.b[ge]]) if (len(le) or len(ge)) else np.empty(0)

    # Primal: min c.x, A_eq x = b_eq, A_le x <= b_le, x >= 0.
    # Dual:   max b_eq.y + b_le.z, A_eq'y + A_le'z <= c, z <= 0, y free.
    # With w = -z >= 0 and in min form:
    #   min -b_eq.y + b_le.w  s.t.  A_eq'y - A_le'w <= c,  y free, w >= 0.
    n_eq, n_le = len(eq), len(b_le)
    c_dual = np.concatenate([-lp.b[eq], b_le])
    A_dual = np.hstack([A_eq.T, -A_le.T])
    rel_dual = ["<="] * lp.n_vars
    lower = np.concatenate([np.full(n_eq, -np.inf), np.zeros(n_le)])
    return LinearProgram(c_dual, A_dual, rel_dual, lp.c, lower=lower)


def dump_lp(lp: LinearProgram, max_rows: int = 200, max_vars: int = 1000) -> str:
    """Plain-text fixed-format dump for reproducing solver issues."""
    lines = [f"LP n_vars={lp.n_vars} n_rows={lp.n_rows} minimize"]
    if lp.n_rows > max_rows or lp.n_vars > max_vars:
        lines.append(
            f"(too large to dump: |c|_inf={np.max(np.abs(lp.c), initial=0.0)!r} "
            f"|b|_inf={np.max(np.abs(lp.b), initial=0.0)!r})"
        )
        return "\n".join(lines)
    lines.append("c " + " ".join(repr(float(v)) for v in lp.c))
    for i in range(lp.n_rows):
        coeffs = " ".join(repr(float(v)) for v in lp.row(i))
        lines.append(f"row {i} {lp.relations[i]} {lp.b[i]!r} : {coeffs}")
    for j in range(lp.n_vars):
        lines.append(f"bound {j} {lp.lower[j]!r} {lp.upper[j]!r}")
    return "\n".join(lines)
