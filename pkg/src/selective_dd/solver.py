"""Order-condition systems for n = 2 and n = 4 sequences.

The n = 4 conditions (sum, parity, S = 0, C1 + C2 = 0) leave a one-parameter
family in delta1; demanding C1 = C2 = 0 separately has no physical solution.
:func:`search_full_third_order` audits that along the family and
:func:`newton_search` does the same on the raw five-variable system.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.optimize

from .errors import BranchInfeasibleError, UnsupportedOrderError
from .magnus import second_order_coefficient, third_order_coefficients
from .sequences import (
    BRANCHES,
    FAMILY_N4_HIGH,
    FAMILY_N4_LOW,
    PulseSequence,
    family_n4,
    family_n4_raw,
    validate,
)

RESIDUAL_TOL = 1e-10
BISECTION_TOL = 1e-12


@dataclass(frozen=True)
class ConstraintResiduals:
    sum_defect: float
    parity_defect: float
    second_order: float
    third_cross: float
    third_c1: float
    third_c2: float

    def max_order_defect(self) -> float:
        """Largest |.| over the four conditions the n=4 family enforces."""
        return max(abs(self.sum_defect), abs(self.parity_defect), abs(self.second_order), abs(self.third_cross))


def residuals(seq) -> ConstraintResiduals:
    d = seq.deltas if isinstance(seq, PulseSequence) else tuple(float(x) for x in seq)
    if len(d) not in (3, 5):
        raise UnsupportedOrderError(f"constraint residuals need n in (2, 4), got n = {len(d) - 1}")
    c1, c2 = third_order_coefficients(d)
    return ConstraintResiduals(
        sum_defect=math.fsum(d) - 1.0,
        parity_defect=math.fsum(d[0::2]) - 0.5,
        second_order=second_order_coefficient(d),
        third_cross=c1 + c2,
        third_c1=c1,
        third_c2=c2,
    )


def solve_n2() -> PulseSequence:
    """Solve {sum = 1, parity, S = 0} for n = 2 by elimination.

    Parity fixes delta1 = 1/2; since delta1 != 0, S = delta1 (delta0 - delta2)
    vanishes only for delta0 = delta2, which with delta0 + delta2 = 1/2 is
    the unique point (1/4, 1/2, 1/4).
    """
    even_total = 0.5
    d1 = 1.0 - even_total
    assert d1 != 0.0
    d0 = d2 = even_total / 2
    seq = PulseSequence(2, (d0, d1, d2))
    assert validate(seq).passed
    return seq


@dataclass(frozen=True)
class FamilyRow:
    delta1: float
    branch: str
    sequence: PulseSequence
    residuals: ConstraintResiduals

    def csv_row(self) -> list[float | str]:
        r = self.residuals
        return [self.delta1, self.branch, *self.sequence.deltas, r.sum_defect, r.parity_defect,
                r.second_order, r.third_c1, r.third_c2, r.third_cross]


FAMILY_CSV_HEADER = ["delta1", "branch", "d0", "d1", "d2", "d3", "d4", "sum_defect", "parity_defect",
                     "S", "C1", "C2", "C1_plus_C2"]


@dataclass
class FamilySweep:
    rows: list[FamilyRow]
    infeasible: int
    points: int

    def min_delta_trend(self) -> list[tuple[float, float]]:
        """(delta1, smallest fraction) per row; it shrinks toward both endpoints."""
        return [(row.delta1, min(row.sequence.deltas)) for row in self.rows]


def interior_points(points: int, low: float = FAMILY_N4_LOW, high: float = FAMILY_N4_HIGH) -> np.ndarray:
    """``points`` equispaced values strictly inside (low, high)."""
    return np.linspace(low, high, points + 2)[1:-1]


def sweep_family_n4(points: int) -> FamilySweep:
    if points < 2:
        raise ValueError("points must be >= 2")
    rows, infeasible = [], 0
    for x in interior_points(points):
        for branch in BRANCHES:
            try:
                seq = family_n4(float(x), branch)
            except BranchInfeasibleError:
                infeasible += 1
                continue
            rows.append(FamilyRow(float(x), branch, seq, residuals(seq)))
    rows.sort(key=lambda r: (r.delta1, r.branch))
    return FamilySweep(rows, infeasible, points)


def _c1_on_branch(x: float, branch: str) -> float:
    return third_order_coefficients(family_n4_raw(x, branch))[0]


def _feasible(deltas) -> bool:
    return all(0.0 < d < 1.0 for d in deltas)


@dataclass
class ThirdOrderSearch:
    candidates: list[PulseSequence]
    scan: list[tuple[float, str, bool, float, float]]  # delta1, branch, feasible, C1, C2
    sign_changes: int
    min_abs_c1: float
    argmin_delta1: float
    argmin_branch: str
    refined_min_abs_c1: float
    refined_argmin_delta1: float
    grid: int
    refine_tol: float

    def summary(self) -> dict:
        return {
            "candidates": [s.to_json() for s in self.candidates],
            "sign_changes": self.sign_changes,
            "min_abs_C1": self.min_abs_c1,
            "argmin_delta1": self.argmin_delta1,
            "argmin_branch": self.argmin_branch,
            "refined_min_abs_C1": self.refined_min_abs_c1,
            "refined_argmin_delta1": self.refined_argmin_delta1,
            "grid": self.grid,
            "refine_tol": self.refine_tol,
        }


def _bisect(f, a: float, b: float, tol: float = BISECTION_TOL) -> float:
    fa = f(a)
    while b - a > tol:
        m = (a + b) / 2
        fm = f(m)
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return (a + b) / 2


def search_full_third_order(n: int = 4, grid: int = 1000, refine_tol: float = 1e-10) -> ThirdOrderSearch:
    """Look for family members that also satisfy C1 = C2 = 0.

    Scans C1 on ``grid`` interior points per branch and bisects every sign
    change. Since C1 + C2 = 0 holds on the whole family, C1 = 0 is
    equivalent to the full third-order condition.
    """
    if n != 4:
        raise UnsupportedOrderError("the full third-order search is defined for n = 4 only")
    if grid < 100:
        raise ValueError("grid must be >= 100")
    xs = interior_points(grid)
    scan = []
    candidates = []
    sign_changes = 0
    best = (math.inf, math.nan, "")
    for branch in BRANCHES:
        prev = None
        for x in xs:
            x = float(x)
            d = family_n4_raw(x, branch)
            c1, c2 = third_order_coefficients(d)
            ok = _feasible(d)
            scan.append((x, branch, ok, c1, c2))
            if ok and abs(c1) < best[0]:
                best = (abs(c1), x, branch)
            if prev is not None and ok and prev[1] and (prev[2] < 0) != (c1 < 0):
                sign_changes += 1
                root = _bisect(lambda t: _c1_on_branch(t, branch), prev[0], x)
                dr = family_n4_raw(root, branch)
                rc1, rc2 = third_order_coefficients(dr)
                if _feasible(dr) and abs(rc1) <= refine_tol and abs(rc2) <= refine_tol:
                    candidates.append(PulseSequence(4, dr))
            prev = (x, ok, c1)

    # continuous refinement of the smallest |C1| on the branch that attained it
    refined_min, refined_x = best[0], best[1]
    if best[2]:
        step = (FAMILY_N4_HIGH - FAMILY_N4_LOW) / (grid + 1)
        lo = max(FAMILY_N4_LOW + 1e-12, best[1] - step)
        hi = min(FAMILY_N4_HIGH - 1e-12, best[1] + step)
        res = scipy.optimize.minimize_scalar(
            lambda t: abs(_c1_on_branch(t, best[2])), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-12},
        )
        if res.fun < refined_min:
            refined_min, refined_x = float(res.fun), float(res.x)

    candidates.sort(key=lambda s: s.deltas[1])
    return ThirdOrderSearch(
        candidates=candidates,
        scan=scan,
        sign_changes=sign_changes,
        min_abs_c1=best[0],
        argmin_delta1=best[1],
        argmin_branch=best[2],
        refined_min_abs_c1=refined_min,
        refined_argmin_delta1=refined_x,
        grid=grid,
        refine_tol=refine_tol,
    )


def full_system(d) -> np.ndarray:
    """The five n=4 equations: sum, parity, S, C1, C2 (all zero at a solution)."""
    r = residuals(d)
    return np.array([r.sum_defect, r.parity_defect, r.second_order, r.third_c1, r.third_c2])


@dataclass
class NewtonSearch:
    starts: int
    converged: list[np.ndarray] = field(default_factory=list)
    physical: list[np.ndarray] = field(default_factory=list)
    best_residual: float = math.inf

    def summary(self) -> dict:
        return {
            "starts": self.starts,
            "converged_roots": [list(map(float, x)) for x in self.converged],
            "physical_solutions": [list(map(float, x)) for x in self.physical],
            "best_residual_norm": self.best_residual,
        }


def newton_search(starts: int = 200, seed: int = 0, tol: float = RESIDUAL_TOL) -> NewtonSearch:
    """Root search on the raw five-variable system from random simplex points.

    Uses MINPACK's hybrid Powell method (a trust-region Newton iteration).
    A start counts as converged when the residual norm drops below ``tol``;
    it is physical when every fraction also lies in (0, 1).
    """
    out = NewtonSearch(starts)
    for k in range(starts):
        rng = np.random.default_rng([int(seed), k])
        x0 = rng.dirichlet(np.ones(5))
        sol = scipy.optimize.root(full_system, x0, method="hybr", options={"xtol": 1e-14})
        norm = float(np.linalg.norm(full_system(sol.x)))
        out.best_residual = min(out.best_residual, norm)
        if norm <= tol:
            out.converged.append(sol.x)
            if _feasible(sol.x):
                out.physical.append(sol.x)
    return out


def residuals_dict(r: ConstraintResiduals) -> dict:
    return asdict(r)
