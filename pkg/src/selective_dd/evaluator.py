"""Exact propagation of a pulse sequence and effective-Hamiltonian metrics.

This is the ground truth for the Magnus layer: the propagator is built
from matrix exponentials, inverted through the principal logarithm, and
the resulting H_eff is compared with the target H_T block by block.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import BranchAmbiguityError, DomainError, ScalingFitError
from .sequences import segment_fractions
from .system import PulsePlan, coupling_decomposition, rotated_hamiltonian

NOISE_FLOOR = 1e-13
SAFE_PHASE = math.pi / 2


def exact_propagator(H, plan: PulsePlan, seq, T_f: float) -> np.ndarray:
    """U = e^{-iH tau_n} R ... R e^{-iH tau_1} R e^{-iH tau_0}.

    ``seq`` may also be a bare fraction list, e.g. ``[1.0]`` for free
    evolution with no pulses.
    """
    if not T_f > 0:
        raise DomainError(f"T_f must be positive, got {T_f}")
    H = linalg.check_hermitian(H)
    U = np.eye(H.shape[0], dtype=complex)
    for j, d in enumerate(segment_fractions(seq)):
        if j:
            U = plan.R @ U
        U = linalg.exp_hermitian_generator(H, d * T_f) @ U
    return U


def toggling_propagator(H, plan: PulsePlan, seq, T_f: float) -> np.ndarray:
    """Same propagator built from e^{-iH tau} (even) and e^{-iH_R tau} (odd) segments.

    Differs from :func:`exact_propagator` by an overall R^n = I.
    """
    if not T_f > 0:
        raise DomainError(f"T_f must be positive, got {T_f}")
    H = linalg.check_hermitian(H)
    HR = rotated_hamiltonian(H, plan)
    U = np.eye(H.shape[0], dtype=complex)
    for j, d in enumerate(segment_fractions(seq)):
        U = linalg.exp_hermitian_generator(HR if j % 2 else H, d * T_f) @ U
    return U


def max_safe_tf(H) -> float:
    """Largest T_f with T_f * ||H||_2 < pi/2."""
    norm = linalg.spectral_norm(H)
    return math.inf if norm == 0 else SAFE_PHASE / norm


def effective_hamiltonian(U, T_f: float, branch_margin: float = linalg.BRANCH_MARGIN) -> np.ndarray:
    """H_eff with U = exp(-i T_f H_eff) on the principal branch."""
    if not T_f > 0:
        raise DomainError(f"T_f must be positive, got {T_f}")
    try:
        G = linalg.principal_log_unitary(U, tol=1e-11, branch_margin=branch_margin)
    except BranchAmbiguityError as exc:
        raise BranchAmbiguityError(exc.max_phase, exc.margin, max_tf=T_f * (math.pi - branch_margin) / exc.max_phase) from None
    return G / T_f


@dataclass(eq=False)
class EvaluationReport:
    U: np.ndarray
    H_eff: np.ndarray
    unwanted_residual: float
    wanted_deviation: float
    T_f: float
    preserved_coupling_deviation: float | None = None

    def summary(self) -> dict:
        return {
            "T_f": self.T_f,
            "unwanted_residual": self.unwanted_residual,
            "wanted_deviation": self.wanted_deviation,
            "preserved_coupling_deviation": self.preserved_coupling_deviation,
        }


def residual_metrics(H_eff, H, plan: PulsePlan) -> dict:
    """Cross-block size of H_eff, block-diagonal error, and flip-block coupling drift.

    The last is the largest |(H_eff)_ab - H_ab| over off-diagonal pairs
    inside the flipped subspace (the e-f coupling for a qutrit), or None
    if that subspace is a single level.
    """
    H_T, _ = coupling_decomposition(H, plan)
    diag, cross = linalg.block_split(H_eff, plan.system.partition)
    flip = list(plan.system.flip_set)
    preserved = None
    if len(flip) > 1:
        sub = np.asarray(H_eff)[np.ix_(flip, flip)] - np.asarray(H)[np.ix_(flip, flip)]
        preserved = float(np.max(np.abs(sub[~np.eye(len(flip), dtype=bool)])))
    return {
        "unwanted_residual": linalg.frobenius_norm(cross),
        "wanted_deviation": linalg.frobenius_norm(diag - H_T),
        "preserved_coupling_deviation": preserved,
    }


def evaluate(H, plan: PulsePlan, seq, T_f: float) -> EvaluationReport:
    """Propagate, extract H_eff and measure residuals at one T_f."""
    H = linalg.check_hermitian(H)
    limit = max_safe_tf(H)
    if T_f >= limit:
        norm = linalg.spectral_norm(H)
        raise BranchAmbiguityError(
            T_f * norm, SAFE_PHASE, max_tf=limit,
            reason=f"tf * ||H||_2 = {T_f * norm:.6g} is not below pi/2, so the principal logarithm is not trusted",
        )
    U = exact_propagator(H, plan, seq, T_f)
    H_eff = effective_hamiltonian(U, T_f)
    return EvaluationReport(U=U, H_eff=H_eff, T_f=T_f, **residual_metrics(H_eff, H, plan))


@dataclass
class ScalingFit:
    grid: list[tuple[float, float, float]]  # (T_f, unwanted_residual, wanted_deviation)
    slope_unwanted: float
    slope_wanted: float
    noise_floor_points_excluded: int

    def summary(self) -> dict:
        return {
            "slope_unwanted": self.slope_unwanted,
            "slope_wanted": self.slope_wanted,
            "excluded": self.noise_floor_points_excluded,
        }


def _loglog_slope(ts, ys, floor) -> tuple[float, int]:
    keep = [(t, y) for t, y in zip(ts, ys) if y >= floor]
    if len(keep) < 3:
        raise ScalingFitError(
            f"only {len(keep)} points above the noise floor {floor:.1e}; widen the T_f range upward"
        )
    t, y = np.log(np.array(keep)).T
    return float(np.polyfit(t, y, 1)[0]), len(ts) - len(keep)


def scaling_study(H, plan: PulsePlan, seq, T_f_min: float, T_f_max: float, points: int = 9) -> ScalingFit:
    """Log-log slopes of the residuals over a log-spaced T_f grid.

    Points whose residual is below ``NOISE_FLOOR * ||H||_F`` are left out
    of the fit; ``noise_floor_points_excluded`` counts the larger of the two
    exclusions.
    """
    if not 0 < T_f_min < T_f_max:
        raise DomainError("need 0 < T_f_min < T_f_max")
    if points < 5:
        raise DomainError("points must be >= 5")
    ts = np.geomspace(T_f_min, T_f_max, points)
    grid = []
    for t in ts:
        rep = evaluate(H, plan, seq, float(t))
        grid.append((float(t), rep.unwanted_residual, rep.wanted_deviation))
    floor = NOISE_FLOOR * linalg.frobenius_norm(H)
    su, ex_u = _loglog_slope(ts, [g[1] for g in grid], floor)
    sw, ex_w = _loglog_slope(ts, [g[2] for g in grid], floor)
    return ScalingFit(grid, su, sw, max(ex_u, ex_w))
