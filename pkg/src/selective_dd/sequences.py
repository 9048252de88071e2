"""Pulse-fraction sequences.

A sequence of ``n`` instantaneous pulses splits the total time T_f into
``n + 1`` free intervals of length ``delta_i * T_f``. Interval 0 precedes
the first pulse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import BranchInfeasibleError, DomainError, SequenceError

SUM_TOL = 1e-12

FAMILY_N4_LOW = 0.5 - 1 / (2 * math.sqrt(2))
FAMILY_N4_HIGH = 1 / (2 * math.sqrt(2))
BRANCHES = ("lower", "upper")


@dataclass(frozen=True)
class PulseSequence:
    n: int
    deltas: tuple[float, ...]

    def __post_init__(self):
        n = self.n
        if isinstance(n, bool) or int(n) != n or n < 2 or n % 2:
            raise SequenceError(f"n must be even and >= 2, got {n}")
        deltas = tuple(float(d) for d in self.deltas)
        if len(deltas) != n + 1:
            raise SequenceError(f"{n} pulses need {n + 1} fractions, got {len(deltas)}")
        for i, d in enumerate(deltas):
            if not (0.0 < d < 1.0):
                raise SequenceError(f"delta{i} = {d!r} is not in (0, 1)")
        defect = math.fsum(deltas) - 1.0
        if abs(defect) > SUM_TOL:
            raise SequenceError(f"fractions sum to 1 + {defect:.3e}")
        if defect:
            total = math.fsum(deltas)
            deltas = tuple(d / total for d in deltas)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "deltas", deltas)

    @classmethod
    def from_deltas(cls, deltas: Iterable[float]) -> "PulseSequence":
        deltas = tuple(deltas)
        return cls(len(deltas) - 1, deltas)

    def __len__(self):
        return len(self.deltas)

    def __getitem__(self, i):
        return self.deltas[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.deltas)

    def to_json(self) -> dict:
        return {"n": self.n, "deltas": list(self.deltas)}

    @classmethod
    def from_json(cls, data: dict) -> "PulseSequence":
        try:
            n, deltas = data["n"], data["deltas"]
        except (KeyError, TypeError) as exc:
            raise SequenceError(f"sequence JSON needs 'n' and 'deltas': {exc}") from None
        return cls(n, tuple(deltas))


@dataclass(frozen=True)
class SequenceValidation:
    sum_residual: float
    even_residual: float
    odd_residual: float
    parity_checked: bool
    passed: bool


def validate(seq, require_parity: bool = True, tol: float = SUM_TOL) -> SequenceValidation:
    """Residuals of the sum-to-one and parity (half/half) conditions.

    ``seq`` may be a :class:`PulseSequence` or any sequence of fractions.
    """
    deltas = seq.deltas if isinstance(seq, PulseSequence) else tuple(float(d) for d in seq)
    sum_res = abs(math.fsum(deltas) - 1.0)
    even_res = abs(math.fsum(deltas[0::2]) - 0.5)
    odd_res = abs(math.fsum(deltas[1::2]) - 0.5)
    passed = sum_res <= tol
    if require_parity:
        passed = passed and even_res <= tol and odd_res <= tol
    return SequenceValidation(sum_res, even_res, odd_res, require_parity, passed)


def uhrig(n: int) -> PulseSequence:
    """Uhrig fractions sin^2((i+1)pi/(2n+2)) - sin^2(i pi/(2n+2))."""
    if isinstance(n, bool) or int(n) != n or n < 2 or n % 2:
        raise SequenceError(f"n must be even and >= 2, got {n}")
    n = int(n)
    # sin^2 b - sin^2 a = sin(b - a) sin(b + a) avoids cancellation
    theta = math.pi / (2 * n + 2)
    deltas = math.sin(theta) * np.sin((2 * np.arange(n + 1) + 1) * theta)
    # exact palindrome; the middle fraction closes the sum
    deltas = (deltas + deltas[::-1]) / 2
    mid = n // 2
    deltas[mid] = 1.0 - math.fsum(np.delete(deltas, mid))
    return PulseSequence(n, tuple(float(d) for d in deltas))


def exact_n2() -> PulseSequence:
    """The unique n=2 sequence cancelling the second-order coupling."""
    return PulseSequence(2, (0.25, 0.5, 0.25))


def family_r(delta1: float) -> float:
    return math.sqrt(16 * delta1**4 - 16 * delta1**3 + 2 * delta1)


def _branch_sign(branch: str) -> int:
    if branch not in BRANCHES:
        raise DomainError(f"branch must be one of {BRANCHES}, got {branch!r}")
    return 1 if branch == "upper" else -1


def family_n4_raw(delta1: float, branch: str) -> tuple[float, ...]:
    """Closed-form n=4 fractions without any feasibility checks.

    ``branch`` picks the sign in delta0 = 1/2 +- r/(8 delta1) - delta1/2;
    delta2 takes the opposite sign in its denominator and delta4 closes the
    sum to one.
    """
    s = _branch_sign(branch)
    r = family_r(delta1)
    d0 = 0.5 + s * r / (8 * delta1) - delta1 / 2
    d2 = 1 / (8 * (1 - 2 * delta1) * delta1 - s * 4 * r)
    d3 = 0.5 - delta1
    d4 = 1.0 - math.fsum((d0, delta1, d2, d3))
    return d0, delta1, d2, d3, d4


def family_n4_delta4_closed_form(delta1: float, sign: int) -> float:
    """(r -+ (1 - 4 delta1^2)) / (4 - 8 delta1), for ``sign`` = +1 (upper) or -1.

    Diagnostic only; :func:`family_n4` closes the sum instead.
    """
    r = family_r(delta1)
    return (r - sign * (1 - 4 * delta1**2)) / (4 - 8 * delta1)


def family_n4(delta1: float, branch: str = "lower") -> PulseSequence:
    """One member of the n=4 family with vanishing second-order and
    third-order cross-block terms.

    Only the ``lower`` branch is positive on the feasibility interval; the
    ``upper`` branch is kept so callers can inspect why it fails.
    """
    if not (FAMILY_N4_LOW < delta1 < FAMILY_N4_HIGH):
        raise DomainError(f"delta1 outside ({FAMILY_N4_LOW:.6f}, {FAMILY_N4_HIGH:.6f})")
    deltas = family_n4_raw(delta1, branch)
    for i, d in enumerate(deltas):
        if not (0.0 < d < 1.0):
            raise BranchInfeasibleError(branch, i, d)
    return PulseSequence(4, deltas)


def family_n4_feasible(delta1: float) -> dict[str, PulseSequence]:
    """All branches that give a physical sequence at ``delta1``."""
    found = {}
    for branch in BRANCHES:
        try:
            found[branch] = family_n4(delta1, branch)
        except BranchInfeasibleError:
            continue
    return found


def pulse_times(seq: PulseSequence, T_f: float) -> list[float]:
    """Absolute times t_1..t_n of the pulses; 0 and T_f are implied."""
    if not T_f > 0:
        raise DomainError(f"T_f must be positive, got {T_f}")
    return [T_f * math.fsum(seq.deltas[:i]) for i in range(1, seq.n + 1)]


def segment_fractions(seq) -> tuple[float, ...]:
    """Fractions of a PulseSequence or of a bare list (e.g. ``[1.0]`` for free evolution)."""
    if isinstance(seq, PulseSequence):
        return seq.deltas
    deltas = tuple(float(d) for d in seq)
    if not deltas or any(d < 0 for d in deltas) or abs(math.fsum(deltas) - 1.0) > SUM_TOL:
        raise SequenceError(f"fractions {deltas} must be nonnegative and sum to 1")
    return deltas
