"""Magnus terms for the piecewise-constant toggling Hamiltonian.

The pulse sequence is equivalent to alternating H (even intervals) and
H_R = R H R (odd intervals). For A(t) = -i H(t) piecewise constant, the
iterated Magnus integrals reduce to ordered sums over intervals with
simplex-volume weights. These sums are the reference against which the
scalar order conditions are checked.

Conventions, fixed by comparison with the ordered sums:

* heff_k = (i / T_f) Omega_k.
* heff_2 = (i T_f / 2) * S * [H, H_R].
* heff_3 = THIRD_ORDER_NORMALIZATION * T_f**2 * (C1 [H,[H_R,H]] + C2 [H_R,[H_R,H]]).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DimensionError, SequenceError, UnsupportedOrderError
from .linalg import commutator
from .sequences import PulseSequence, segment_fractions
from .system import LevelSystem, PulsePlan, pulse_operator, rotated_hamiltonian

THIRD_ORDER_NORMALIZATION = -1.0 / 6.0
SECOND_ORDER_CONVENTION = "heff_2 = (i*T_f/2) * S * [H, H_R]"
THIRD_ORDER_CONVENTION = "heff_3 = -(T_f**2/6) * (C1*[H,[H_R,H]] + C2*[H_R,[H_R,H]])"


@dataclass(frozen=True, eq=False)
class PiecewiseGenerator:
    """Ordered ``(H_j, delta_j)`` segments; H_j is H or H_R by interval parity."""

    segments: tuple[tuple[np.ndarray, float], ...]

    def __post_init__(self):
        if not self.segments:
            raise SequenceError("generator needs at least one segment")
        mats = [m for m, _ in self.segments]
        dim = mats[0].shape
        if any(m.shape != dim for m in mats):
            raise DimensionError("segments have mismatched dimensions")
        distinct = []
        for m in mats:
            if not any(m is d or np.array_equal(m, d) for d in distinct):
                distinct.append(m)
        if len(distinct) > 2:
            raise SequenceError("segments must alternate between at most two Hamiltonians")
        segment_fractions([d for _, d in self.segments])

    @property
    def fractions(self) -> tuple[float, ...]:
        return tuple(d for _, d in self.segments)

    @property
    def matrices(self) -> tuple[np.ndarray, ...]:
        return tuple(m for m, _ in self.segments)


def piecewise_generator(H, plan: PulsePlan, seq) -> PiecewiseGenerator:
    H = linalg.check_hermitian(H)
    HR = rotated_hamiltonian(H, plan)
    fractions = segment_fractions(seq)
    return PiecewiseGenerator(tuple((H if j % 2 == 0 else HR, d) for j, d in enumerate(fractions)))


def _simplex_weight(j, k, l, d):
    if j > k > l:
        return d[j] * d[k] * d[l]
    if j == k > l:
        return d[j] ** 2 * d[l] / 2
    if j > k == l:
        return d[j] * d[k] ** 2 / 2
    return d[j] ** 3 / 6


def omega_sum(order: int, gen: PiecewiseGenerator, T_f: float) -> np.ndarray:
    """Exact Magnus term Omega_order(T_f) for the piecewise generator."""
    if not T_f > 0:
        raise ValueError(f"T_f must be positive, got {T_f}")
    Hs = gen.matrices
    d = gen.fractions
    m = len(Hs)
    if order == 1:
        return -1j * T_f * sum(dj * Hj for Hj, dj in zip(Hs, d))
    if order == 2:
        acc = np.zeros_like(Hs[0])
        for j in range(m):
            for k in range(j):
                acc = acc + d[j] * d[k] * commutator(Hs[j], Hs[k])
        return -(T_f**2 / 2) * acc
    if order == 3:
        acc = np.zeros_like(Hs[0])
        for j in range(m):
            for k in range(j + 1):
                for l in range(k + 1):
                    if j == k == l:
                        continue  # all three factors equal: both nested terms vanish
                    w = _simplex_weight(j, k, l, d)
                    acc = acc + w * (
                        commutator(Hs[j], commutator(Hs[k], Hs[l]))
                        + commutator(Hs[l], commutator(Hs[k], Hs[j]))
                    )
        return (1j * T_f**3 / 6) * acc
    raise UnsupportedOrderError(f"Magnus order {order} is not supported (1, 2 or 3)")


def effective_term(order: int, gen: PiecewiseGenerator, T_f: float) -> np.ndarray:
    """heff_k = (i / T_f) Omega_k, the order-k contribution to H_eff."""
    return (1j / T_f) * omega_sum(order, gen, T_f)


def _as_fractions(seq) -> tuple[float, ...]:
    """Fractions without feasibility checks; scans evaluate unphysical points too."""
    return seq.deltas if isinstance(seq, PulseSequence) else tuple(float(x) for x in seq)


def parity_sums(seq) -> tuple[float, float]:
    d = _as_fractions(seq)
    return math.fsum(d[0::2]), math.fsum(d[1::2])


def second_order_coefficient(seq) -> float:
    """S = sum_j [delta_{2j-1} sum_{k<j} delta_{2k} - delta_{2j} sum_{k<j} delta_{2k+1}].

    Reduces to delta1 (delta0 - delta2) for n = 2. Valid for any even n
    and does not assume the parity condition.
    """
    d = _as_fractions(seq)
    total = 0.0
    for j in range(1, (len(d) - 1) // 2 + 1):
        even = math.fsum(d[0 : 2 * j : 2])
        odd = math.fsum(d[1 : 2 * j : 2])
        total += d[2 * j - 1] * even - d[2 * j] * odd
    return total


def third_order_coefficients(seq) -> tuple[float, float]:
    """(C1, C2) multiplying [H,[H_R,H]] and [H_R,[H_R,H]] at third order.

    Defined for n = 2 and n = 4 (n = 2 pads delta3 = delta4 = 0).
    """
    d = list(_as_fractions(seq))
    if len(d) not in (3, 5):
        raise UnsupportedOrderError(f"third-order coefficients need n in (2, 4), got n = {len(d) - 1}")
    d0, d1, d2, d3, d4 = d + [0.0] * (5 - len(d))
    c1 = (
        -0.5 * (d1 + d3) * (d2**2 + d4**2 + d0**2 - 4 * d4 * d0)
        + d1 * d2 * (2 * d0 - d4)
        + d2 * d3 * (2 * d4 - d0)
    )
    c2 = 0.5 * (d1 + d3) ** 2 * (d0 + d2 + d4) - 3 * d1 * d2 * d3
    return c1, c2


def nested_commutators(H, HR) -> tuple[np.ndarray, np.ndarray]:
    """([H,[H_R,H]], [H_R,[H_R,H]])."""
    inner = commutator(HR, H)
    return commutator(H, inner), commutator(HR, inner)


def closed_form_first(H, HR, seq) -> np.ndarray:
    even, odd = parity_sums(seq)
    return even * H + odd * HR


def closed_form_second(H, HR, seq, T_f: float) -> np.ndarray:
    return (0.5j * T_f) * second_order_coefficient(seq) * commutator(H, HR)


def closed_form_third(H, HR, seq, T_f: float, alpha: float = THIRD_ORDER_NORMALIZATION) -> np.ndarray:
    c1, c2 = third_order_coefficients(seq)
    X1, X2 = nested_commutators(H, HR)
    return alpha * T_f**2 * (c1 * X1 + c2 * X2)


# closed forms with a (near-)vanishing scalar coefficient are compared
# against this fraction of the unit-coefficient operator scale instead
COEFFICIENT_FLOOR = 1e-3


def _rel(a, b, ref: float = 0.0) -> float:
    scale = max(linalg.frobenius_norm(a), linalg.frobenius_norm(b), COEFFICIENT_FLOOR * ref)
    return 0.0 if scale == 0 else linalg.frobenius_norm(a - b) / scale


def _operator_scales(H, HR, T_f):
    X1, X2 = nested_commutators(H, HR)
    return (
        linalg.frobenius_norm(H),
        T_f / 2 * linalg.frobenius_norm(commutator(H, HR)),
        T_f**2 / 6 * max(linalg.frobenius_norm(X1), linalg.frobenius_norm(X2)),
    )


@dataclass(eq=False)
class MagnusReport:
    """Ordered-sum Magnus terms against the scalar closed forms.

    ``heff_*`` hold the terms for the first Hamiltonian checked;
    deviations are maxima over every Hamiltonian. ``alpha`` is the
    least-squares third-order normalization (None when n > 4).
    """

    heff_1: np.ndarray
    heff_2: np.ndarray
    heff_3: np.ndarray
    S: float
    C1: float | None
    C2: float | None
    oracle_deviation: dict[int, float]
    alpha: float | None = None
    alpha_deviation: float | None = None
    third_cross_ratio: float = 0.0
    trials: int = 0
    T_f: float = 1.0
    conventions: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "S": self.S,
            "C1": self.C1,
            "C2": self.C2,
            "C1_plus_C2": None if self.C1 is None else self.C1 + self.C2,
            "oracle_deviation": {str(k): v for k, v in self.oracle_deviation.items()},
            "alpha": self.alpha,
            "alpha_deviation": self.alpha_deviation,
            "third_cross_ratio": self.third_cross_ratio,
            "trials": self.trials,
            "T_f": self.T_f,
            "conventions": self.conventions,
        }


def closed_form_vs_oracle(
    seq,
    H=None,
    plan: PulsePlan | None = None,
    T_f: float = 1.0,
    trials: int = 100,
    seed: int = 0,
) -> MagnusReport:
    """Compare ordered-sum Magnus terms with the closed forms.

    Uses ``H`` alone when given, otherwise ``trials`` seeded random
    unit-norm Hamiltonians. Third order is fitted with one global
    normalization ``alpha`` and also checked at the frozen
    :data:`THIRD_ORDER_NORMALIZATION`; ``oracle_deviation[3]`` uses the
    frozen value.
    """
    if plan is None:
        plan = pulse_operator(LevelSystem())
    dim = plan.system.dim
    if H is not None:
        hamiltonians = [linalg.check_hermitian(H)]
    else:
        if trials < 1:
            raise ValueError("trials must be >= 1")
        hamiltonians = [linalg.random_hermitian(dim, linalg.trial_rng(seed, t)) for t in range(trials)]

    third = len(segment_fractions(seq)) in (3, 5)
    S = second_order_coefficient(seq)
    C1, C2 = third_order_coefficients(seq) if third else (None, None)

    dev = {1: 0.0, 2: 0.0}
    if third:
        dev[3] = 0.0
    first_terms = None
    fits = []
    cross_ratio = 0.0
    for H_t in hamiltonians:
        gen = piecewise_generator(H_t, plan, seq)
        HR = gen.matrices[1] if len(gen.matrices) > 1 else rotated_hamiltonian(H_t, plan)
        terms = [effective_term(k, gen, T_f) for k in (1, 2, 3)]
        if first_terms is None:
            first_terms = terms
        ref = _operator_scales(H_t, HR, T_f)
        dev[1] = max(dev[1], _rel(terms[0], closed_form_first(H_t, HR, seq), ref[0]))
        dev[2] = max(dev[2], _rel(terms[1], closed_form_second(H_t, HR, seq, T_f), ref[1]))
        _, cross = linalg.block_split(terms[2], plan.system.partition)
        scale = T_f**2 * linalg.frobenius_norm(H_t) ** 3
        cross_ratio = max(cross_ratio, linalg.frobenius_norm(cross) / scale)
        if third:
            dev[3] = max(dev[3], _rel(terms[2], closed_form_third(H_t, HR, seq, T_f), ref[2]))
            fits.append((closed_form_third(H_t, HR, seq, T_f, alpha=1.0), terms[2], ref[2]))

    alpha = alpha_dev = None
    if third:
        num = sum(np.vdot(x, y).real for x, y, _ in fits)
        den = sum(np.vdot(x, x).real for x, _, _ in fits)
        if den > 0:
            alpha = float(num / den)
            alpha_dev = max(_rel(y, alpha * x, ref) for x, y, ref in fits)

    return MagnusReport(
        heff_1=first_terms[0],
        heff_2=first_terms[1],
        heff_3=first_terms[2],
        S=S,
        C1=C1,
        C2=C2,
        oracle_deviation=dev,
        alpha=alpha,
        alpha_deviation=alpha_dev,
        third_cross_ratio=cross_ratio,
        trials=len(hamiltonians),
        T_f=T_f,
        conventions={"second_order": SECOND_ORDER_CONVENTION, "third_order": THIRD_ORDER_CONVENTION},
    )
