"""Level systems, the ideal 2pi phase-flip pulse, and the H -> (H_T, H_V, H_R) split."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, PartitionError
from . import linalg

DEFAULT_LABELS = ("g", "e", "f")


def _default_labels(dim: int) -> tuple[str, ...]:
    return DEFAULT_LABELS[:dim] + tuple(f"l{i}" for i in range(len(DEFAULT_LABELS), dim))


@dataclass(frozen=True)
class LevelSystem:
    """A ``dim``-level system whose ``flip_set`` levels receive the 2pi pulse.

    ``flip_set`` may be given as indices or labels; it is stored as sorted
    indices. The default is the qutrit {g} | {e, f}.
    """

    dim: int = 3
    labels: tuple[str, ...] = ()
    flip_set: tuple[int, ...] = (1, 2)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 3:
            raise DimensionError(f"dim must be an integer >= 3, got {self.dim}")
        labels = tuple(self.labels) if self.labels else _default_labels(self.dim)
        if len(labels) != self.dim:
            raise DimensionError(f"{len(labels)} labels for a {self.dim}-level system")
        if len(set(labels)) != len(labels):
            raise PartitionError(f"labels must be unique: {labels}")
        flip = []
        for item in self.flip_set:
            if isinstance(item, str):
                if item not in labels:
                    raise PartitionError(f"unknown level label {item!r}")
                flip.append(labels.index(item))
            else:
                flip.append(int(item))
        if len(set(flip)) != len(flip) or any(i < 0 or i >= self.dim for i in flip):
            raise PartitionError(f"flip_set {tuple(self.flip_set)} is not a set of levels 0..{self.dim - 1}")
        if not flip or len(flip) == self.dim:
            raise PartitionError("flip_set must be a nonempty proper subset of the levels")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "flip_set", tuple(sorted(flip)))

    @property
    def keep_set(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.dim) if i not in self.flip_set)

    @property
    def partition(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.keep_set, self.flip_set

    def index(self, level) -> int:
        return self.labels.index(level) if isinstance(level, str) else int(level)


@dataclass(frozen=True, eq=False)
class PulsePlan:
    system: LevelSystem
    R: np.ndarray = field(repr=False)

    @property
    def signs(self) -> np.ndarray:
        """Diagonal of R: +1 on kept levels, -1 on flipped ones."""
        return np.real(np.diag(self.R))


def pulse_operator(system: LevelSystem) -> PulsePlan:
    """R = P_keep - P_flip.

    Any SU(2) generator with eigenvalues +-1 on the flipped pair exponentiates
    to -1 there at angle pi, so no particular generator is stored.
    """
    signs = np.ones(system.dim)
    signs[list(system.flip_set)] = -1.0
    R = np.diag(signs).astype(complex)
    R.setflags(write=False)
    return PulsePlan(system, R)


def _checked(H, plan: PulsePlan, tol: float) -> np.ndarray:
    H = linalg.check_hermitian(H, tol)
    if H.shape[0] != plan.system.dim:
        raise DimensionError(f"{H.shape[0]}x{H.shape[0]} Hamiltonian for a {plan.system.dim}-level system")
    return H


def rotated_hamiltonian(H, plan: PulsePlan, tol: float = linalg.HERMITIAN_TOL) -> np.ndarray:
    """H_R = R H R: cross-block entries negated, everything else untouched."""
    H = _checked(H, plan, tol)
    s = plan.signs
    # sign mask instead of matmul keeps unchanged entries bit-exact
    return H * np.outer(s, s)


def target_hamiltonian(H, plan: PulsePlan, tol: float = linalg.HERMITIAN_TOL) -> np.ndarray:
    """H_T = (H + H_R) / 2, the block-diagonal part of H."""
    return coupling_decomposition(H, plan, tol)[0]


def coupling_decomposition(H, plan: PulsePlan, tol: float = linalg.HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Return (H_T, H_V) with H_V = (H - H_R)/2 the couplings to be suppressed."""
    H = _checked(H, plan, tol)
    return linalg.block_split(H, plan.system.partition)


def embedded_sigma_x(system: LevelSystem, a, b) -> np.ndarray:
    """sigma_x acting on levels ``a``, ``b`` and zero elsewhere."""
    i, j = system.index(a), system.index(b)
    S = np.zeros((system.dim, system.dim), dtype=complex)
    S[i, j] = S[j, i] = 1.0
    return S


def hamiltonian_from_couplings(system: LevelSystem, energies: Sequence[float], couplings: dict) -> np.ndarray:
    """Build H from level energies and ``{(a, b): value}`` upper-triangle couplings."""
    H = np.diag(np.asarray(energies, dtype=float)).astype(complex)
    if H.shape[0] != system.dim:
        raise DimensionError(f"{H.shape[0]} energies for a {system.dim}-level system")
    for (a, b), value in couplings.items():
        i, j = system.index(a), system.index(b)
        H[i, j] = value
        H[j, i] = np.conj(value)
    return H
