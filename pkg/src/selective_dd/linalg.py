"""Dense complex matrix helpers for small Hilbert spaces.

Exponentials and logarithms go through eigendecompositions rather than
power series; for d <= ~8 this is exact to floating precision.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionError, NotHermitianError, NotUnitaryError, PartitionError, BranchAmbiguityError

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-12
BRANCH_MARGIN = 0.1


def as_matrix(M) -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    return A


def hermiticity_defect(M) -> tuple[float, tuple[int, int]]:
    """Largest entrywise |M - M^dagger| and where it occurs."""
    A = as_matrix(M)
    D = np.abs(A - A.conj().T)
    idx = np.unravel_index(np.argmax(D), D.shape)
    return float(D[idx]), (int(idx[0]), int(idx[1]))


def is_hermitian(M, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_defect(M)[0] <= tol


def unitarity_defect(U) -> float:
    A = as_matrix(U)
    return float(np.max(np.abs(A.conj().T @ A - np.eye(A.shape[0]))))


def is_unitary(U, tol: float = UNITARY_TOL) -> bool:
    return unitarity_defect(U) <= tol


def check_hermitian(M, tol: float = HERMITIAN_TOL) -> np.ndarray:
    A = as_matrix(M)
    defect, loc = hermiticity_defect(A)
    if defect > tol:
        raise NotHermitianError(defect, loc)
    return A


def commutator(A, B) -> np.ndarray:
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape != B.shape:
        raise DimensionError(f"commutator of {A.shape} and {B.shape} matrices")
    return A @ B - B @ A


def exp_hermitian_generator(H, s: float, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return exp(-i s H) for Hermitian ``H`` via its spectral decomposition."""
    H = check_hermitian(H, tol)
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * s * w)) @ V.conj().T


def principal_log_unitary(U, tol: float = UNITARY_TOL, branch_margin: float = BRANCH_MARGIN) -> np.ndarray:
    """Hermitian G with exp(-iG) = U and eigenvalues inside (-pi, pi].

    Raises :class:`BranchAmbiguityError` if an eigenphase lies within
    ``branch_margin`` of the cut, where the principal branch is not
    numerically well defined.
    """
    U = as_matrix(U)
    defect = unitarity_defect(U)
    if defect > tol:
        raise NotUnitaryError(defect)
    # complex Schur form of a normal matrix is diagonal with unitary Z, even
    # for degenerate spectra where eig() would give non-orthogonal vectors
    T, Z = scipy.linalg.schur(U, output="complex")
    phases = np.angle(np.diag(T))
    worst = float(np.max(np.abs(phases)))
    if worst > np.pi - branch_margin:
        raise BranchAmbiguityError(worst, branch_margin)
    G = (Z * -phases) @ Z.conj().T
    return (G + G.conj().T) / 2


def normalize_partition(partition: Sequence[Sequence[int]], dim: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if len(partition) != 2:
        raise PartitionError("a bipartition needs exactly two index groups")
    keep, flip = (tuple(int(i) for i in part) for part in partition)
    every = keep + flip
    if sorted(every) != list(range(dim)):
        raise PartitionError(f"partition {keep}|{flip} does not cover 0..{dim - 1} exactly once")
    if not keep or not flip:
        raise PartitionError("both sides of the partition must be nonempty")
    return keep, flip


def block_mask(partition, dim: int) -> np.ndarray:
    """Boolean mask, True on entries that stay inside one side of the partition."""
    keep, _ = normalize_partition(partition, dim)
    side = np.zeros(dim, dtype=bool)
    side[list(keep)] = True
    return side[:, None] == side[None, :]


def block_split(M, partition) -> tuple[np.ndarray, np.ndarray]:
    """Split ``M`` into its block-diagonal and cross-block parts."""
    M = as_matrix(M)
    mask = block_mask(partition, M.shape[0])
    return np.where(mask, M, 0), np.where(mask, 0, M)


def frobenius_norm(M) -> float:
    return float(np.linalg.norm(np.asarray(M), "fro"))


def spectral_norm(M) -> float:
    return float(np.linalg.norm(np.asarray(M), 2))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Dense random Hermitian matrix with unit spectral norm.

    Entries are standard complex Gaussians, symmetrized as (M + M^dagger)/2.
    """
    M = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    H = (M + M.conj().T) / 2
    return H / spectral_norm(H)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream per (seed, trial) so parallel order never matters."""
    return np.random.default_rng([int(seed), int(trial)])
