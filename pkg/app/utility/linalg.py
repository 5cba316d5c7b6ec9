from typing import Optional

import numpy as np
from scipy.stats import unitary_group


def psd_sqrt(mat: np.ndarray) -> np.ndarray:
    """Square root of a positive semidefinite Hermitian matrix via its eigendecomposition."""
    vals, vecs = np.linalg.eigh(mat)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """(1/2) || rho - sigma ||_1 for Hermitian inputs of equal shape."""
    diff = rho - sigma
    diff = (diff + diff.conj().T) / 2
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def pad_matrix(mat: np.ndarray, dim: int) -> np.ndarray:
    if mat.shape[0] > dim:
        raise ValueError("cannot pad a matrix to a smaller dimension")
    out = np.zeros((dim, dim), dtype=complex)
    out[: mat.shape[0], : mat.shape[1]] = mat
    return out


def time_evolution(energies, t: float) -> np.ndarray:
    """Diagonal of exp(-i H t) for H = diag(energies)."""
    return np.exp(-1j * np.asarray(energies, dtype=float) * t)


def evolve(rho: np.ndarray, energies, t: float) -> np.ndarray:
    phase = time_evolution(energies, t)
    return (phase[:, None] * rho) * phase.conj()[None, :]


def random_density_matrix(rng: np.random.Generator, dim: int, rank: Optional[int] = None) -> np.ndarray:
    """Ginibre-distributed density matrix of the given rank."""
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    if dim == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(dim, random_state=rng)
