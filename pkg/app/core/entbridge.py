"""
Entanglement side of the asymmetry/entanglement correspondence: majorization, Nielsen's
criterion, max/min/smooth entropies and finite-m entropy rates.
"""

import math
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog

from app.core.amajor import a_majorizes, a_majorizes_bruteforce
from app.core.errors import CertificationError, PreconditionError
from app.core.logger import get_bridge_logger, get_certification_logger
from app.core.settings import settings
from app.models.result_models import CorrespondenceRow, Entropies, EntropyRateRow, SmoothEntropies
from app.models.state_models import DensityMatrix, SchmidtVector
from app.utility import ensembles

logger = get_bridge_logger()
certification_logger = get_certification_logger()

MAJORIZATION_TOL = 1e-12
RANK_TOL = 1e-12
IID_MAX_LEVELS = 1 << 22


# ---- majorization -----------------------------------------------------------------------


def _pad(p: SchmidtVector, q: SchmidtVector) -> tuple[np.ndarray, np.ndarray]:
    length = max(len(p.probs), len(q.probs))
    return p.padded(length), q.padded(length)


def majorizes(p: SchmidtVector, q: SchmidtVector) -> bool:
    """p >- q: every prefix sum of p (sorted down) dominates the matching prefix sum of q."""
    a, b = _pad(p, q)
    return bool(np.all(np.cumsum(a) >= np.cumsum(b) - MAJORIZATION_TOL))


def hlp_majorizes(p: SchmidtVector, q: SchmidtVector) -> bool:
    """Linear feasibility of q = D p over doubly stochastic D."""
    a, b = _pad(p, q)
    n = len(a)
    a_eq, b_eq = [], []
    for i in range(n):
        row = np.zeros((n, n))
        row[i, :] = a
        a_eq.append(row.ravel())
        b_eq.append(b[i])
    for i in range(n):
        row = np.zeros((n, n))
        row[i, :] = 1.0
        a_eq.append(row.ravel())
        b_eq.append(1.0)
        col = np.zeros((n, n))
        col[:, i] = 1.0
        a_eq.append(col.ravel())
        b_eq.append(1.0)
    result = linprog(
        c=np.zeros(n * n),
        A_eq=np.array(a_eq),
        b_eq=np.array(b_eq),
        bounds=[(0, None)] * (n * n),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10},
    )
    return result.status == 0


def birkhoff_decompose(matrix: np.ndarray, tol: float = 1e-9) -> list[tuple[float, tuple[int, ...]]]:
    """
    Write a doubly stochastic matrix as a convex combination of permutation matrices by
    repeatedly peeling off a permutation supported on the positive entries.
    """
    x = np.array(matrix, dtype=float)
    n = x.shape[0]
    if x.shape != (n, n) or np.any(x < -tol):
        raise PreconditionError("Birkhoff decomposition needs a square nonnegative matrix")
    if np.max(np.abs(x.sum(axis=0) - 1.0)) > 1e-8 or np.max(np.abs(x.sum(axis=1) - 1.0)) > 1e-8:
        raise PreconditionError("matrix is not doubly stochastic")

    terms: list[tuple[float, tuple[int, ...]]] = []
    for _ in range((n - 1) ** 2 + 1):
        if x.max() <= tol:
            break
        cost = np.where(x > tol, -x, n + 1.0)
        rows, cols = linear_sum_assignment(cost)
        weight = float(x[rows, cols].min())
        if weight <= tol:
            raise CertificationError("no permutation supported on the remaining positive entries")
        terms.append((weight, tuple(int(c) for c in cols)))
        x[rows, cols] -= weight
    return terms


def nielsen_convertible(psi: SchmidtVector, phi: SchmidtVector) -> bool:
    """psi -> phi by LOCC iff lambda_psi is majorized by lambda_phi."""
    return majorizes(phi, psi)


# ---- entropies ----------------------------------------------------------------------------


def _spectrum(rho: DensityMatrix) -> np.ndarray:
    return np.clip(np.linalg.eigvalsh(np.asarray(rho.matrix)), 0.0, None)


def _spectrum_entropies(probs: np.ndarray) -> Entropies:
    probs = np.asarray(probs, dtype=float)
    support = probs[probs > RANK_TOL]
    s = float(-np.sum(support * np.log2(support)))
    return Entropies(s=max(s, 0.0), s_max=math.log2(len(support)), s_min=max(0.0, -math.log2(float(support.max()))))


def entropies(rho: DensityMatrix) -> Entropies:
    """von Neumann, max- (log rank) and min- (-log largest eigenvalue) entropies in bits."""
    return _spectrum_entropies(_spectrum(rho))


def smooth_entropies_spectrum(probs: Sequence[float], eps: float) -> SmoothEntropies:
    """
    Commuting smoothing of a spectrum: the max-entropy drops the smallest eigenvalues while
    their mass stays within eps; the min-entropy caps the eigenvalues at the lowest level h
    whose excess sum (l - h)_+ is within eps, refilling the mass below h.
    """
    if not 0.0 <= eps < 1.0:
        raise PreconditionError(f"eps must lie in [0, 1), got {eps}")
    p = np.sort(np.clip(np.asarray(probs, dtype=float), 0.0, None))[::-1]
    p = p[p > RANK_TOL]

    tails = np.concatenate([np.cumsum(p[::-1])[::-1][1:], [0.0]])
    keep = int(np.argmax(tails <= eps + 1e-15)) + 1

    lo, hi = 1.0 / len(probs), float(p[0])
    if np.sum(np.clip(p - lo, 0.0, None)) <= eps:
        hi = lo
    else:
        for _ in range(200):
            if hi - lo <= 1e-15 * hi:
                break
            mid = (lo + hi) / 2
            if np.sum(np.clip(p - mid, 0.0, None)) <= eps:
                hi = mid
            else:
                lo = mid
    return SmoothEntropies(eps=eps, s_max=math.log2(keep), s_min=max(0.0, -math.log2(hi)))


def smooth_entropies(rho: DensityMatrix, eps: float) -> SmoothEntropies:
    return smooth_entropies_spectrum(_spectrum(rho), eps)


def iid_spectrum(probs: Sequence[float], m: int) -> np.ndarray:
    """Spectrum of rho^{(x) m}."""
    base = np.asarray(probs, dtype=float)
    if m < 1:
        raise PreconditionError(f"m must be at least 1, got {m}")
    if len(base) ** m > IID_MAX_LEVELS:
        raise PreconditionError(f"{len(base)}^{m} levels exceed the desk-scale limit {IID_MAX_LEVELS}")
    out = np.ones(1)
    for _ in range(m):
        out = np.kron(out, base)
    return out


def entropy_rate_series(probs: Sequence[float], ms: Sequence[int], eps: float) -> list[EntropyRateRow]:
    """(1/m) S, S_max^eps and S_min^eps of the i.i.d. spectrum for each m."""
    rows = []
    for m in ms:
        spectrum = iid_spectrum(probs, m)
        plain = _spectrum_entropies(spectrum)
        smooth = smooth_entropies_spectrum(spectrum, eps)
        rows.append(EntropyRateRow(m=m, s_rate=plain.s / m, s_max_rate=smooth.s_max / m, s_min_rate=smooth.s_min / m))
        logger.debug(f"📏 ENTROPY RATE | m={m} s={plain.s / m:.6f} smax={smooth.s_max / m:.6f} smin={smooth.s_min / m:.6f}")
    return rows


# ---- correspondence table -------------------------------------------------------------------


def correspondence_rows(count: int, seed: Optional[int] = None, max_support: int = 4) -> list[CorrespondenceRow]:
    """
    Seeded pure-state pairs checked on both sides: a-majorization of energy profiles against its
    linear-feasibility oracle, and Nielsen's criterion against doubly stochastic feasibility.
    Every other pair is built feasible so both verdicts occur.
    """
    rng = np.random.default_rng(settings.seed if seed is None else seed)
    rows = []
    for index in range(count):
        if index % 2 == 0:
            p, q = ensembles.feasible_pair(rng, max_support)
            a = ensembles.random_schmidt(rng, max_support)
            b = SchmidtVector(probs=tuple(ensembles.random_doubly_stochastic(rng, max_support) @ a.padded(max_support)))
        else:
            p = ensembles.random_distribution(rng, int(rng.integers(1, max_support + 1)))
            q = ensembles.random_distribution(rng, int(rng.integers(1, max_support + 1)))
            a, b = ensembles.random_schmidt(rng, max_support), ensembles.random_schmidt(rng, max_support)
        row = CorrespondenceRow(
            index=index,
            rta_convertible=a_majorizes(p, q).holds,
            rta_oracle=a_majorizes_bruteforce(p, q),
            locc_convertible=nielsen_convertible(b, a),
            locc_oracle=hlp_majorizes(a, b),
        )
        if row.rta_convertible != row.rta_oracle or row.locc_convertible != row.locc_oracle:
            certification_logger.warning(f"⚠️ BRIDGE | row={index} verdict differs from its oracle: {row}")
        rows.append(row)
    return rows
