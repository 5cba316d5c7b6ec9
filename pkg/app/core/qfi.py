"""
Quantum Fisher information and its Poisson-referenced max/min variants.

F_max(psi) = inf{4 lam | P_lam >_a p_psi} and F_min(psi) = sup{4 lam | p_psi * P_-lam >= 0}.
For a fully known profile with more than one level neither condition can hold for lam > 0
(only translated Poisson laws factor a Poisson law, and p * P_-lam has an alternating tail),
so F_max = +inf and F_min = 0 there. Truncated prefixes of infinite-support profiles are
decided by bisection on the windowed predicates.
"""

import math
import time
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.linalg import solve_sylvester

from app.core.amajor import a_majorizes
from app.core.errors import CertificationError, PreconditionError
from app.core.logger import get_certification_logger, get_performance_logger, get_qfi_logger
from app.core.settings import settings
from app.models.result_models import AMajorVerdict, BoundKind, QfiBracket
from app.models.sequence_models import Backend, IntSeq, Tolerance, default_backend
from app.models.state_models import DensityMatrix, EnergyDistribution, PureState
from app.utility import seqcore
from app.utility.bisection import expand_until, find_max_feasible, find_min_feasible
from app.utility.dists import default_trunc, poisson, poisson_distribution
from app.utility.linalg import psd_sqrt, random_unitary

logger = get_qfi_logger()
certification_logger = get_certification_logger()
performance_logger = get_performance_logger()

MIXED_MAX_DIM = 64
PURIFY_MAX_DIM = 16
PURIFY_MAX_LEVELS = 8
POISSON_LAMBDA_CEILING = 512.0
PROFILE_FLOOR = 1e-14


# ---- plain QFI ----------------------------------------------------------------


def qfi_pure(psi: PureState) -> float:
    """4 Var_{p_psi}(n)."""
    return 4.0 * float(psi.energy_distribution().variance())


def qfi_mixed(rho: DensityMatrix) -> float:
    """2 sum_{i,j} (l_i - l_j)^2 / (l_i + l_j) |<i|H|j>|^2 over the eigenbasis of rho."""
    if rho.dim > MIXED_MAX_DIM:
        raise PreconditionError(f"dimension {rho.dim} exceeds {MIXED_MAX_DIM}")
    vals, vecs = np.linalg.eigh(rho.matrix)
    h = vecs.conj().T @ rho.hamiltonian() @ vecs
    total = 0.0
    for i in range(rho.dim):
        for j in range(rho.dim):
            s = vals[i] + vals[j]
            if s > 1e-12:
                total += (vals[i] - vals[j]) ** 2 / s * abs(h[i, j]) ** 2
    return float(2.0 * total)


def qfi_sld(rho: DensityMatrix) -> float:
    """
    QFI from the symmetric logarithmic derivative: solve rho L + L rho = 2 d rho/dt with
    d rho/dt = -i[H, rho], then F = tr(rho L^2). Needs a full-rank rho.
    """
    vals = np.linalg.eigvalsh(rho.matrix)
    if np.min(vals) <= 1e-12:
        raise PreconditionError("the SLD solve needs a full-rank density matrix")
    h = rho.hamiltonian()
    derivative = -1j * (h @ rho.matrix - rho.matrix @ h)
    sld = solve_sylvester(rho.matrix, rho.matrix, 2.0 * derivative)
    return float(np.trace(rho.matrix @ sld @ sld).real)


# ---- max / min QFI --------------------------------------------------------------


def _profile_backend(p: EnergyDistribution, backend: Optional[Backend]) -> Backend:
    if backend is not None:
        return backend
    if p.truncated and p.backend is Backend.FLOAT64:
        return Backend.FLOAT64
    return default_backend()


def _poisson_majorizes(p: EnergyDistribution, lam: float, backend: Backend) -> bool:
    """Windowed predicate P_lam >_a p."""
    if lam <= 0:
        return p.is_point_mass
    n_trunc = max(default_trunc(lam), int(p.exact_until) - p.n_star + 1)
    reference = poisson_distribution(lam, n_trunc, backend)
    return a_majorizes(reference, p, window=n_trunc, backend=backend).holds


def f_max_profile(p: EnergyDistribution, tol: Optional[float] = None, backend: Optional[Backend] = None) -> QfiBracket:
    tol = tol or settings.default_tol
    if p.is_point_mass:
        return QfiBracket.from_lambda(0.0, BoundKind.EXACT)
    if not p.truncated:
        return QfiBracket(
            value=math.inf, kind=BoundKind.LOWER_BOUND, lam_star=math.inf,
            lam_lo=float(p.variance()), lam_hi=math.inf, unbounded=True,
        )

    backend = _profile_backend(p, backend)
    p = p.to_backend(backend)
    start = time.time()
    predicate = lambda lam: _poisson_majorizes(p, lam, backend)

    lam_hi = max(4.0 * float(p.variance()), 1.0)
    cap = min(settings.bisection_max_doublings, _doubling_cap(lam_hi))
    lam_hi, doublings = expand_until(predicate, lam_hi, True, cap)
    if doublings > cap:
        logger.warning(f"⚠️ FMAX | no feasible lambda up to {lam_hi:g}; reporting an unbounded-suspect lower bound")
        return QfiBracket.from_lambda(
            lam_hi, BoundKind.LOWER_BOUND, iterations=doublings, lam_lo=lam_hi, lam_hi=math.inf, unbounded=True
        )

    bracket = find_min_feasible(predicate, 0.0, lam_hi, tol / 4.0)
    kind = BoundKind.EXACT if backend is Backend.RATIONAL else BoundKind.UPPER_BOUND
    performance_logger.info(
        f"⏱️ FMAX | lam=[{bracket.lo:.9f},{bracket.hi:.9f}] iterations={bracket.iterations} "
        f"backend={backend.value} elapsed={time.time() - start:.3f}s"
    )
    return QfiBracket.from_lambda(
        bracket.hi, kind, iterations=bracket.iterations + doublings, lam_lo=bracket.lo, lam_hi=bracket.hi
    )


def _doubling_cap(start: float) -> int:
    """Doublings allowed before lambda passes the Poisson ceiling."""
    if start >= POISSON_LAMBDA_CEILING:
        return 0
    return int(math.floor(math.log2(POISSON_LAMBDA_CEILING / start)))


def f_max_pure(psi: PureState, tol: Optional[float] = None, backend: Optional[Backend] = None) -> QfiBracket:
    """Bracket of inf{4 lam | P_lam * p~_psi >= 0}."""
    return f_max_profile(psi.energy_distribution(backend or _state_backend(psi)), tol, backend)


def _state_backend(psi: PureState) -> Backend:
    if psi.profile is not None:
        return psi.profile.backend if psi.profile.truncated else default_backend()
    return Backend.FLOAT64 if psi.tail_mass > 0 else default_backend()


def _poisson_factor_nonnegative(p: EnergyDistribution, lam: float, backend: Backend) -> bool:
    """Windowed predicate p * P_-lam >= 0 on the indices where the product is exact."""
    if lam <= 0:
        return True
    horizon = int(p.exact_until)
    lo = p.seq.min_index
    reference = poisson(-lam, horizon - lo + 1, backend)
    product = seqcore.convolve(p.seq, reference)
    tol = Tolerance.for_backend(backend)
    if backend is Backend.FLOAT64:
        tol = tol.widened(p.tail_mass)
    return seqcore.is_nonnegative(product, lo, horizon, tol)


def f_min_profile(p: EnergyDistribution, tol: Optional[float] = None, backend: Optional[Backend] = None) -> QfiBracket:
    tol = tol or settings.default_tol
    if not p.truncated:
        return QfiBracket.from_lambda(0.0, BoundKind.EXACT)

    backend = _profile_backend(p, backend)
    p = p.to_backend(backend)
    start = time.time()
    predicate = lambda lam: _poisson_factor_nonnegative(p, lam, backend)

    lam_hi = max(2.0 * float(p.variance()), tol)
    cap = min(settings.bisection_max_doublings, _doubling_cap(lam_hi))
    lam_hi, doublings = expand_until(predicate, lam_hi, False, cap)
    if doublings > cap:
        logger.warning(f"⚠️ FMIN | still feasible at lambda={lam_hi:g}; reporting a lower bound")
        return QfiBracket.from_lambda(
            lam_hi, BoundKind.LOWER_BOUND, iterations=doublings, lam_lo=lam_hi, lam_hi=math.inf, unbounded=True
        )

    bracket = find_max_feasible(predicate, 0.0, lam_hi, tol / 4.0)
    kind = BoundKind.EXACT if backend is Backend.RATIONAL else BoundKind.LOWER_BOUND
    performance_logger.info(
        f"⏱️ FMIN | lam=[{bracket.lo:.9f},{bracket.hi:.9f}] iterations={bracket.iterations} "
        f"backend={backend.value} elapsed={time.time() - start:.3f}s"
    )
    return QfiBracket.from_lambda(
        bracket.lo, kind, iterations=bracket.iterations + doublings, lam_lo=bracket.lo, lam_hi=bracket.hi
    )


def f_min_pure(psi: PureState, tol: Optional[float] = None, backend: Optional[Backend] = None) -> QfiBracket:
    """Bracket of sup{4 lam | p_psi * P_-lam >= 0}."""
    return f_min_profile(psi.energy_distribution(backend or _state_backend(psi)), tol, backend)


def f_max_grid_scan(
    p: EnergyDistribution, lams: Iterable[float], window: int, backend: Optional[Backend] = None
) -> Optional[float]:
    """Smallest grid lambda whose P_lam * p~ is nonnegative on the first `window` indices, or None."""
    backend = backend or default_backend()
    p = p.to_backend(backend)
    for lam in sorted(lams):
        if lam <= 0:
            if p.is_point_mass:
                return 0.0
            continue
        n_trunc = max(default_trunc(lam), window + p.n_star)
        verdict = a_majorizes(poisson_distribution(lam, n_trunc, backend), p, window=window, backend=backend)
        if verdict.holds:
            return float(lam)
    return None


# ---- mixed states -----------------------------------------------------------------


def _total_energy_profile(amplitudes: np.ndarray, sys_energies: Sequence[int], anc_energies: Sequence[int]) -> np.ndarray:
    weights = np.abs(amplitudes) ** 2
    totals = np.add.outer(np.asarray(sys_energies), np.asarray(anc_energies))
    profile = np.bincount(totals.ravel(), weights=weights.ravel(), minlength=int(totals.max()) + 1)
    profile[profile < PROFILE_FLOOR] = 0.0
    return profile / profile.sum()


def _variance(profile: np.ndarray) -> float:
    n = np.arange(len(profile))
    mu = float(np.dot(n, profile))
    return float(np.dot((n - mu) ** 2, profile))


def _descend(amplitudes: np.ndarray, sys_energies, levels: int, start: list[int], sweeps: int = 10) -> list[int]:
    """Coordinate descent on ancilla energies minimizing the variance of the total-energy profile."""
    assignment = list(start)
    best = _variance(_total_energy_profile(amplitudes, sys_energies, assignment))
    for _ in range(sweeps):
        improved = False
        for a in range(len(assignment)):
            for energy in range(levels):
                if energy == assignment[a]:
                    continue
                trial = assignment.copy()
                trial[a] = energy
                value = _variance(_total_energy_profile(amplitudes, sys_energies, trial))
                if value < best - 1e-15:
                    best, assignment, improved = value, trial, True
        if not improved:
            break
    return assignment


def f_max_mixed_upper(
    rho: DensityMatrix,
    anc_levels: int,
    restarts: int,
    extra_profiles: Sequence[EnergyDistribution] = (),
    tol: Optional[float] = None,
    seed: Optional[int] = None,
) -> QfiBracket:
    """
    Upper bound on F_max(rho): minimum of F_max over purifications Phi = (sqrt(rho) W) with
    ancilla energies in {0, ..., anc_levels - 1}. W ranges over the identity, the Schmidt
    basis and `restarts` random unitaries; energies come from coordinate descent seeded by the
    equal, correlated (C - n) and random assignments. `extra_profiles` adds total-energy
    profiles of purifications built elsewhere.
    """
    if rho.dim > PURIFY_MAX_DIM:
        raise PreconditionError(f"dimension {rho.dim} exceeds {PURIFY_MAX_DIM}")
    if not 1 <= anc_levels <= PURIFY_MAX_LEVELS:
        raise PreconditionError(f"anc_levels must lie in [1, {PURIFY_MAX_LEVELS}]")
    rng = np.random.default_rng(settings.seed if seed is None else seed)
    start_time = time.time()

    vals, vecs = np.linalg.eigh(rho.matrix)
    root = psd_sqrt(rho.matrix)
    purifications = [root, vecs * np.sqrt(np.clip(vals, 0.0, None))]
    purifications += [root @ random_unitary(rng, rho.dim) for _ in range(restarts)]

    sys_energies = list(rho.energies)
    top = anc_levels - 1
    candidates: list[EnergyDistribution] = []
    for amplitudes in purifications:
        dominant = np.argmax(np.abs(amplitudes) ** 2, axis=0)
        starts = [
            [0] * rho.dim,
            [min(top, max(0, top - sys_energies[n])) for n in dominant],
            list(rng.integers(0, anc_levels, size=rho.dim)),
        ]
        for begin in starts:
            assignment = _descend(amplitudes, sys_energies, anc_levels, begin)
            profile = _total_energy_profile(amplitudes, sys_energies, assignment)
            candidates.append(EnergyDistribution(seq=IntSeq(offset=0, values=profile, backend=Backend.FLOAT64)))

    best = math.inf
    for profile in list(candidates) + list(extra_profiles):
        value = f_max_profile(profile, tol).value
        best = min(best, value)
        if best == 0.0:
            break

    performance_logger.info(
        f"⏱️ FMAX MIXED | dim={rho.dim} candidates={len(candidates) + len(extra_profiles)} "
        f"best={best:g} elapsed={time.time() - start_time:.3f}s"
    )
    if math.isinf(best):
        return QfiBracket(value=math.inf, kind=BoundKind.UPPER_BOUND, lam_star=math.inf, lam_hi=math.inf, unbounded=True)
    return QfiBracket.from_lambda(best / 4.0, BoundKind.UPPER_BOUND, lam_hi=best / 4.0)


# ---- convertibility -------------------------------------------------------------


def one_shot_convertible(
    psi: PureState, phi: PureState, window: Optional[int] = None, backend: Optional[Backend] = None
) -> AMajorVerdict:
    """psi -> phi by a covariant operation iff p_psi >_a p_phi."""
    backend = backend or default_backend()
    return a_majorizes(psi.energy_distribution(backend), phi.energy_distribution(backend), window, backend)


def sufficiency_gap_check(psi: PureState, phi: PureState, tol: Optional[float] = None) -> bool:
    """True iff the certified F_min(psi) strictly exceeds the certified F_max(phi)."""
    lower = f_min_pure(psi, tol)
    upper = f_max_pure(phi, tol)
    gap = not upper.unbounded and lower.value > upper.value
    if gap:
        verdict = one_shot_convertible(psi, phi)
        if not verdict.holds:
            certification_logger.error(
                f"❌ GAP | F_min={lower.value:.9f} > F_max={upper.value:.9f} but conversion fails"
            )
            raise CertificationError("strict F_min/F_max gap without an a-majorization witness")
        certification_logger.info(f"✅ GAP | F_min={lower.value:.9f} > F_max={upper.value:.9f}, conversion holds")
    return gap
