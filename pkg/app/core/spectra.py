"""
Smooth max/min-QFI over pure candidates in the trace-distance ball, finite-m spectral rates of
state families and the translated-Poisson certificates for i.i.d. coherence bits.

For phase-aligned pure states D = sqrt(1 - BC^2), so the ball B^eps(psi) becomes the set of
profiles p' with BC(p_psi, p') >= sqrt(1 - eps^2).
"""

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.stats import binom

from app.core.amajor import a_majorizes
from app.core.base_family import BaseStateFamily
from app.core.errors import CertificationError, PreconditionError
from app.core.logger import get_certification_logger, get_performance_logger, get_spectra_logger
from app.core.qfi import POISSON_LAMBDA_CEILING, f_max_profile, f_min_profile
from app.core.settings import settings
from app.models.result_models import (
    BoundKind,
    CertificateRow,
    ChainRow,
    QfiBracket,
    RateDirection,
    RateEstimate,
    RatePoint,
)
from app.models.sequence_models import Backend, IntSeq, Tolerance, default_backend
from app.models.state_models import EnergyDistribution, PureState
from app.utility import seqcore
from app.utility.dists import (
    barbour_bound,
    barbour_params_iid,
    coherence_bit,
    default_trunc,
    distribution_bc,
    distribution_tv,
    iid_power,
    poisson,
    poisson_comparison_bound,
    poisson_distribution,
    translated_poisson,
    translated_poisson_law,
    translation_of,
)

logger = get_spectra_logger()
certification_logger = get_certification_logger()
performance_logger = get_performance_logger()

GRID_MAX_LEVELS = 4


def _check_eps(eps: float) -> None:
    if not 0.0 <= eps < 1.0:
        raise PreconditionError(f"eps must lie in [0, 1), got {eps}")


def _bc_threshold(eps: float) -> float:
    return math.sqrt(1.0 - eps * eps)


def _nu_grid(p: EnergyDistribution, count: int) -> np.ndarray:
    top = 2.0 * float(p.variance()) + 2.0
    linear = np.linspace(0.0, top, count)
    geometric = np.geomspace(1e-3, top, count)
    return np.unique(np.concatenate([linear, geometric]))


def _translated(nu: float, s: int, backend: Backend) -> EnergyDistribution:
    base = poisson_distribution(nu, default_trunc(nu), backend)
    horizon = None if base.horizon is None else base.horizon + s
    return EnergyDistribution(seq=seqcore.shift(base.seq, s), tail_mass=base.tail_mass, horizon=horizon)


def _tp_candidates(p: EnergyDistribution, budget: int) -> Iterable[tuple[float, int, EnergyDistribution]]:
    """Y_s P_nu with nu on a grid over [0, 2 Var + 2] and s next to mean - nu."""
    mean = float(p.mean())
    for nu in _nu_grid(p, max(2, budget // 8)):
        floor = math.floor(mean - nu)
        for s in sorted({floor - 1, floor, floor + 1, floor + 2}):
            if s >= 0:
                yield float(nu), s, _translated(float(nu), s, Backend.FLOAT64)


def _certify_translated(nu: float, s: int) -> None:
    """P_nu >_a Y_s P_nu, so the candidate's F_max is at most 4 nu."""
    backend = Backend.FLOAT64 if nu > POISSON_LAMBDA_CEILING else default_backend()
    verdict = a_majorizes(poisson_distribution(nu, default_trunc(nu), backend), _translated(nu, s, backend), backend=backend)
    if not verdict.holds:
        certification_logger.error(f"❌ SMOOTH | P_{nu:g} does not a-majorize its translate by {s}")
        raise CertificationError("translated Poisson candidate failed its a-majorization certificate")


def smooth_f_max(psi: PureState, eps: float, budget: Optional[int] = None) -> QfiBracket:
    """
    Upper bound on the smooth max-QFI: the minimum F_max over pure candidates in the ball,
    drawn from the center, point masses and translated Poisson profiles (F_max = 4 nu).
    """
    _check_eps(eps)
    p = psi.energy_distribution()
    if eps == 0:
        return f_max_profile(p)
    budget = budget or settings.smoothing_budget
    start = time.time()
    threshold = _bc_threshold(eps)
    p_float = p.to_backend(Backend.FLOAT64)

    best = f_max_profile(p).value
    if float(max(p.seq.values)) ** 0.5 >= threshold:
        best = 0.0

    winner = None
    for nu, s, candidate in _tp_candidates(p, budget):
        if 4.0 * nu < best and distribution_bc(p_float, candidate) >= threshold:
            best, winner = 4.0 * nu, (nu, s)
    if winner is not None:
        _certify_translated(*winner)

    performance_logger.info(
        f"⏱️ SMOOTH FMAX | eps={eps:g} best={best:g} winner={winner} elapsed={time.time() - start:.3f}s"
    )
    if math.isinf(best):
        return QfiBracket(value=math.inf, kind=BoundKind.UPPER_BOUND, lam_star=math.inf, lam_hi=math.inf, unbounded=True)
    return QfiBracket.from_lambda(best / 4.0, BoundKind.UPPER_BOUND, lam_hi=best / 4.0)


def _factorised_candidate(p: EnergyDistribution, nu: float) -> Optional[EnergyDistribution]:
    """r = P_nu * normalize((p * P_-nu)_+), whose product with P_-nu is nonnegative."""
    lo = p.seq.min_index
    horizon = int(p.exact_until) if p.truncated else p.seq.max_index + default_trunc(nu)
    size = horizon - lo + 1
    product = seqcore.convolve(p.seq, poisson(-nu, size, Backend.FLOAT64)).restrict(lo, horizon)
    positive = np.clip(product.as_array(), 0.0, None)
    if positive.sum() <= 0:
        return None
    factor = IntSeq(offset=product.offset, values=positive / positive.sum(), backend=Backend.FLOAT64)
    r = seqcore.convolve(factor, poisson(nu, size, Backend.FLOAT64)).restrict(lo, horizon)
    return EnergyDistribution(seq=r, tail_mass=min(1.0, max(0.0, 1.0 - float(r.total()))), horizon=horizon)


def _binomial_poisson_candidates(p: EnergyDistribution, budget: int) -> Iterable[tuple[float, EnergyDistribution]]:
    """
    Y_s (P_nu * Bin(k, 1/2)) with nu = Var - k/4, so the variance matches p, and s next to
    mean - nu - k/2. The product with P_-nu is Y_s Bin(k, 1/2) >= 0, so F_min >= 4 nu.
    """
    mean, var = float(p.mean()), float(p.variance())
    for k in range(1, min(int(4.0 * var), max(2, budget // 8)) + 1):
        nu = var - k / 4.0
        if nu <= 0:
            break
        base = poisson_distribution(nu, default_trunc(nu), Backend.FLOAT64)
        coins = IntSeq(offset=0, values=binom.pmf(np.arange(k + 1), k, 0.5), backend=Backend.FLOAT64)
        mixed = seqcore.convolve(base.seq, coins).restrict(0, base.horizon)
        tail = min(1.0, max(0.0, 1.0 - float(mixed.total())))
        floor = math.floor(mean - nu - k / 2.0)
        for s in (floor, floor + 1):
            if s >= 0:
                yield nu, EnergyDistribution(seq=seqcore.shift(mixed, s), tail_mass=tail, horizon=base.horizon + s)


def smooth_f_min(psi: PureState, eps: float, budget: Optional[int] = None) -> QfiBracket:
    """
    Lower bound on the smooth min-QFI: the maximum of certified F_min values over pure
    candidates in the ball (translated Poisson profiles, positive-part factorisations and
    Poisson-binomial mixtures, all worth 4 nu).
    """
    _check_eps(eps)
    p = psi.energy_distribution()
    if eps == 0:
        return f_min_profile(p)
    budget = budget or settings.smoothing_budget
    start = time.time()
    threshold = _bc_threshold(eps)
    p_float = p.to_backend(Backend.FLOAT64)

    best = f_min_profile(p).value
    for nu, _, candidate in _tp_candidates(p, budget):
        if 4.0 * nu > best and distribution_bc(p_float, candidate) >= threshold:
            best = 4.0 * nu
    for nu in _nu_grid(p, max(2, budget // 8)):
        if nu <= 0 or 4.0 * nu <= best:
            continue
        candidate = _factorised_candidate(p_float, float(nu))
        if candidate is not None and distribution_bc(p_float, candidate) >= threshold:
            best = 4.0 * float(nu)
    for nu, candidate in _binomial_poisson_candidates(p_float, budget):
        if 4.0 * nu > best and distribution_bc(p_float, candidate) >= threshold:
            best = 4.0 * nu

    performance_logger.info(f"⏱️ SMOOTH FMIN | eps={eps:g} best={best:g} elapsed={time.time() - start:.3f}s")
    return QfiBracket.from_lambda(best / 4.0, BoundKind.LOWER_BOUND, lam_lo=best / 4.0)


# ---- grid oracle for small supports -----------------------------------------------------


def _simplex_grid(levels: int, step: float) -> np.ndarray:
    """All probability vectors on `levels` entries with coordinates in multiples of step."""
    parts = int(round(1.0 / step))
    rows = []
    for bars in itertools.combinations(range(parts + levels - 1), levels - 1):
        edges = (-1,) + bars + (parts + levels - 1,)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(levels)])
    return np.array(rows, dtype=float) / parts


def _grid_ball(p: EnergyDistribution, eps: float, step: Optional[float]) -> tuple[np.ndarray, np.ndarray]:
    if p.truncated or p.seq.span > GRID_MAX_LEVELS:
        raise PreconditionError(f"grid smoothing needs a finite support of at most {GRID_MAX_LEVELS} levels")
    target = p.probabilities().astype(float)
    grid = np.vstack([_simplex_grid(p.seq.span, step or settings.grid_step), target[None, :]])
    inside = np.sqrt(grid * target[None, :]).sum(axis=1) >= _bc_threshold(eps) - 1e-12
    levels = np.arange(p.seq.offset, p.seq.offset + p.seq.span, dtype=float)
    means = grid @ levels
    variances = grid @ levels**2 - means**2
    return grid[inside], np.clip(variances[inside], 0.0, None)


def smooth_f_max_grid(psi: PureState, eps: float, step: Optional[float] = None, budget: Optional[int] = None) -> QfiBracket:
    """
    Two-sided bracket on the smooth max-QFI for supports of at most four levels: lam_lo from the
    smallest 4 Var over the gridded ball, the value from the best of the grid and the heuristic.
    """
    _check_eps(eps)
    p = psi.energy_distribution()
    points, variances = _grid_ball(p, eps, step)
    lower = float(4.0 * variances.min())
    upper = smooth_f_max(psi, eps, budget).value
    if np.any(np.isclose(points.max(axis=1), 1.0)):
        upper = 0.0
    logger.debug(f"🧮 GRID FMAX | points={len(points)} lower={lower:g} upper={upper:g}")
    if math.isinf(upper):
        return QfiBracket(
            value=math.inf, kind=BoundKind.UPPER_BOUND, lam_star=math.inf, lam_lo=lower / 4.0, lam_hi=math.inf, unbounded=True
        )
    return QfiBracket.from_lambda(upper / 4.0, BoundKind.UPPER_BOUND, lam_lo=min(lower, upper) / 4.0, lam_hi=upper / 4.0)


def smooth_f_min_grid(psi: PureState, eps: float, step: Optional[float] = None, budget: Optional[int] = None) -> QfiBracket:
    """Two-sided bracket on the smooth min-QFI: heuristic lower bound, largest 4 Var over the gridded ball above."""
    _check_eps(eps)
    p = psi.energy_distribution()
    _, variances = _grid_ball(p, eps, step)
    upper = float(4.0 * variances.max())
    lower = smooth_f_min(psi, eps, budget).value
    logger.debug(f"🧮 GRID FMIN | lower={lower:g} upper={upper:g}")
    return QfiBracket.from_lambda(lower / 4.0, BoundKind.LOWER_BOUND, lam_lo=lower / 4.0, lam_hi=max(upper, lower) / 4.0)


# ---- rates ---------------------------------------------------------------------------------


def _plateau(values: Sequence[float]) -> tuple[float, float]:
    """Mean and spread of the last three values; +inf entries make the plateau unbounded."""
    tail = list(values[-3:])
    if any(math.isinf(v) for v in tail):
        return math.inf, 0.0 if all(math.isinf(v) for v in tail) else math.inf
    return float(np.mean(tail)), float(max(tail) - min(tail))


def spectral_rate(
    family: BaseStateFamily,
    eps: float,
    ms: Sequence[int],
    direction: RateDirection,
    budget: Optional[int] = None,
    workers: Optional[int] = None,
) -> RateEstimate:
    """(1/m) smooth F_max (sup) or smooth F_min (inf) along the family, with a plateau average."""
    ms = list(ms)
    if not ms or any(b <= a for a, b in zip(ms, ms[1:])) or ms[0] < 1:
        raise PreconditionError("ms must be a nonempty increasing list of positive integers")
    smooth: Callable[[PureState, float, Optional[int]], QfiBracket] = (
        smooth_f_max if direction is RateDirection.SUP else smooth_f_min
    )
    start = time.time()

    def point(m: int) -> RatePoint:
        try:
            psi = family(m)
        except PreconditionError:
            raise
        except Exception as e:
            logger.error(f"❌ RATE | family={family.name} m={m} generator failed: {e}")
            raise PreconditionError(f"family {family.name} failed at m={m}: {e}") from e
        bracket = smooth(psi, eps, budget)
        return RatePoint(m=m, raw_value=bracket.value, per_m=bracket.value / m, bound_kind=bracket.kind)

    workers = workers or settings.rate_workers
    if workers <= 1:
        points = [point(m) for m in ms]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(point, ms))

    extrapolated, spread = _plateau([pt.per_m for pt in points])
    performance_logger.info(
        f"⏱️ RATE | family={family.name} dir={direction.value} eps={eps:g} ms={ms} "
        f"rate={extrapolated:g} spread={spread:g} elapsed={time.time() - start:.3f}s"
    )
    return RateEstimate(eps=eps, per_m=tuple(points), extrapolated=extrapolated, spread=spread, direction=direction)


# ---- translated-Poisson certificates ------------------------------------------------------


def iid_tp_certificate(p: EnergyDistribution, ms: Sequence[int]) -> list[CertificateRow]:
    """d_TV(p^{*m}, TP_{m mean, m var}) against the Barbour bound for each m."""
    params = barbour_params_iid(p)
    q = p.to_backend(Backend.FLOAT64)
    mean, var = float(q.mean()), float(q.variance())
    rows = []
    for m in ms:
        bound = barbour_bound(params, m)
        power = iid_power(q, m)
        tp_seq, tp_tail = translated_poisson_law(m * mean, m * var, backend=Backend.FLOAT64)
        tol = Tolerance.for_backend(Backend.FLOAT64).widened(power.tail_mass + tp_tail)
        d_tv = float(seqcore.tv_distance(power.seq, tp_seq, tol))
        if d_tv > bound:
            certification_logger.error(f"❌ BARBOUR | m={m} d_tv={d_tv:.6f} > bound={bound:.6f}")
            raise CertificationError(f"translated-Poisson distance {d_tv:.6f} exceeds its bound {bound:.6f} at m={m}")
        certification_logger.info(f"✅ BARBOUR | m={m} d_tv={d_tv:.6f} bound={bound:.6f}")
        rows.append(CertificateRow(m=m, d_tv=d_tv, bound=bound))
    return rows


def cbit_poisson_chain(ms: Sequence[int]) -> list[ChainRow]:
    """
    phi_coh^{(x)m} -> TP_{m/2, m/4} -> Y_s P_{m/4}: the two profile distances, the Poisson
    comparison bound on the second and the covariant-unitary distance bound sqrt(2 d_TV) of the chain.
    """
    coin = coherence_bit().energy_distribution(Backend.FLOAT64)
    rows = []
    for m in ms:
        mean, var = m / 2.0, m / 4.0
        s, gamma = translation_of(mean, var)
        tp = translated_poisson(mean, var, backend=Backend.FLOAT64)
        poisson_side = _translated(var, s, Backend.FLOAT64)
        d_iid_tp = distribution_tv(iid_power(coin, m), tp)
        d_tp_poisson = distribution_tv(tp, poisson_side)
        rows.append(
            ChainRow(
                m=m,
                d_iid_tp=d_iid_tp,
                d_tp_poisson=d_tp_poisson,
                comparison_bound=poisson_comparison_bound(var, var + gamma),
                unitary_distance_bound=math.sqrt(2.0 * min(1.0, d_iid_tp + d_tp_poisson)),
            )
        )
        logger.debug(f"🔗 CHAIN | m={m} s={s} gamma={gamma:g} d1={d_iid_tp:.3e} d2={d_tp_poisson:.3e}")
    return rows
