"""
Energy distributions: generalized and translated Poisson laws, i.i.d. powers, spectrum
reduction onto the integer ladder and the translated-Poisson approximation bounds.
"""

import math
from fractions import Fraction
from typing import Any, Optional

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson as poisson_law

from app.core.errors import PreconditionError
from app.core.logger import get_dists_logger
from app.core.settings import settings
from app.models.sequence_models import Backend, IntSeq, Tolerance, default_backend, to_fraction
from app.models.state_models import (
    RATIONALIZE_DENOMINATOR,
    BarbourParams,
    EnergyDistribution,
    GeneralSpectrum,
    PureState,
)
from app.utility import seqcore

logger = get_dists_logger()


def default_trunc(lam: float) -> int:
    """N_trunc = |lam| + sigmas * sqrt(|lam|) + offset."""
    lam = abs(float(lam))
    return int(math.ceil(lam + settings.poisson_tail_sigmas * math.sqrt(lam) + settings.poisson_tail_offset))


def _poisson_scale(lam: Fraction) -> Fraction:
    """
    Rational stand-in for exp(-lam), rounded down for lam >= 0 so prefixes never exceed
    unit mass, and c(-lam) = 1/c(lam) so that the reciprocal of P_lam is exactly P_-lam.
    """
    if lam < 0:
        return 1 / _poisson_scale(-lam)
    below = math.nextafter(math.nextafter(math.exp(-float(lam)), 0.0), 0.0)
    if below <= 0.0:
        raise PreconditionError(f"Poisson parameter {float(lam)} underflows the rational scale")
    return Fraction(below)


def poisson(lam: Any, n_trunc: int, backend: Optional[Backend] = None) -> IntSeq:
    """Generalized Poisson sequence e^-lam lam^n / n! on 0 <= n < n_trunc (lam may be negative)."""
    backend = backend or default_backend()
    if n_trunc < 1:
        raise PreconditionError(f"n_trunc must be at least 1, got {n_trunc}")

    if backend is Backend.RATIONAL:
        lam = to_fraction(lam)
        if lam == 0:
            return IntSeq.delta(0, backend)
        term = _poisson_scale(lam)
        values = []
        for n in range(n_trunc):
            values.append(term)
            term = term * lam / (n + 1)
        return IntSeq(offset=0, values=tuple(values), backend=backend)

    lam = float(lam)
    if lam == 0:
        return IntSeq.delta(0, backend)
    n = np.arange(n_trunc)
    if lam > 0:
        values = poisson_law.pmf(n, lam)
    else:
        values = np.exp(-lam + n * math.log(-lam) - gammaln(n + 1)) * np.where(n % 2 == 0, 1.0, -1.0)
    return IntSeq(offset=0, values=values, backend=backend)


def poisson_distribution(lam: Any, n_trunc: Optional[int] = None, backend: Optional[Backend] = None) -> EnergyDistribution:
    """P_lam for lam >= 0 as a truncated energy distribution carrying its tail mass."""
    backend = backend or default_backend()
    if float(lam) < 0:
        raise PreconditionError("P_lam is a distribution only for lam >= 0")
    if float(lam) == 0:
        return EnergyDistribution.point(0, backend)
    n_trunc = n_trunc or default_trunc(float(lam))
    seq = poisson(lam, n_trunc, backend)
    tail = max(0.0, 1.0 - float(seq.total()))
    return EnergyDistribution(seq=seq, tail_mass=tail, horizon=n_trunc - 1)


def _translation_base(mu: Any, sigma2: Any, n_trunc: Optional[int], backend: Backend) -> tuple[int, EnergyDistribution]:
    """s = floor(mu - sigma2) and P_{sigma2+gamma} with gamma = mu - sigma2 - s."""
    if backend is Backend.RATIONAL:
        mu, sigma2 = to_fraction(mu), to_fraction(sigma2)
    else:
        mu, sigma2 = float(mu), float(sigma2)
    if sigma2 < 0:
        raise PreconditionError(f"variance must be nonnegative, got {sigma2}")
    s = math.floor(mu - sigma2)
    gamma = mu - sigma2 - s
    return s, poisson_distribution(sigma2 + gamma, n_trunc, backend)


def translated_poisson_law(
    mu: Any, sigma2: Any, n_trunc: Optional[int] = None, backend: Optional[Backend] = None
) -> tuple[IntSeq, float]:
    """
    TP_{mu,sigma2} = Y_s P_{sigma2+gamma} as a sequence plus the tail mass cut off by the
    Poisson truncation. For sigma2 > mu the law starts at a negative index.
    """
    s, base = _translation_base(mu, sigma2, n_trunc, backend or default_backend())
    return seqcore.shift(base.seq, s), base.tail_mass


def translated_poisson(mu: Any, sigma2: Any, n_trunc: Optional[int] = None, backend: Optional[Backend] = None) -> EnergyDistribution:
    """TP_{mu,sigma2} = Y_s P_{sigma2+gamma} with s = floor(mu - sigma2), gamma = mu - sigma2 - s."""
    s, base = _translation_base(mu, sigma2, n_trunc, backend or default_backend())
    if s < 0:
        raise PreconditionError(f"translation s={s} would put mass on negative energies")
    horizon = None if base.horizon is None else base.horizon + s
    return EnergyDistribution(seq=seqcore.shift(base.seq, s), tail_mass=base.tail_mass, horizon=horizon)


def translation_of(mu: float, sigma2: float) -> tuple[int, float]:
    s = math.floor(mu - sigma2)
    return s, mu - sigma2 - s


def iid_power(p: EnergyDistribution, m: int) -> EnergyDistribution:
    """m-fold self-convolution by repeated squaring."""
    if m < 1:
        raise PreconditionError(f"m must be at least 1, got {m}")
    result: Optional[IntSeq] = None
    base, k = p.seq, m
    while k:
        if k & 1:
            result = base if result is None else seqcore.convolve(result, base)
        k >>= 1
        if k:
            base = seqcore.convolve(base, base)

    if not p.truncated:
        return EnergyDistribution(seq=result, tail_mass=0.0, horizon=None)

    # the product of prefixes is exact up to horizon + (m - 1) * n*
    horizon = p.horizon + (m - 1) * p.n_star
    kept = result.restrict(result.min_index, horizon)
    tail = max(0.0, 1.0 - float(kept.total()))
    logger.debug(f"📐 IID | m={m} truncated power re-windowed to horizon={horizon} tail={tail:.3e}")
    return EnergyDistribution(seq=kept, tail_mass=tail, horizon=horizon)


def poisson_profile_state(lam: Any, n_trunc: Optional[int] = None) -> PureState:
    """chi_lam: amplitudes sqrt(P_lam(n)) with zero phases and the exact rational profile attached."""
    if float(lam) < 0:
        raise PreconditionError(f"chi_lam needs lam >= 0, got {lam}")
    profile = poisson_distribution(lam, n_trunc, Backend.RATIONAL)
    if profile.is_point_mass:
        return PureState(amps=((1.0, 0.0),), profile=profile)
    amps = tuple((math.sqrt(float(v)), 0.0) for v in profile.seq.values)
    return PureState(amps=amps, tail_mass=profile.tail_mass, profile=profile)


def coherence_bit() -> PureState:
    """phi_coh = (|0> + |1>)/sqrt(2)."""
    half = EnergyDistribution.of([Fraction(1, 2), Fraction(1, 2)], backend=Backend.RATIONAL)
    return PureState(amps=((math.sqrt(0.5), 0.0), (math.sqrt(0.5), 0.0)), profile=half)


def state_from_distribution(p: EnergyDistribution, phases: Optional[np.ndarray] = None) -> PureState:
    """Pure state with amplitudes sqrt(p(n)) (zero phases unless given) carrying p as its profile."""
    n_trunc = int(p.seq.max_index) + 1
    probs = [float(p[n]) for n in range(n_trunc)]
    phase = np.zeros(n_trunc) if phases is None else np.resize(np.asarray(phases, dtype=float), n_trunc)
    amps = tuple((math.sqrt(max(v, 0.0)), float(phase[n]) if v > 0 else 0.0) for n, v in enumerate(probs))
    norm = sum(a * a for a, _ in amps)
    if p.tail_mass == 0 and abs(norm - 1.0) > 1e-15:
        amps = tuple((a / math.sqrt(norm), ph) for a, ph in amps)
    return PureState(amps=amps, tail_mass=p.tail_mass, profile=p)


def distribution_tv(p: EnergyDistribution, q: EnergyDistribution) -> float:
    """Total variation between two energy distributions on the float backend (tails widen the mass check)."""
    tol = Tolerance.for_backend(Backend.FLOAT64).widened(p.tail_mass + q.tail_mass)
    return float(seqcore.tv_distance(p.seq.to_backend(Backend.FLOAT64), q.seq.to_backend(Backend.FLOAT64), tol))


def distribution_bc(p: EnergyDistribution, q: EnergyDistribution) -> float:
    tol = Tolerance.for_backend(Backend.FLOAT64).widened(p.tail_mass + q.tail_mass)
    return seqcore.bhattacharyya(p.seq.to_backend(Backend.FLOAT64), q.seq.to_backend(Backend.FLOAT64), tol)


def reduce_spectrum(g: GeneralSpectrum, backend: Optional[Backend] = None) -> EnergyDistribution:
    """
    Map a finite-period spectrum onto the integer ladder: shift the lowest occupied level to
    zero, rescale energies by tau / 2 pi and merge degenerate levels.
    """
    backend = backend or default_backend()
    unit = 2.0 * math.pi / g.period
    occupied = [(e, w) for e, w in g.levels if w > 0]
    e0 = min(e for e, _ in occupied)

    indexed = []
    for position, (energy, weight) in enumerate(occupied):
        x = (energy - e0) / unit
        n = round(x)
        if abs(x - n) > settings.mass_tol * max(1.0, abs(x)):
            raise PreconditionError(f"gap {energy - e0:g} is not a multiple of 2pi/tau={unit:g}")
        indexed.append((n, position, weight))
    indexed.sort()

    n_max = indexed[-1][0]
    weights = [0.0] * (n_max + 1)
    for n, _, weight in indexed:
        weights[n] += weight
    logger.debug(f"📐 SPECTRUM | levels={len(g.levels)} ladder={n_max + 1} period={g.period:g}")

    if backend is Backend.FLOAT64:
        total = sum(weights)
        return EnergyDistribution(seq=IntSeq(offset=0, values=tuple(w / total for w in weights), backend=backend))
    exact = [Fraction(w).limit_denominator(RATIONALIZE_DENOMINATOR) for w in weights]
    total = sum(exact, Fraction(0))
    return EnergyDistribution(seq=IntSeq(offset=0, values=tuple(w / total for w in exact), backend=backend))


def barbour_params_iid(p: EnergyDistribution) -> BarbourParams:
    """
    (a, b, c) for i.i.d. copies of an integer variable Z ~ p:
    a = Var Z, b = min(1/2, 1 - d_TV(L(Z), L(Z+1))), c = psi / Var Z with
    psi = Var Z E[Z(Z-1)] + |E Z - Var Z| E[(Z-1)(Z-2)] + E|Z(Z-1)(Z-2)|.
    """
    q = p.to_backend(Backend.FLOAT64)
    n = np.arange(q.seq.offset, q.seq.max_index + 1, dtype=float)
    w = q.probabilities() / q.probabilities().sum()
    mu = float(np.dot(n, w))
    var = float(np.dot((n - mu) ** 2, w))
    if var <= 0:
        raise PreconditionError("zero variance: the translated-Poisson bound needs var > 0")
    shifted = float(seqcore.tv_distance(q.seq, seqcore.shift(q.seq, 1), Tolerance.for_backend(Backend.FLOAT64).widened(q.tail_mass)))
    v = min(0.5, 1.0 - shifted)
    if v <= 0:
        raise PreconditionError("v = 0: Z and Z + 1 have disjoint supports")
    psi = (
        var * float(np.dot(n * (n - 1), w))
        + abs(mu - var) * float(np.dot((n - 1) * (n - 2), w))
        + float(np.dot(np.abs(n * (n - 1) * (n - 2)), w))
    )
    return BarbourParams(a=var, b=v, c=psi / var)


def barbour_bound(params: BarbourParams, m: int) -> float:
    """c / sqrt(m b - 1/2) + 2 / (m a)."""
    if m * params.b <= 0.5:
        raise PreconditionError(f"m*b = {m * params.b:g} must exceed 1/2")
    return params.c / math.sqrt(m * params.b - 0.5) + 2.0 / (m * params.a)


def poisson_comparison_bound(sigma2: float, sigma2p: float) -> float:
    """min{x, sqrt(2/e) (sqrt(sigma^2 + x) - sigma)} with x = |sigma2 - sigma2p|, sigma^2 the smaller variance."""
    if sigma2 < 0 or sigma2p < 0:
        raise PreconditionError("variances must be nonnegative")
    x = abs(sigma2 - sigma2p)
    low = min(sigma2, sigma2p)
    sigma = math.sqrt(low)
    return min(x, math.sqrt(2.0 / math.e) * (math.sqrt(low + x) - sigma))
