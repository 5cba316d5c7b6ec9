"""Seeded random instances for property checks and the correspondence demo."""

from fractions import Fraction
from typing import Optional

import numpy as np

from app.models.channel_models import CovariantChannel, KrausBranch
from app.models.sequence_models import Backend, IntSeq
from app.models.state_models import EnergyDistribution, PureState, SchmidtVector
from app.utility import seqcore


def random_distribution(
    rng: np.random.Generator, support: int, offset: int = 0, max_weight: int = 9
) -> EnergyDistribution:
    """Exact distribution on [offset, offset + support) with small positive integer weights."""
    weights = [int(w) for w in rng.integers(1, max_weight + 1, size=support)]
    total = sum(weights)
    values = tuple(Fraction(w, total) for w in weights)
    return EnergyDistribution(seq=IntSeq(offset=offset, values=values, backend=Backend.RATIONAL))


def feasible_pair(rng: np.random.Generator, max_support: int = 4) -> tuple[EnergyDistribution, EnergyDistribution]:
    """(w * q, q) for random exact w and q, so the first a-majorizes the second."""
    q = random_distribution(rng, int(rng.integers(1, max_support + 1)), offset=int(rng.integers(0, 3)))
    w = random_distribution(rng, int(rng.integers(1, max_support + 1)), offset=int(rng.integers(0, 3)))
    return EnergyDistribution(seq=seqcore.convolve(w.seq, q.seq)), q


def random_pure_state(rng: np.random.Generator, support: int, zero_phases: bool = False) -> PureState:
    p = random_distribution(rng, support)
    phases = np.zeros(support) if zero_phases else rng.uniform(0.0, 2.0 * np.pi, size=support)
    amps = tuple((float(np.sqrt(float(v))), float(ph)) for v, ph in zip(p.seq.values, phases))
    norm = sum(a * a for a, _ in amps)
    amps = tuple((a / np.sqrt(norm), ph) for a, ph in amps)
    return PureState(amps=amps, profile=p)


def random_schmidt(rng: np.random.Generator, dim: int) -> SchmidtVector:
    return SchmidtVector(probs=tuple(rng.dirichlet(np.ones(dim))))


def random_doubly_stochastic(rng: np.random.Generator, dim: int, terms: Optional[int] = None) -> np.ndarray:
    """Random convex combination of permutation matrices."""
    terms = terms or dim
    weights = rng.dirichlet(np.ones(terms))
    out = np.zeros((dim, dim))
    for w in weights:
        out[np.arange(dim), rng.permutation(dim)] += w
    return out


def random_covariant_channel(rng: np.random.Generator, n_trunc: int, shifts: tuple[int, ...] = (0, 1, 2)) -> CovariantChannel:
    """Random ladder Kraus family lowering energy by the given shifts, normalized level by level."""
    if 0 not in shifts:
        shifts = (0,) + tuple(shifts)
    raw = {k: rng.normal(size=n_trunc) + 1j * rng.normal(size=n_trunc) for k in shifts}
    for k, coeffs in raw.items():
        for n in range(n_trunc):
            if not 0 <= n - k < n_trunc:
                coeffs[n] = 0.0
    norms = np.sqrt(sum(np.abs(c) ** 2 for c in raw.values()))
    branches = tuple(KrausBranch(shift=k, coeffs=tuple(raw[k] / norms)) for k in shifts)
    return CovariantChannel(branches=branches, in_trunc=n_trunc, out_trunc=n_trunc)
