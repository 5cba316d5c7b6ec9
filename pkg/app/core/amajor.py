"""
The a-majorization preorder: p >_a q iff w = p * q~ is a probability distribution, in which
case p = sum_k w(k) Y_k q and w is the (unique) witness.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import linprog

from app.core.errors import CertificationError, PreconditionError
from app.core.logger import get_amajor_logger, get_certification_logger, get_performance_logger
from app.core.settings import settings
from app.models.result_models import AMajorVerdict, VerdictMode
from app.models.sequence_models import Backend, IntSeq, Tolerance, default_backend
from app.models.state_models import EnergyDistribution
from app.utility import seqcore

logger = get_amajor_logger()
certification_logger = get_certification_logger()
performance_logger = get_performance_logger()

BRUTEFORCE_MAX_LEVELS = 16


def _growth_estimate(p: EnergyDistribution, q_tilde: IntSeq) -> float:
    return max(abs(float(v)) for v in q_tilde.values) * sum(abs(float(v)) for v in p.seq.values)


def a_majorizes(
    p: EnergyDistribution,
    q: EnergyDistribution,
    window: Optional[int] = None,
    backend: Optional[Backend] = None,
) -> AMajorVerdict:
    """
    Decide p >_a q.

    Exact mode (both finite): w is computed on [p.min - n*, p.max - q.max] and the verdict
    holds iff it is nonnegative there and w * q reproduces p exactly. Windowed mode (a
    truncated prefix is involved): w is checked for nonnegativity on the indices where it is
    exact, capped at `window` entries.
    """
    backend = backend or default_backend()
    p, q = p.to_backend(backend), q.to_backend(backend)
    if window is None:
        window = p.seq.span + settings.window_pad
    if window < 1:
        raise PreconditionError(f"window must be positive, got {window}")

    n_star = q.n_star
    lo = p.seq.min_index - n_star
    if p.truncated or q.truncated:
        verdict = _windowed(p, q, lo, window, backend)
    else:
        verdict = _exact(p, q, lo, window, backend)

    certification_logger.info(
        f"🔎 AMAJ | holds={verdict.holds} mode={verdict.mode.value} backend={verdict.backend.value} "
        f"window=[{verdict.window_lo},{verdict.window_hi}] marginal={verdict.marginal}"
    )
    return verdict


def _exact(p: EnergyDistribution, q: EnergyDistribution, lo: int, window: int, backend: Backend) -> AMajorVerdict:
    hi = p.seq.max_index - q.seq.max_index
    needed = max(hi - lo + 1, 1)
    if window < needed:
        logger.warning(f"⚠️ AMAJ | window={window} too small for support, extended to {needed}")
        window = needed

    q_tilde = seqcore.reciprocal(q.seq, window - 1)
    if backend is Backend.FLOAT64 and _growth_estimate(p, q_tilde) > settings.float_growth_limit:
        logger.info("🔁 AMAJ | reciprocal growth above float_growth_limit, escalating to rational")
        return _exact(p.to_backend(Backend.RATIONAL), q.to_backend(Backend.RATIONAL), lo, window, Backend.RATIONAL)

    tol = Tolerance.for_backend(backend)
    w_full = seqcore.convolve(p.seq, q_tilde)
    top = lo + window - 1  # last exact entry of w_full

    if hi < lo:
        low = seqcore.min_entry(w_full, lo, top)
        return AMajorVerdict(
            holds=False, witness=None, min_violation=min(low, w_full.zero_value()), window=window,
            window_lo=lo, window_hi=top, mode=VerdictMode.EXACT, backend=backend,
        )

    witness = w_full.restrict(lo, hi)
    low = seqcore.min_entry(w_full, lo, hi)
    nonneg = low >= -tol.neg_tol
    residual = _residual(seqcore.convolve(witness, q.seq), p.seq)
    reproduces = residual <= tol.neg_tol
    holds = nonneg and reproduces
    marginal = backend is Backend.FLOAT64 and holds and low < 0

    if holds:
        min_violation = w_full.zero_value()
    elif not nonneg:
        min_violation = low
    else:
        beyond = seqcore.min_entry(w_full, hi + 1, top) if top > hi else w_full.zero_value()
        min_violation = beyond if beyond < 0 else -residual
    return AMajorVerdict(
        holds=holds, witness=witness if holds else None, min_violation=min_violation, window=window,
        window_lo=lo, window_hi=hi, mode=VerdictMode.EXACT, backend=backend, marginal=marginal,
    )


def _residual(a: IntSeq, b: IntSeq):
    if a.is_zero and b.is_zero:
        return a.zero_value()
    lo = min(s.min_index for s in (a, b) if not s.is_zero)
    hi = max(s.max_index for s in (a, b) if not s.is_zero)
    return max(abs(a[n] - b[n]) for n in range(lo, hi + 1))


def _windowed(p: EnergyDistribution, q: EnergyDistribution, lo: int, window: int, backend: Backend) -> AMajorVerdict:
    n_star = q.n_star
    # w(n) is exact while both the prefix of p and the reciprocal of q's prefix are
    h_w = min(p.exact_until - n_star, q.exact_until - 2 * n_star + p.seq.min_index)
    hi = int(min(h_w, lo + window - 1))
    if hi < lo:
        raise PreconditionError("truncated prefixes leave no exact entry of p * q~ to check")

    horizon = hi - lo
    q_tilde = seqcore.reciprocal(q.seq, horizon)
    if backend is Backend.FLOAT64 and _growth_estimate(p, q_tilde) > settings.float_growth_limit:
        logger.info("🔁 AMAJ | reciprocal growth above float_growth_limit, escalating to rational")
        return _windowed(p.to_backend(Backend.RATIONAL), q.to_backend(Backend.RATIONAL), lo, window, Backend.RATIONAL)

    base = Tolerance.for_backend(backend)
    tol = base.widened(p.tail_mass + q.tail_mass) if backend is Backend.FLOAT64 else base
    w = seqcore.convolve(p.seq, q_tilde).restrict(lo, hi)
    low = seqcore.min_entry(w, lo, hi)
    holds = low >= -tol.neg_tol
    marginal = backend is Backend.FLOAT64 and holds and low < 0
    return AMajorVerdict(
        holds=holds, witness=w if holds else None, min_violation=min(low, w.zero_value()),
        window=hi - lo + 1, window_lo=lo, window_hi=hi, mode=VerdictMode.WINDOWED, backend=backend,
        marginal=marginal,
    )


def solve_witness(p: EnergyDistribution, q: EnergyDistribution) -> IntSeq:
    """
    Recover w from p = w * q by forward substitution on the lower-triangular Toeplitz system
    over [p.min - n*, p.max - q.max]; used to confirm the witness is unique.
    """
    if p.truncated or q.truncated:
        raise PreconditionError("witness solve needs fully known distributions")
    n_star = q.n_star
    lo, hi = p.seq.min_index - n_star, p.seq.max_index - q.seq.max_index
    if hi < lo:
        raise PreconditionError("p is narrower than q: no witness exists")
    size = hi - lo + 1
    rhs = [p[lo + n_star + j] for j in range(size)]
    column = [q[n_star + j] for j in range(size)]

    if p.backend is Backend.FLOAT64:
        toeplitz = np.zeros((size, size))
        for j in range(size):
            toeplitz[j, : j + 1] = column[j::-1]
        w = solve_triangular(toeplitz, np.array(rhs, dtype=float), lower=True)
        return IntSeq(offset=lo, values=w, backend=Backend.FLOAT64)

    w: list[Fraction] = []
    for j in range(size):
        acc = rhs[j] - sum((w[i] * column[j - i] for i in range(j)), Fraction(0))
        w.append(acc / column[0])
    return IntSeq(offset=lo, values=tuple(w), backend=Backend.RATIONAL)


def a_majorizes_bruteforce(p: EnergyDistribution, q: EnergyDistribution) -> bool:
    """
    Linear feasibility of p = sum_k w(k) Y_k q with w >= 0, sum w = 1 over the shift range
    [p.min - q.max, p.max - q.min].
    """
    for name, d in (("p", p), ("q", q)):
        if d.truncated:
            raise PreconditionError(f"{name} is a truncated prefix")
        if d.seq.span > BRUTEFORCE_MAX_LEVELS:
            raise PreconditionError(f"support of {name} spans {d.seq.span} > {BRUTEFORCE_MAX_LEVELS} levels")

    p_min, p_max = p.seq.min_index, p.seq.max_index
    q_min, q_max = q.seq.min_index, q.seq.max_index
    shifts = list(range(p_min - q_max, p_max - q_min + 1))
    rows = list(range(p_min - (q_max - q_min), p_max + (q_max - q_min) + 1))

    a_eq = np.zeros((len(rows) + 1, len(shifts)))
    b_eq = np.zeros(len(rows) + 1)
    for i, n in enumerate(rows):
        b_eq[i] = float(p[n])
        for j, k in enumerate(shifts):
            a_eq[i, j] = float(q[n - k])
    a_eq[-1, :] = 1.0
    b_eq[-1] = 1.0

    result = linprog(
        c=np.zeros(len(shifts)),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=[(0, None)] * len(shifts),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10},
    )
    return result.status == 0


def mutual_implies_shift(p: EnergyDistribution, q: EnergyDistribution, backend: Optional[Backend] = None) -> Optional[int]:
    """If p >_a q and q >_a p, the k with p = Y_k q; otherwise None."""
    if not (a_majorizes(p, q, backend=backend).holds and a_majorizes(q, p, backend=backend).holds):
        return None
    backend = backend or default_backend()
    ps, qs = p.to_backend(backend).seq, q.to_backend(backend).seq
    k = ps.min_index - qs.min_index
    if seqcore.shift(qs, k) != ps:
        if backend is Backend.RATIONAL:
            raise CertificationError("mutual a-majorization without a shift relation")
        return None
    return k


def a_majorizes_batch(
    pairs: Sequence[tuple[EnergyDistribution, EnergyDistribution]],
    window: Optional[int] = None,
    backend: Optional[Backend] = None,
    workers: Optional[int] = None,
) -> list[AMajorVerdict]:
    """Decide many pairs; results keep the input order."""
    start = time.time()
    workers = workers or settings.rate_workers
    if workers <= 1:
        verdicts = [a_majorizes(p, q, window, backend) for p, q in pairs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            verdicts = list(pool.map(lambda pq: a_majorizes(pq[0], pq[1], window, backend), pairs))
    held = sum(v.holds for v in verdicts)
    performance_logger.info(
        f"⏱️ AMAJ BATCH | pairs={len(pairs)} holds={held} workers={workers} elapsed={time.time() - start:.3f}s"
    )
    return verdicts
