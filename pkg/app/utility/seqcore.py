"""
Arithmetic on finitely supported integer-indexed sequences.

Rational sequences are convolved and inverted with integer arithmetic over a common
denominator; float sequences go through numpy. Backends are never mixed.
"""

import math
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from app.core.errors import PreconditionError
from app.core.logger import get_seqcore_logger
from app.models.sequence_models import Backend, IntSeq, Tolerance

logger = get_seqcore_logger()


def _same_backend(*seqs: IntSeq) -> Backend:
    backends = {s.backend for s in seqs}
    if len(backends) != 1:
        raise PreconditionError(f"backend mismatch: {sorted(b.value for b in backends)}")
    return backends.pop()


def _tolerance(tol: Optional[Tolerance], backend: Backend) -> Tolerance:
    """Caller's tolerance, forced to zero on the rational backend."""
    if tol is None:
        return Tolerance.for_backend(backend)
    clamped = tol.on_backend(backend)
    if clamped is not tol:
        logger.debug(f"🔒 TOL | ignoring neg_tol={tol.neg_tol:g} mass_tol={tol.mass_tol:g} on rational sequences")
    return clamped


def _integer_scaled(values: tuple) -> tuple[list[int], int]:
    """Numerators over the least common denominator."""
    denom = math.lcm(*(v.denominator for v in values)) if values else 1
    return [v.numerator * (denom // v.denominator) for v in values], denom


def convolve(a: IntSeq, b: IntSeq) -> IntSeq:
    """(a*b)(n) = sum_k a(k) b(n-k)."""
    backend = _same_backend(a, b)
    if a.is_zero or b.is_zero:
        return IntSeq.zero(backend)
    offset = a.offset + b.offset

    if backend is Backend.FLOAT64:
        return IntSeq(offset=offset, values=np.convolve(a.as_array(), b.as_array()), backend=backend)

    ia, da = _integer_scaled(a.values)
    ib, db = _integer_scaled(b.values)
    out = [0] * (len(ia) + len(ib) - 1)
    for i, x in enumerate(ia):
        if x == 0:
            continue
        for j, y in enumerate(ib):
            if y:
                out[i + j] += x * y
    denom = da * db
    return IntSeq(offset=offset, values=tuple(Fraction(v, denom) for v in out), backend=backend)


def partial_convolve(a: IntSeq, b: IntSeq, s: int, t: int) -> Callable[[int], object]:
    """Returns n -> sum_{k=s}^{t} a(k) b(n-k)."""
    _same_backend(a, b)
    if s > t:
        raise PreconditionError(f"empty summation range s={s} > t={t}")
    if a.is_zero:
        return lambda n: a.zero_value()
    lo, hi = max(s, a.min_index), min(t, a.max_index)

    def value(n: int):
        total = a.zero_value()
        for k in range(lo, hi + 1):
            total += a[k] * b[n - k]
        return total

    return value


def shift(a: IntSeq, k: int) -> IntSeq:
    """(Y_k a)(n) = a(n-k)."""
    if a.is_zero:
        return a
    return IntSeq(offset=a.offset + k, values=a.values, backend=a.backend)


def reciprocal(q: IntSeq, horizon: int, tol: Optional[Tolerance] = None) -> IntSeq:
    """
    Convolution inverse of q with respect to delta_0, produced on [-n*, -n* + horizon].

    With n* the first nonzero index of q, the recursion
        q~(-n*) = 1/q(n*),
        q~(-n* + j) = -(1/q(n*)) sum_{i<j} q~(-n* + i) q(n* + j - i)
    makes (q~ * q)(n) = delta_{0,n} hold for every n <= horizon (see reciprocal_window).
    """
    if q.is_zero:
        raise PreconditionError("the zero sequence has no reciprocal")
    if horizon < 0:
        raise PreconditionError(f"horizon must be nonnegative, got {horizon}")
    n_star = q.min_index
    lead = q.values[0]

    if q.backend is Backend.FLOAT64:
        tol = _tolerance(tol, q.backend)
        if abs(lead) < tol.neg_tol:
            raise PreconditionError(f"ill-conditioned leading entry q({n_star})={lead:.3e}")
        coeffs = np.zeros(horizon + 1)
        src = q.as_array()
        coeffs[: min(len(src), horizon + 1)] = src[: horizon + 1]
        out = np.zeros(horizon + 1)
        out[0] = 1.0 / lead
        for j in range(1, horizon + 1):
            out[j] = -np.dot(out[:j], coeffs[j:0:-1]) / lead
        return IntSeq(offset=-n_star, values=out, backend=q.backend)

    # integer recursion: q = Q/D, q~ = D * S_j / Q0^(j+1)
    numerators, denom = _integer_scaled(q.values)
    coeffs = numerators[: horizon + 1] + [0] * max(0, horizon + 1 - len(numerators))
    q0 = coeffs[0]
    powers = [1]
    for _ in range(horizon + 1):
        powers.append(powers[-1] * q0)
    scaled = [1]
    for j in range(1, horizon + 1):
        acc = 0
        for i in range(max(0, j - len(numerators) + 1), j):
            c = coeffs[j - i]
            if c:
                acc += scaled[i] * powers[j - 1 - i] * c
        scaled.append(-acc)
    values = tuple(Fraction(denom * s_j, powers[j + 1]) for j, s_j in enumerate(scaled))
    return IntSeq(offset=-n_star, values=values, backend=q.backend)


def reciprocal_window(q: IntSeq, horizon: int) -> int:
    """Largest n for which convolve(reciprocal(q, horizon), q)(n) = delta_{0,n} is guaranteed."""
    if q.is_zero:
        raise PreconditionError("the zero sequence has no reciprocal")
    return horizon


def is_nonnegative(a: IntSeq, lo: int, hi: int, tol: Optional[Tolerance] = None) -> bool:
    tol = _tolerance(tol, a.backend)
    return all(a[n] >= -tol.neg_tol for n in range(lo, hi + 1))


def min_entry(a: IntSeq, lo: int, hi: int):
    if hi < lo:
        return a.zero_value()
    return min(a[n] for n in range(lo, hi + 1))


def _check_mass(p: IntSeq, tol: Tolerance) -> None:
    total = p.total()
    if abs(total - 1) > tol.mass_tol:
        raise PreconditionError(f"sequence mass {float(total):.12f} is not 1 within {tol.mass_tol:g}")


def tv_distance(p: IntSeq, q: IntSeq, tol: Optional[Tolerance] = None):
    """(1/2) sum_n |p(n) - q(n)|; exact on the rational backend."""
    backend = _same_backend(p, q)
    tol = _tolerance(tol, backend)
    _check_mass(p, tol)
    _check_mass(q, tol)
    if p.is_zero and q.is_zero:
        return p.zero_value()
    lo = min(s.min_index for s in (p, q) if not s.is_zero)
    hi = max(s.max_index for s in (p, q) if not s.is_zero)
    total = sum((abs(p[n] - q[n]) for n in range(lo, hi + 1)), p.zero_value())
    return total / 2


def bhattacharyya(p: IntSeq, q: IntSeq, tol: Optional[Tolerance] = None) -> float:
    """sum_n sqrt(p(n) q(n)), a float in [0, 1]."""
    backend = _same_backend(p, q)
    tol = _tolerance(tol, backend)
    for s in (p, q):
        if s.values and min(s.values) < -tol.neg_tol:
            raise PreconditionError("negative entry beyond neg_tol")
        _check_mass(s, tol)
    if p.is_zero or q.is_zero:
        return 0.0
    lo, hi = max(p.min_index, q.min_index), min(p.max_index, q.max_index)
    if hi < lo:
        return 0.0
    pa = np.clip(np.array([float(p[n]) for n in range(lo, hi + 1)]), 0.0, None)
    qa = np.clip(np.array([float(q[n]) for n in range(lo, hi + 1)]), 0.0, None)
    return float(min(1.0, np.sum(np.sqrt(pa * qa))))


def rationalize(a: IntSeq, max_denominator: Optional[int] = None) -> IntSeq:
    """Rational copy of a float sequence; entries snapped to max_denominator when given."""
    if a.backend is Backend.RATIONAL:
        return a
    values = [Fraction(float(v)) for v in a.values]
    if max_denominator:
        values = [v.limit_denominator(max_denominator) for v in values]
    return IntSeq(offset=a.offset, values=tuple(values), backend=Backend.RATIONAL)
