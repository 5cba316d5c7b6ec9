from fractions import Fraction

import numpy as np
import pytest

from app.core.errors import PreconditionError
from app.models.sequence_models import Backend, IntSeq, Tolerance
from app.utility import seqcore
from app.utility.dists import poisson
from app.utility.ensembles import random_distribution


def test_convolve_with_delta_is_identity(seq) -> None:
    """delta_0 * a returns a unchanged."""
    a = seq(["1/3", "1/6", "1/2"], offset=2)
    assert seqcore.convolve(IntSeq.delta(0, Backend.RATIONAL), a) == a


def test_convolve_coin_with_itself(seq) -> None:
    """(1/2, 1/2) * (1/2, 1/2) = (1/4, 1/2, 1/4) exactly."""
    coin = seq(["1/2", "1/2"])
    assert seqcore.convolve(coin, coin) == seq(["1/4", "1/2", "1/4"])


def test_convolve_poisson_laws_add() -> None:
    """P_1 * P_2 agrees with P_3 on the fully covered prefix."""
    product = seqcore.convolve(poisson(1.0, 30, Backend.FLOAT64), poisson(2.0, 30, Backend.FLOAT64))
    expected = poisson(3.0, 30, Backend.FLOAT64)
    for n in range(30):
        assert product[n] == pytest.approx(expected[n], rel=1e-10)


def test_convolve_backend_mismatch_raises(seq) -> None:
    """Mixing rational and float sequences is refused."""
    with pytest.raises(PreconditionError):
        seqcore.convolve(seq([1]), IntSeq.of([1.0], backend=Backend.FLOAT64))


def test_convolve_commutative_and_associative(rng: np.random.Generator) -> None:
    """Exact commutativity and associativity on seeded triples."""
    for _ in range(10):
        a, b, c = (random_distribution(rng, int(rng.integers(1, 5)), offset=int(rng.integers(0, 3))).seq for _ in range(3))
        assert seqcore.convolve(a, b) == seqcore.convolve(b, a)
        assert seqcore.convolve(seqcore.convolve(a, b), c) == seqcore.convolve(a, seqcore.convolve(b, c))


def test_partial_convolve_ranges(seq) -> None:
    """A single-term range picks a(n); the full range reproduces convolve."""
    a = seq(["1/4", "1/4", "1/2"])
    b = seq(["1/3", "2/3"], offset=1)
    single = seqcore.partial_convolve(IntSeq.delta(0, Backend.RATIONAL), a, 0, 0)
    assert [single(n) for n in range(3)] == list(a.values)

    full = seqcore.partial_convolve(a, b, 0, 2)
    product = seqcore.convolve(a, b)
    assert all(full(n) == product[n] for n in range(-1, 6))


def test_partial_convolve_empty_range_raises(seq) -> None:
    """s > t is rejected."""
    with pytest.raises(PreconditionError):
        seqcore.partial_convolve(seq([1]), seq([1]), 3, 2)


@pytest.mark.parametrize("lam", [Fraction(1, 2), Fraction(1), Fraction(3)])
def test_reciprocal_of_poisson_is_negative_poisson(lam: Fraction) -> None:
    """The reciprocal of P_lam is P_-lam entrywise and exactly on a 40-entry window."""
    assert seqcore.reciprocal(poisson(lam, 40, Backend.RATIONAL), 39) == poisson(-lam, 40, Backend.RATIONAL)


def test_reciprocal_of_delta_is_inverse_shift() -> None:
    """delta_k inverts to delta_-k."""
    assert seqcore.reciprocal(IntSeq.delta(3, Backend.RATIONAL), 5) == IntSeq.delta(-3, Backend.RATIONAL)


def test_reciprocal_of_coin_alternates(seq) -> None:
    """(1/2, 1/2) has reciprocal 2 (-1)^n and reproduces delta_0 on the window."""
    coin = seq(["1/2", "1/2"])
    inverse = seqcore.reciprocal(coin, 10)
    assert list(inverse.values) == [2 * (-1) ** n for n in range(11)]
    identity = seqcore.convolve(inverse, coin)
    assert [identity[n] for n in range(seqcore.reciprocal_window(coin, 10) + 1)] == [1] + [0] * 10


def test_reciprocal_twice_recovers_sequence(rng: np.random.Generator) -> None:
    """Inverting twice gives back q on the common window."""
    q = random_distribution(rng, 4).seq
    twice = seqcore.reciprocal(seqcore.reciprocal(q, 12), 12)
    assert [twice[n] for n in range(13)] == [q[n] for n in range(13)]


def test_reciprocal_float_matches_rational(seq) -> None:
    """The float recursion agrees with the exact one on a short window."""
    exact = seqcore.reciprocal(seq(["1/3", "1/3", "1/3"]), 8)
    approx = seqcore.reciprocal(IntSeq.of([1 / 3, 1 / 3, 1 / 3], backend=Backend.FLOAT64), 8)
    for n in range(9):
        assert approx[n] == pytest.approx(float(exact[n]), abs=1e-9)


def test_reciprocal_of_zero_raises() -> None:
    """The zero sequence has no reciprocal."""
    with pytest.raises(PreconditionError):
        seqcore.reciprocal(IntSeq.zero(Backend.RATIONAL), 4)


def test_shift_moves_support(seq) -> None:
    """Y_2 delta_0 = delta_2 and Y_-k undoes Y_k."""
    assert seqcore.shift(IntSeq.delta(0, Backend.RATIONAL), 2) == IntSeq.delta(2, Backend.RATIONAL)
    a = seq(["1/5", "4/5"], offset=1)
    assert seqcore.shift(seqcore.shift(a, 4), -4) == a
    assert seqcore.shift(a, 0) == a


def test_tv_distance_examples(seq) -> None:
    """Exact total variation on small examples."""
    coin = seq(["1/2", "1/2"])
    delta0 = IntSeq.delta(0, Backend.RATIONAL)
    assert seqcore.tv_distance(coin, coin) == 0
    assert seqcore.tv_distance(delta0, IntSeq.delta(1, Backend.RATIONAL)) == 1
    assert seqcore.tv_distance(coin, delta0) == Fraction(1, 2)


def test_tv_distance_rejects_unit_mass_violation(seq) -> None:
    """Sequences that are not distributions are refused."""
    with pytest.raises(PreconditionError):
        seqcore.tv_distance(seq(["1/2"]), seq([1]))


def test_tv_distance_triangle_inequality(rng: np.random.Generator) -> None:
    """Symmetric and subadditive on seeded triples."""
    for _ in range(10):
        p, q, r = (random_distribution(rng, 4, offset=int(rng.integers(0, 3))).seq for _ in range(3))
        assert seqcore.tv_distance(p, q) == seqcore.tv_distance(q, p)
        assert seqcore.tv_distance(p, r) <= seqcore.tv_distance(p, q) + seqcore.tv_distance(q, r)


def test_bhattacharyya_examples(seq) -> None:
    """BC is 1 on equal inputs, 0 on disjoint ones and 1/sqrt(2) for coin vs delta_0."""
    coin = seq(["1/2", "1/2"])
    delta0 = IntSeq.delta(0, Backend.RATIONAL)
    assert seqcore.bhattacharyya(coin, coin) == pytest.approx(1.0)
    assert seqcore.bhattacharyya(delta0, IntSeq.delta(1, Backend.RATIONAL)) == 0.0
    assert seqcore.bhattacharyya(coin, delta0) == pytest.approx(1 / np.sqrt(2))


def test_bhattacharyya_sandwiches_total_variation(rng: np.random.Generator) -> None:
    """1 - BC <= d_TV <= sqrt(1 - BC^2) on seeded pairs."""
    for _ in range(20):
        p = random_distribution(rng, 5, offset=int(rng.integers(0, 3))).seq
        q = random_distribution(rng, 5, offset=int(rng.integers(0, 3))).seq
        bc = seqcore.bhattacharyya(p, q)
        tv = float(seqcore.tv_distance(p, q))
        assert 1 - bc <= tv + 1e-12
        assert tv <= np.sqrt(1 - bc**2) + 1e-12


def test_float_tolerances_follow_backend() -> None:
    """Rational tolerances are zero, float ones come from settings."""
    assert Tolerance.for_backend(Backend.RATIONAL) == Tolerance(neg_tol=0.0, mass_tol=0.0)
    assert Tolerance.for_backend(Backend.FLOAT64).neg_tol > 0


def test_loose_tolerance_is_ignored_on_rational_sequences(seq) -> None:
    """A caller's tolerance cannot hide a tiny negative entry or mass defect of a rational sequence."""
    loose = Tolerance(neg_tol=1e-6, mass_tol=1e-6)
    assert loose.on_backend(Backend.RATIONAL) == Tolerance.for_backend(Backend.RATIONAL)
    assert loose.on_backend(Backend.FLOAT64) == loose

    dipped = seq(["1/2", "-1/1000000000000", "1/2"])
    assert not seqcore.is_nonnegative(dipped, 0, 2, loose)
    assert seqcore.is_nonnegative(dipped.to_backend(Backend.FLOAT64), 0, 2, loose)

    heavy = seq(["1/2", "1/2", "1/1000000000000"])
    with pytest.raises(PreconditionError):
        seqcore.tv_distance(heavy, seq(["1/2", "1/2"]), loose)
    with pytest.raises(PreconditionError):
        seqcore.bhattacharyya(heavy, seq(["1/2", "1/2"]), loose)


def test_rationalize_snaps_to_denominator() -> None:
    """Float entries become fractions with bounded denominators."""
    snapped = seqcore.rationalize(IntSeq.of([0.25, 0.75], backend=Backend.FLOAT64), 1000)
    assert snapped.values == (Fraction(1, 4), Fraction(3, 4))
    assert snapped.backend is Backend.RATIONAL
