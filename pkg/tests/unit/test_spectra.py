import math
from fractions import Fraction

import numpy as np
import pytest

from app.core.base_family import BaseStateFamily
from app.core.errors import PreconditionError
from app.core.qfi import qfi_pure
from app.core.spectra import (
    cbit_poisson_chain,
    iid_tp_certificate,
    smooth_f_max,
    smooth_f_max_grid,
    smooth_f_min,
    smooth_f_min_grid,
    spectral_rate,
)
from app.families import CoinIidFamily, EigenFamily, PoissonFamily
from app.models.result_models import BoundKind, RateDirection
from app.models.sequence_models import Backend
from app.models.state_models import EnergyDistribution, PureState
from app.utility.dists import iid_power, state_from_distribution
from app.utility.ensembles import random_pure_state


class FailingFamily(BaseStateFamily):
    def __init__(self):
        super().__init__("failing")

    def generate(self, m: int) -> PureState:
        raise ValueError("generator exploded")


def test_smooth_values_at_zero_eps(chi_1: PureState, coin_state: PureState) -> None:
    """eps = 0 reduces to the plain brackets."""
    assert math.isinf(smooth_f_max(coin_state, 0.0).value)
    assert smooth_f_min(coin_state, 0.0).value == 0.0
    assert smooth_f_max(PureState.basis(2), 0.0).value == 0.0


def test_sandwich_survives_smoothing_at_zero_eps(chi_1: PureState, rng: np.random.Generator) -> None:
    """At eps = 0 the smooth brackets still enclose the QFI."""
    states = [chi_1, PureState.basis(3)] + [random_pure_state(rng, int(rng.integers(1, 6))) for _ in range(20)]
    for psi in states:
        lower, upper = smooth_f_min(psi, 0.0).value, smooth_f_max(psi, 0.0).value
        assert lower <= qfi_pure(psi) + 1e-5
        assert qfi_pure(psi) <= upper + 1e-5


def test_smooth_f_max_of_poisson_profile(chi_1: PureState) -> None:
    """Smoothing never raises F_max above the unsmoothed value."""
    bracket = smooth_f_max(chi_1, 0.05, budget=64)
    assert bracket.value <= 4.0 + 1e-5
    assert bracket.kind is BoundKind.UPPER_BOUND


def test_smooth_f_max_of_coin_stays_unbounded(coin_state: PureState) -> None:
    """No point mass or Poisson translate lies in a small ball around a coherence bit."""
    bracket = smooth_f_max(coin_state, 0.05)
    assert bracket.unbounded
    assert math.isinf(bracket.value)


def test_smoothing_is_monotone_in_eps(chi_1: PureState) -> None:
    """Larger balls give smaller smooth F_max and larger smooth F_min."""
    eps_values = (0.05, 0.1, 0.2)
    maxima = [smooth_f_max(chi_1, eps, budget=64).value for eps in eps_values]
    minima = [smooth_f_min(chi_1, eps, budget=64).value for eps in eps_values]
    assert maxima == sorted(maxima, reverse=True)
    assert minima == sorted(minima)


def test_large_ball_admits_poisson_candidates(coin_state: PureState) -> None:
    """At eps = 0.6 a Poisson law sits in the ball around the coin and lifts smooth F_min above 0."""
    assert smooth_f_min(coin_state, 0.6).value > 0.0


def test_eps_must_lie_below_one(coin_state: PureState) -> None:
    """eps outside [0, 1) is refused."""
    with pytest.raises(PreconditionError):
        smooth_f_max(coin_state, 1.0)
    with pytest.raises(PreconditionError):
        smooth_f_min(coin_state, -0.1)


def test_grid_brackets_on_coin(coin_state: PureState) -> None:
    """The gridded ball around (1/2, 1/2) at eps = 0.05 reaches (0.46, 0.54) and no further."""
    upper = smooth_f_max_grid(coin_state, 0.05, step=0.02)
    assert upper.unbounded
    assert upper.lam_lo == pytest.approx(0.46 * 0.54, abs=1e-9)

    lower = smooth_f_min_grid(coin_state, 0.05, step=0.02)
    assert lower.kind is BoundKind.LOWER_BOUND
    assert lower.lam_hi >= 0.25 - 1e-12
    assert lower.lam_lo <= lower.lam_hi


def test_grid_needs_small_finite_support(chi_1: PureState) -> None:
    """Truncated profiles and supports above four levels are refused."""
    with pytest.raises(PreconditionError):
        smooth_f_max_grid(chi_1, 0.05)
    five_levels = state_from_distribution(
        EnergyDistribution.of([Fraction(1, 5)] * 5, backend=Backend.RATIONAL)
    )
    with pytest.raises(PreconditionError):
        smooth_f_min_grid(five_levels, 0.05)


def test_eigen_family_rates_vanish() -> None:
    """Symmetric states have zero sup rate and an inf rate close to zero."""
    sup = spectral_rate(EigenFamily(), 0.05, [1, 2, 3], RateDirection.SUP)
    assert sup.extrapolated == 0.0
    assert all(pt.per_m == 0.0 for pt in sup.per_m)

    inf = spectral_rate(EigenFamily(), 0.05, [1, 2, 3], RateDirection.INF)
    assert 0.0 <= inf.extrapolated < 0.01


def test_poisson_family_rate_is_four_lambda() -> None:
    """chi_lam^{(x) m} has F_max = 4 lam m, so the per-copy value is 4 lam."""
    estimate = spectral_rate(PoissonFamily(1.0), 0.0, [1, 2, 3], RateDirection.SUP)
    assert [pt.m for pt in estimate.per_m] == [1, 2, 3]
    for pt in estimate.per_m:
        assert pt.per_m == pytest.approx(4.0, abs=1e-4)
    assert estimate.extrapolated == pytest.approx(4.0, abs=1e-4)
    assert estimate.spread < 1e-4


def test_rate_keeps_order_with_workers() -> None:
    """Threaded evaluation returns points in m order."""
    estimate = spectral_rate(EigenFamily(), 0.1, [1, 2, 3, 4], RateDirection.SUP, workers=2)
    assert [pt.m for pt in estimate.per_m] == [1, 2, 3, 4]


def test_coin_family_sup_rate_is_unbounded() -> None:
    """Finite profiles of coherence bits never get a finite smooth F_max at eps = 0."""
    estimate = spectral_rate(CoinIidFamily(), 0.0, [1, 2, 3], RateDirection.SUP)
    assert math.isinf(estimate.extrapolated)


@pytest.mark.parametrize("ms", [[], [2, 1], [0, 1], [1, 1]])
def test_rate_rejects_bad_grids(ms: list[int]) -> None:
    """ms must be a nonempty strictly increasing list of positive integers."""
    with pytest.raises(PreconditionError):
        spectral_rate(EigenFamily(), 0.05, ms, RateDirection.SUP)


def test_rate_wraps_generator_failures() -> None:
    """Exceptions inside a family become precondition errors naming the family."""
    with pytest.raises(PreconditionError, match="failing"):
        spectral_rate(FailingFamily(), 0.05, [1], RateDirection.SUP)


def test_tp_certificate_for_coherence_bits(coin: EnergyDistribution) -> None:
    """The translated-Poisson distance of m coins shrinks with m and stays below the bound."""
    rows = iid_tp_certificate(coin, [16, 64, 256, 1024])
    distances = [row.d_tv for row in rows]
    assert distances == sorted(distances, reverse=True)
    assert all(row.d_tv <= row.bound for row in rows)
    assert rows[-1].d_tv < 0.03


def test_tp_certificate_needs_variance() -> None:
    """A point mass has no translated-Poisson certificate."""
    with pytest.raises(PreconditionError):
        iid_tp_certificate(EnergyDistribution.point(0, Backend.RATIONAL), [16])


def test_tp_certificate_when_variance_exceeds_mean() -> None:
    """Mean 1 and variance 1.8 put the comparison law below zero; the certificate still runs."""
    wide = EnergyDistribution.of(
        [Fraction(6, 10), Fraction(1, 10), Fraction(0), Fraction(3, 10)], backend=Backend.RATIONAL
    )
    rows = iid_tp_certificate(wide, [16, 64])
    assert [row.m for row in rows] == [16, 64]
    for row in rows:
        assert 0.0 <= row.d_tv <= 1.0
        assert row.d_tv <= row.bound


def test_chain_without_fractional_translation() -> None:
    """For m divisible by four the translated Poisson law is already a Poisson translate."""
    for row in cbit_poisson_chain([16, 64]):
        assert row.d_tp_poisson == pytest.approx(0.0, abs=1e-12)
        assert row.comparison_bound == 0.0
        assert row.unitary_distance_bound == pytest.approx(math.sqrt(2 * row.d_iid_tp))


def test_chain_with_fractional_translation() -> None:
    """The second leg of the chain stays within the Poisson comparison bound."""
    (row,) = cbit_poisson_chain([6])
    assert row.comparison_bound > 0.0
    assert row.d_tp_poisson <= row.comparison_bound + 1e-12


def test_coin_family_matches_binomial_profile() -> None:
    """The coin family at m = 3 carries the (1, 3, 3, 1)/8 profile."""
    coin_profile = CoinIidFamily()(1).energy_distribution(Backend.RATIONAL)
    assert CoinIidFamily()(3).energy_distribution(Backend.RATIONAL) == iid_power(coin_profile, 3)


def test_coin_family_at_sixty_four_copies() -> None:
    """At eps = 0.05 the smooth F_max of 64 coins stays unbounded while F_min reaches 4 * 15."""
    state = CoinIidFamily()(64)
    assert smooth_f_max(state, 0.05).unbounded
    lower = smooth_f_min(state, 0.05)
    assert lower.kind is BoundKind.LOWER_BOUND
    assert lower.value / 64 >= 0.9375 - 1e-6
