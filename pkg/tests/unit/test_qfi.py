import math

import numpy as np
import pytest

from app.core.errors import PreconditionError
from app.core.qfi import (
    f_max_grid_scan,
    f_max_mixed_upper,
    f_max_profile,
    f_max_pure,
    f_min_pure,
    one_shot_convertible,
    qfi_mixed,
    qfi_pure,
    qfi_sld,
    sufficiency_gap_check,
)
from app.models.result_models import BoundKind
from app.models.sequence_models import Backend
from app.models.state_models import DensityMatrix, EnergyDistribution, PureState
from app.utility.dists import poisson_distribution, poisson_profile_state, state_from_distribution
from app.utility.ensembles import feasible_pair, random_pure_state
from app.utility.linalg import random_density_matrix


def test_qfi_pure_examples(coin_state: PureState, chi_1: PureState) -> None:
    """Basis states carry no QFI; the coherence bit has 1 and chi_1 has 4."""
    assert qfi_pure(PureState.basis(3)) == 0.0
    assert qfi_pure(coin_state) == pytest.approx(1.0)
    assert qfi_pure(chi_1) == pytest.approx(4.0, rel=1e-9)


def test_qfi_mixed_of_pure_projector(chi_1: PureState, rng: np.random.Generator) -> None:
    """On rank-one inputs the mixed formula reduces to 4 Var."""
    assert qfi_mixed(DensityMatrix.from_state(chi_1)) == pytest.approx(4.0, rel=1e-6)
    psi = random_pure_state(rng, 5)
    assert qfi_mixed(DensityMatrix.from_state(psi)) == pytest.approx(qfi_pure(psi), abs=1e-9)


def test_qfi_mixed_of_maximally_mixed_state() -> None:
    """I/d commutes with H and has zero QFI."""
    assert qfi_mixed(DensityMatrix(matrix=np.eye(4) / 4)) == 0.0


def test_qfi_mixed_vanishes_exactly_on_commuting_states(rng: np.random.Generator) -> None:
    """qfi_mixed is zero when rho commutes with H and positive otherwise."""
    for _ in range(50):
        dim = int(rng.integers(2, 6))
        diagonal = DensityMatrix(matrix=np.diag(rng.dirichlet(np.ones(dim))))
        assert qfi_mixed(diagonal) == pytest.approx(0.0, abs=1e-12)

        blocks = np.zeros((4, 4), dtype=complex)
        blocks[:2, :2] = random_density_matrix(rng, 2) / 2
        blocks[2:, 2:] = random_density_matrix(rng, 2) / 2
        degenerate = DensityMatrix(matrix=blocks, energies=(0, 0, 1, 1))
        assert qfi_mixed(degenerate) == pytest.approx(0.0, abs=1e-10)

        generic = DensityMatrix(matrix=random_density_matrix(rng, dim))
        assert qfi_mixed(generic) > 1e-6


def test_qfi_mixed_matches_sld() -> None:
    """rho = |+><+|/2 + I/4 has QFI 1/4 from both formulas."""
    rho = DensityMatrix(matrix=np.array([[0.5, 0.25], [0.25, 0.5]]))
    assert qfi_mixed(rho) == pytest.approx(0.25, abs=1e-12)
    assert qfi_sld(rho) == pytest.approx(0.25, abs=1e-9)


def test_qfi_sld_needs_full_rank(coin_state: PureState) -> None:
    """A pure state has no SLD solution."""
    with pytest.raises(PreconditionError):
        qfi_sld(DensityMatrix.from_state(coin_state))


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0, 5.0])
def test_poisson_profile_brackets(lam: float) -> None:
    """F_max and F_min of chi_lam both equal 4 lam."""
    chi = poisson_profile_state(lam)
    upper = f_max_pure(chi, tol=1e-4)
    lower = f_min_pure(chi, tol=1e-4)
    assert upper.value == pytest.approx(4 * lam, abs=2e-4)
    assert lower.value == pytest.approx(4 * lam, abs=2e-4)
    assert upper.kind is BoundKind.EXACT
    assert lower.kind is BoundKind.EXACT
    assert upper.lam_lo <= lam <= upper.lam_hi
    assert lower.lam_lo <= lam <= lower.lam_hi


def test_poisson_profile_sandwich(chi_1: PureState) -> None:
    """F_min <= F <= F_max on chi_1."""
    fmin = f_min_pure(chi_1, tol=1e-4).value
    fmax = f_max_pure(chi_1, tol=1e-4).value
    assert fmin <= qfi_pure(chi_1) + 2e-4
    assert qfi_pure(chi_1) <= fmax + 2e-4


def test_sandwich_and_monotonicity_on_seeded_states(rng: np.random.Generator) -> None:
    """F_min <= F <= F_max on 200 seeded states, and a-majorization orders both brackets."""
    chis = []
    for k in sorted(int(k) for k in rng.integers(1, 25, size=60)):
        chi = poisson_profile_state(k / 8)
        upper = f_max_pure(chi, tol=1e-3, backend=Backend.FLOAT64).value
        lower = f_min_pure(chi, tol=1e-3, backend=Backend.FLOAT64).value
        assert lower <= qfi_pure(chi) + 1e-3
        assert qfi_pure(chi) <= upper + 1e-3
        chis.append((upper, lower))
    for (upper_small, lower_small), (upper_big, lower_big) in zip(chis, chis[1:]):
        assert upper_big >= upper_small - 2e-3
        assert lower_big >= lower_small - 2e-3

    for _ in range(70):
        psi = random_pure_state(rng, int(rng.integers(1, 7)))
        assert f_min_pure(psi).value <= qfi_pure(psi) <= f_max_pure(psi).value

    for _ in range(35):
        p, q = feasible_pair(rng, 3)
        psi, phi = state_from_distribution(p), state_from_distribution(q)
        assert f_max_pure(psi).value >= f_max_pure(phi).value
        assert f_min_pure(psi).value >= f_min_pure(phi).value
        assert f_min_pure(psi).value <= qfi_pure(psi) <= f_max_pure(psi).value


def test_basis_state_has_zero_brackets() -> None:
    """Energy eigenstates have F_max = F_min = 0."""
    assert f_max_pure(PureState.basis(2)).value == 0.0
    assert f_min_pure(PureState.basis(2)).value == 0.0


def test_finite_profile_is_unbounded(coin_state: PureState, coin: EnergyDistribution) -> None:
    """No Poisson law a-majorizes a finite non-trivial profile, and no Poisson factor divides it."""
    upper = f_max_pure(coin_state)
    assert upper.unbounded
    assert math.isinf(upper.value)
    assert upper.kind is BoundKind.LOWER_BOUND
    assert f_max_grid_scan(coin, (0.5, 1.0, 2.0, 4.0), window=60) is None

    lower = f_min_pure(coin_state)
    assert lower.value == 0.0
    assert lower.kind is BoundKind.EXACT


def test_grid_scan_finds_smallest_feasible_lambda() -> None:
    """The scan over a grid stops at the first lambda above the profile parameter."""
    p = poisson_distribution(1)
    assert f_max_grid_scan(p, (0.5, 1.5, 1.0, 3.0), window=30) == 1.0


def test_float_profile_gives_upper_bound() -> None:
    """A float Poisson prefix yields an upper bound close to 4 lam."""
    bracket = f_max_profile(poisson_distribution(1.0, backend=Backend.FLOAT64), tol=1e-5)
    assert bracket.kind is BoundKind.UPPER_BOUND
    assert bracket.value == pytest.approx(4.0, abs=1e-3)


def test_mixed_upper_bound_finds_constant_energy_purification() -> None:
    """A diagonal rho purifies to a constant-energy state, so the bound is 0."""
    rho = DensityMatrix(matrix=np.diag([0.5, 0.3, 0.2]))
    bracket = f_max_mixed_upper(rho, anc_levels=4, restarts=0, seed=7)
    assert bracket.value == 0.0
    assert bracket.kind is BoundKind.UPPER_BOUND


def test_mixed_upper_bound_rejects_bad_parameters() -> None:
    """Ancilla levels outside [1, 8] and large systems are refused."""
    rho = DensityMatrix(matrix=np.eye(2) / 2)
    with pytest.raises(PreconditionError):
        f_max_mixed_upper(rho, anc_levels=0, restarts=0)
    with pytest.raises(PreconditionError):
        f_max_mixed_upper(DensityMatrix(matrix=np.eye(17) / 17), anc_levels=2, restarts=0)


def test_one_shot_convertibility_between_profiles() -> None:
    """chi_2 -> chi_1 is possible, chi_1 -> chi_2 is not."""
    chi_1, chi_2 = poisson_profile_state(1), poisson_profile_state(2)
    assert one_shot_convertible(chi_2, chi_1).holds
    assert not one_shot_convertible(chi_1, chi_2).holds


def test_sufficiency_gap(chi_1: PureState, coin_state: PureState) -> None:
    """A strict F_min/F_max gap certifies conversion; ties and unbounded targets do not."""
    assert sufficiency_gap_check(poisson_profile_state(3), chi_1, tol=1e-4)
    assert not sufficiency_gap_check(chi_1, chi_1, tol=1e-4)
    assert not sufficiency_gap_check(chi_1, coin_state, tol=1e-4)
