import math

import numpy as np
import pytest

from app.core.channels import (
    apply,
    apply_pure,
    build_conversion,
    completeness_defect,
    dephasing_channel,
    dilate,
    hadamard_channel,
    identity_channel,
    partial_trace_channel,
    phase_align_unitary,
    purification_profile_check,
    smoothing_bound,
    smoothing_witness,
    verify_covariant,
)
from app.core.errors import CertificationError, PreconditionError
from app.models.channel_models import CovariantChannel, KrausBranch
from app.models.state_models import DensityMatrix, PureState
from app.utility.dists import default_trunc, poisson_profile_state, state_from_distribution
from app.utility.ensembles import feasible_pair, random_covariant_channel, random_pure_state
from app.utility.linalg import trace_distance


def _distance_to(output: DensityMatrix, target: PureState) -> float:
    return trace_distance(np.asarray(output.matrix), np.asarray(DensityMatrix.from_state(target, output.dim).matrix))


def test_standard_channels_are_covariant() -> None:
    """Identity, dephasing and the partial trace commute with time translations."""
    assert verify_covariant(identity_channel(4))
    assert verify_covariant(dephasing_channel(4))
    assert verify_covariant(partial_trace_channel(2, (0, 1, 2)))


def test_hadamard_is_not_covariant() -> None:
    """The Hadamard gate creates coherence between energy levels."""
    assert not verify_covariant(hadamard_channel())


def test_random_ladder_channels_are_covariant(rng: np.random.Generator) -> None:
    """Fixed-shift Kraus families with per-level normalization pass both checks."""
    for _ in range(3):
        channel = random_covariant_channel(rng, 6)
        assert completeness_defect(channel) < 1e-12
        assert verify_covariant(channel, seed=3)


def test_incomplete_channel_raises() -> None:
    """A Kraus family that loses trace is a certification failure."""
    leaky = CovariantChannel(branches=(KrausBranch(shift=0, coeffs=(0.5, 0.5)),), in_trunc=2, out_trunc=2)
    assert completeness_defect(leaky) == pytest.approx(0.75)
    with pytest.raises(CertificationError):
        verify_covariant(leaky)


def test_apply_rejects_dimension_mismatch(coin_state: PureState) -> None:
    """States must match the channel input ladder."""
    with pytest.raises(PreconditionError):
        apply(identity_channel(3), DensityMatrix.from_state(coin_state))
    with pytest.raises(PreconditionError):
        apply_pure(identity_channel(1), coin_state)


def test_dephasing_removes_coherence(coin_state: PureState) -> None:
    """Dephasing the coherence bit gives the maximally mixed qubit."""
    out = apply_pure(dephasing_channel(2), coin_state)
    assert np.allclose(out.matrix, np.eye(2) / 2)


def test_conversion_binomial_to_coin(binomial_state: PureState, coin_state: PureState) -> None:
    """Two coherence bits convert to one through the witness (1/2, 1/2)."""
    channel = build_conversion(binomial_state, coin_state)
    assert sorted(b.shift for b in channel.branches) == [0, 1]
    assert completeness_defect(channel) < 1e-12
    assert verify_covariant(channel)
    assert _distance_to(apply_pure(channel, binomial_state), coin_state) <= 1e-9


def test_conversion_on_feasible_pairs(rng: np.random.Generator) -> None:
    """Every a-majorizing pair yields a covariant channel hitting the target."""
    for _ in range(200):
        p, q = feasible_pair(rng, 4)
        psi, phi = state_from_distribution(p), state_from_distribution(q)
        channel = build_conversion(psi, phi)
        assert completeness_defect(channel) < 1e-10
        assert _distance_to(apply_pure(channel, psi), phi) <= 1e-9


def test_conversion_between_poisson_profiles() -> None:
    """chi_2 -> chi_1 on the truncated ladder."""
    chi_2, chi_1 = poisson_profile_state(2), poisson_profile_state(1)
    channel = build_conversion(chi_2, chi_1)
    assert completeness_defect(channel) < 1e-10
    assert _distance_to(apply_pure(channel, chi_2), chi_1) <= 1e-9


def test_conversion_refuses_infeasible_or_phased_inputs(
    coin_state: PureState, binomial_state: PureState, rng: np.random.Generator
) -> None:
    """No channel without a-majorization, and phases must be aligned first."""
    with pytest.raises(PreconditionError):
        build_conversion(coin_state, binomial_state)
    with pytest.raises(PreconditionError):
        build_conversion(random_pure_state(rng, 3), coin_state)


def test_phase_alignment(coin_state: PureState, rng: np.random.Generator) -> None:
    """Phase alignment undoes relative phases and respects the profile bound."""
    alignment = phase_align_unitary(coin_state, PureState.basis(0))
    assert alignment.achieved_distance == pytest.approx(1 / math.sqrt(2))
    assert alignment.bound == pytest.approx(1.0)
    assert alignment.achieved_distance <= alignment.bound

    psi = random_pure_state(rng, 4)
    flat = PureState(amps=tuple((m, 0.0) for m, _ in psi.amps))
    aligned = phase_align_unitary(psi, flat)
    assert aligned.overlap == pytest.approx(1.0)
    assert aligned.achieved_distance == pytest.approx(0.0, abs=1e-6)


def test_dilation_conserves_total_energy(binomial_state: PureState, coin_state: PureState) -> None:
    """The Stinespring state of a conversion has the input profile as total-energy profile."""
    channel = build_conversion(binomial_state, coin_state)
    dilated = dilate(channel, binomial_state)
    profile = dilated.total_energy_profile()
    assert [profile[n] for n in range(3)] == pytest.approx([0.25, 0.5, 0.25])
    reduced = dilated.reduced_state()
    assert _distance_to(reduced, coin_state) <= 1e-9


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_purification_profile_check(lam: float, rng: np.random.Generator) -> None:
    """Dilations of covariant channels on chi_lam keep the P_lam total-energy profile."""
    levels = default_trunc(2.0) + 15
    channels = [identity_channel(levels), dephasing_channel(levels)]
    channels += [random_covariant_channel(rng, levels) for _ in range(100)]
    for channel in channels:
        _, ok = purification_profile_check(channel, lam)
        assert ok


def test_purification_profile_check_needs_long_input() -> None:
    """The channel must cover the Poisson truncation."""
    with pytest.raises(PreconditionError):
        purification_profile_check(identity_channel(10), 1.0)


def test_smoothing_bound_values() -> None:
    """f(0) = 0, f(0.02) = sqrt(2 sqrt(0.0396)) and f never exceeds 2 eps^(1/4)."""
    assert smoothing_bound(0.0) == 0.0
    assert smoothing_bound(0.02) == pytest.approx(math.sqrt(2 * math.sqrt(0.0396)), rel=1e-12)
    assert smoothing_bound(0.02) == pytest.approx(0.63087, abs=1e-5)
    for eps in (1e-6, 1e-3, 0.1, 0.5, 1.0):
        assert smoothing_bound(eps) <= 2 * eps**0.25


def test_smoothing_witness_of_exact_conversion(binomial_state: PureState, coin_state: PureState) -> None:
    """An exact converter gives eps = 0, psi' = psi and the witness (1/2, 1/2)."""
    witness = smoothing_witness(binomial_state, coin_state, build_conversion(binomial_state, coin_state))
    assert witness.eps == pytest.approx(0.0, abs=1e-9)
    assert witness.dist == 0.0
    assert witness.majorizes
    assert [float(witness.witness[k]) for k in (0, 1)] == [0.5, 0.5]


def test_smoothing_witness_near_targets(rng: np.random.Generator) -> None:
    """Perturbed targets give a nearby psi' that a-majorizes phi within the smoothing bound."""
    for _ in range(100):
        p, q = feasible_pair(rng, 3)
        psi, phi = state_from_distribution(p), state_from_distribution(q)
        channel = build_conversion(psi, phi)
        noisy = phi.vector() + 0.05 * (rng.normal(size=phi.n_trunc) + 1j * rng.normal(size=phi.n_trunc))
        target = PureState.from_vector(noisy / np.linalg.norm(noisy))
        witness = smoothing_witness(psi, target, channel)
        assert witness.majorizes
        assert witness.dist <= witness.bound + 1e-9
        assert witness.dist <= 2 * witness.eps**0.25 + 1e-9


def test_smoothing_witness_random_triples(rng: np.random.Generator) -> None:
    """The bound holds for arbitrary covariant channels and targets."""
    for _ in range(100):
        channel = random_covariant_channel(rng, 6)
        psi, phi = random_pure_state(rng, 5), random_pure_state(rng, 4)
        witness = smoothing_witness(psi, phi, channel)
        assert witness.majorizes
        assert witness.dist <= witness.bound + 1e-9
