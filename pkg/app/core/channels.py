"""
Covariant channels as explicit Kraus families: checks, exact conversion channels built from
a-majorization witnesses, phase alignment, dilations and the smoothing-witness construction.
"""

import math
from collections import defaultdict
from typing import Optional, Union

import numpy as np

from app.core.amajor import a_majorizes
from app.core.errors import CertificationError, PreconditionError
from app.core.logger import get_certification_logger, get_channels_logger
from app.core.settings import settings
from app.models.channel_models import CovariantChannel, DilatedState, KrausBranch, KrausChannel
from app.models.result_models import PhaseAlignment, SmoothingWitness
from app.models.sequence_models import Backend, IntSeq, default_backend
from app.models.state_models import RATIONALIZE_DENOMINATOR, DensityMatrix, EnergyDistribution, PureState
from app.utility import seqcore
from app.utility.dists import (
    default_trunc,
    distribution_tv,
    poisson_distribution,
    poisson_profile_state,
    state_from_distribution,
)
from app.utility.linalg import evolve, pad_matrix, random_density_matrix, trace_distance

logger = get_channels_logger()
certification_logger = get_certification_logger()

Channel = Union[CovariantChannel, KrausChannel]

SAMPLE_TIMES = (0.1, 0.7, math.pi, 2.3)
FLOAT_SUPPORT_FLOOR = 1e-14
PROFILE_TV_TOL = 1e-10
MARGINAL_TOL = 1e-9


# ---- basic channels ----------------------------------------------------------------


def identity_channel(n_trunc: int) -> CovariantChannel:
    return CovariantChannel(branches=(KrausBranch(shift=0, coeffs=(1.0,) * n_trunc),), in_trunc=n_trunc, out_trunc=n_trunc)


def dephasing_channel(n_trunc: int) -> CovariantChannel:
    """Complete dephasing in the energy basis: one projector |n><n| per level."""
    branches = tuple(
        KrausBranch(shift=0, coeffs=tuple(1.0 if m == n else 0.0 for m in range(n_trunc))) for n in range(n_trunc)
    )
    return CovariantChannel(branches=branches, in_trunc=n_trunc, out_trunc=n_trunc)


def hadamard_channel() -> KrausChannel:
    """Unitary Hadamard on levels {0, 1}; creates coherence, so it is not covariant."""
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    return KrausChannel(matrices=(h,), in_energies=(0, 1), out_energies=(0, 1))


def partial_trace_channel(sys_levels: int, anc_energies: tuple[int, ...]) -> KrausChannel:
    """
    Tr_A on system (x) ancilla, the joint level (s, a) sitting at index s * len(anc) + a with
    energy s + anc_energies[a]. K_b = 1 (x) <b| lowers the energy by anc_energies[b].
    """
    if sys_levels < 1 or not anc_energies:
        raise PreconditionError("partial trace needs a nonempty system and ancilla")
    anc = len(anc_energies)
    in_energies = tuple(s + e for s in range(sys_levels) for e in anc_energies)
    matrices = []
    for b in range(anc):
        k = np.zeros((sys_levels, sys_levels * anc))
        for s in range(sys_levels):
            k[s, s * anc + b] = 1.0
        matrices.append(k)
    return KrausChannel(matrices=tuple(matrices), in_energies=in_energies, out_energies=tuple(range(sys_levels)))


# ---- checks ------------------------------------------------------------------------------


def kraus_operators(channel: Channel) -> list[np.ndarray]:
    return channel.operators()


def completeness_defect(channel: Channel) -> float:
    """max |sum_K K^dag K - 1| entrywise."""
    ops = kraus_operators(channel)
    total = sum(k.conj().T @ k for k in ops)
    return float(np.max(np.abs(total - np.eye(total.shape[0]))))


def _require_complete(channel: Channel) -> None:
    defect = completeness_defect(channel)
    if defect > settings.completeness_tol:
        certification_logger.error(f"❌ KRAUS | completeness defect={defect:.3e} tol={settings.completeness_tol:g}")
        raise CertificationError(f"Kraus completeness violated by {defect:.3e}")


def _structural_covariance(channel: Channel) -> bool:
    """Every Kraus operator changes energy by one fixed amount."""
    out_e = np.asarray(channel.out_energies)
    in_e = np.asarray(channel.in_energies)
    for k in kraus_operators(channel):
        rows, cols = np.nonzero(np.abs(k) > 0)
        if len(set((out_e[rows] - in_e[cols]).tolist())) > 1:
            return False
    return True


def _apply_matrix(channel: Channel, rho: np.ndarray) -> np.ndarray:
    return sum(k @ rho @ k.conj().T for k in kraus_operators(channel))


def _sampled_covariance(channel: Channel, samples: int, rng: np.random.Generator) -> bool:
    dim = len(channel.in_energies)
    worst = 0.0
    for _ in range(samples):
        rho = random_density_matrix(rng, dim)
        out = _apply_matrix(channel, rho)
        for t in SAMPLE_TIMES:
            lhs = _apply_matrix(channel, evolve(rho, channel.in_energies, t))
            rhs = evolve(out, channel.out_energies, t)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst <= settings.covariance_tol


def verify_covariant(channel: Channel, samples: Optional[int] = None, seed: Optional[int] = None) -> bool:
    """
    E(U_t rho U_t^dag) = U_t E(rho) U_t^dag, checked structurally (fixed-shift Kraus operators)
    and on seeded random states at the sample times. A structural pass is authoritative; a
    Kraus family that mixes shifts falls back to the sampled verdict.
    """
    _require_complete(channel)
    samples = samples or settings.covariance_samples
    rng = np.random.default_rng(settings.seed if seed is None else seed)
    structural = _structural_covariance(channel)
    sampled = _sampled_covariance(channel, samples, rng)

    if structural and not sampled:
        certification_logger.error("❌ COVARIANCE | structural certificate holds but the sampled check fails")
        raise CertificationError("sampled covariance check contradicts the structural certificate")
    if structural != sampled:
        logger.info(f"🔀 COVARIANCE | structural={structural} sampled={sampled}, using the sampled verdict")
    verdict = structural or sampled
    certification_logger.info(f"🔎 COVARIANCE | holds={verdict} structural={structural} samples={samples}")
    return verdict


# ---- application ---------------------------------------------------------------------


def apply(channel: Channel, rho: DensityMatrix) -> DensityMatrix:
    """sum_K K rho K^dag."""
    if rho.dim != len(channel.in_energies):
        raise PreconditionError(f"state of dimension {rho.dim} does not match channel input {len(channel.in_energies)}")
    _require_complete(channel)
    out = _apply_matrix(channel, np.asarray(rho.matrix))
    out = (out + out.conj().T) / 2
    return DensityMatrix(matrix=out, energies=channel.out_energies)


def apply_pure(channel: Channel, psi: PureState) -> DensityMatrix:
    dim = len(channel.in_energies)
    if psi.n_trunc > dim:
        raise PreconditionError(f"state on {psi.n_trunc} levels does not fit the channel input {dim}")
    return apply(channel, DensityMatrix.from_state(psi, dim))


def _padded_density(psi: PureState, dim: int) -> np.ndarray:
    rho = DensityMatrix.from_state(psi).matrix
    return pad_matrix(np.asarray(rho), dim) if rho.shape[0] < dim else np.asarray(rho)[:dim, :dim]


# ---- conversion channels --------------------------------------------------------------


def _supported(value, backend: Backend) -> bool:
    return value > 0 if backend is Backend.RATIONAL else float(value) >= FLOAT_SUPPORT_FLOOR


def build_conversion(psi: PureState, phi: PureState, backend: Optional[Backend] = None) -> CovariantChannel:
    """
    Covariant channel with E(psi) = phi from the witness w of p_psi >_a p_phi:
    K_k |n> = sqrt(w(k) p_phi(n - k) / p_psi(n)) |n - k>. Levels outside the support of
    p_psi are measured and reset to |0>. On a truncated window the coefficients are
    renormalized per level so the family stays trace preserving.
    """
    if not (psi.has_zero_phases and phi.has_zero_phases):
        raise PreconditionError("conversion channels need zero-phase states; align phases first")
    backend = backend or default_backend()
    p, q = psi.energy_distribution(backend), phi.energy_distribution(backend)
    verdict = a_majorizes(p, q, backend=backend)
    if not verdict.holds:
        raise PreconditionError("p_psi does not a-majorize p_phi: no covariant conversion exists")
    w = verdict.witness

    in_trunc = max(psi.n_trunc, p.seq.max_index + 1)
    coeffs: dict[int, dict[int, complex]] = defaultdict(dict)
    reset = 0
    for n in range(in_trunc):
        p_n = p[n]
        terms = {k: w[k] * q[n - k] for k in range(w.min_index, min(w.max_index, n - q.n_star) + 1)}
        terms = {k: v for k, v in terms.items() if v > 0}
        s_n = sum(terms.values(), p.seq.zero_value())
        if not _supported(p_n, backend) or not _supported(s_n, backend):
            if _supported(p_n, backend):
                logger.warning(f"⚠️ CONVERT | level {n} outside the checked window, reset to |0>")
            coeffs[n][n] = 1.0
            reset += 1
            continue
        for k, v in terms.items():
            coeffs[k][n] = complex(math.sqrt(float(v / s_n)))

    out_trunc = max(phi.n_trunc, max(n - k for k, levels in coeffs.items() for n in levels) + 1)
    branches = tuple(
        KrausBranch(shift=k, coeffs=tuple(coeffs[k].get(n, 0.0) for n in range(in_trunc))) for k in sorted(coeffs)
    )
    channel = CovariantChannel(branches=branches, in_trunc=in_trunc, out_trunc=out_trunc)
    logger.info(
        f"🔧 CONVERT | branches={len(branches)} in={in_trunc} out={out_trunc} reset_levels={reset} "
        f"witness=[{w.min_index},{w.max_index}]"
    )
    return channel


def phase_align_unitary(psi: PureState, phi: PureState) -> PhaseAlignment:
    """Diagonal (hence covariant) U with phases theta_phi - theta_psi, maximizing |<phi|U psi>|."""
    dim = max(psi.n_trunc, phi.n_trunc)
    a, b = psi.vector(dim), phi.vector(dim)
    phases = np.zeros(dim)
    phases[: psi.n_trunc] -= psi.phases()
    phases[: phi.n_trunc] += phi.phases()
    phases = np.mod(phases, 2.0 * math.pi)
    overlap = float(min(1.0, abs(np.vdot(b, np.exp(1j * phases) * a))))
    p = psi.energy_distribution(Backend.FLOAT64)
    q = phi.energy_distribution(Backend.FLOAT64)
    return PhaseAlignment(
        phases=tuple(float(x) for x in phases),
        achieved_distance=math.sqrt(max(0.0, 1.0 - overlap**2)),
        overlap=overlap,
        bound=math.sqrt(2.0 * distribution_tv(p, q)),
    )


# ---- dilations --------------------------------------------------------------------------


def dilate(channel: CovariantChannel, psi: PureState) -> DilatedState:
    """V psi with V|n> = sum_b c_n^(b) |n - k_b>|b>, ancilla level b carrying energy k_b."""
    if psi.n_trunc > channel.in_trunc:
        raise PreconditionError("state does not fit the channel input")
    vec = psi.vector(channel.in_trunc)
    amps = np.zeros((channel.out_trunc, len(channel.branches)), dtype=complex)
    for b, branch in enumerate(channel.branches):
        for n, c in enumerate(branch.coeffs):
            if c != 0:
                amps[n - branch.shift, b] += c * vec[n]
    horizon = channel.in_trunc - 1 if psi.tail_mass > 0 else None
    return DilatedState(
        amplitudes=amps,
        sys_energies=channel.out_energies,
        anc_energies=tuple(b.shift for b in channel.branches),
        tail_mass=psi.tail_mass,
        horizon=horizon,
    )


def purification_profile_check(channel: CovariantChannel, lam: float) -> tuple[DilatedState, bool]:
    """
    Dilate E on chi_lam with a zero-energy ancilla start. The dilation conserves total energy,
    so the total-energy profile of V chi_lam must equal P_lam while its system marginal is E(chi_lam).
    """
    if channel.in_trunc < default_trunc(lam):
        raise PreconditionError(f"channel input {channel.in_trunc} is shorter than the truncation {default_trunc(lam)} of chi_{lam:g}")
    chi = poisson_profile_state(lam, channel.in_trunc)
    dilated = dilate(channel, chi)

    reference = poisson_distribution(lam, channel.in_trunc, Backend.FLOAT64)
    d_tv = distribution_tv(dilated.total_energy_profile(), reference)
    marginal = trace_distance(np.asarray(dilated.reduced_state().matrix), np.asarray(apply_pure(channel, chi).matrix))
    ok = d_tv <= PROFILE_TV_TOL and marginal <= MARGINAL_TOL
    certification_logger.info(f"🔎 DILATION | lam={lam:g} ok={ok} d_tv={d_tv:.3e} marginal={marginal:.3e}")
    return dilated, ok


# ---- smoothing witness ------------------------------------------------------------------


def smoothing_bound(eps: float) -> float:
    """sqrt(2 sqrt(1 - (1 - eps)^2))."""
    return math.sqrt(2.0 * math.sqrt(max(0.0, 1.0 - (1.0 - eps) ** 2)))


def smoothing_witness(psi: PureState, phi: PureState, channel: CovariantChannel) -> SmoothingWitness:
    """
    From a covariant E with D(E(psi), phi) = eps, read off w(k) = sum_{branches at k} |K psi|^2
    and return psi' with profile w * p_phi and the phases of psi: p_psi' >_a p_phi by construction
    and D(psi, psi') <= sqrt(2 sqrt(1 - (1 - eps)^2)).
    """
    if psi.n_trunc > channel.in_trunc:
        raise PreconditionError("state does not fit the channel input")
    output = apply_pure(channel, psi)
    eps = trace_distance(np.asarray(output.matrix), _padded_density(phi, output.dim))
    if eps > 1.0 + 1e-12:
        raise PreconditionError(f"trace distance {eps:g} exceeds 1")
    eps = min(eps, 1.0)

    vec = psi.vector(channel.in_trunc)
    weights: dict[int, float] = defaultdict(float)
    for branch, k_op in zip(channel.branches, kraus_operators(channel)):
        weights[branch.shift] += float(np.linalg.norm(k_op @ vec) ** 2)
    lo, hi = min(weights), max(weights)
    w = IntSeq(offset=lo, values=tuple(weights.get(k, 0.0) for k in range(lo, hi + 1)), backend=Backend.FLOAT64)
    w = seqcore.rationalize(w, RATIONALIZE_DENOMINATOR)
    w = IntSeq(offset=w.offset, values=tuple(v / w.total() for v in w.values), backend=Backend.RATIONAL)

    p_phi = phi.energy_distribution(Backend.RATIONAL)
    if w.min_index + p_phi.n_star < 0:
        raise PreconditionError("witness shifts p_phi below zero energy")
    q_seq = seqcore.convolve(w, p_phi.seq)
    if p_phi.truncated:
        horizon = p_phi.horizon + w.min_index
        q_seq = q_seq.restrict(q_seq.min_index, horizon)
        q = EnergyDistribution(seq=q_seq, tail_mass=max(0.0, 1.0 - float(q_seq.total())), horizon=horizon)
    else:
        q = EnergyDistribution(seq=q_seq)

    phases = np.zeros(q.seq.max_index + 1)
    span = min(len(phases), psi.n_trunc)
    phases[:span] = psi.phases()[:span]
    psi_prime = state_from_distribution(q, phases)

    p_psi = psi.energy_distribution(Backend.RATIONAL)
    if not p_psi.truncated and not q.truncated and seqcore.tv_distance(p_psi.seq, q.seq) == 0:
        dist = 0.0
    else:
        dim = max(psi.n_trunc, psi_prime.n_trunc)
        overlap = min(1.0, abs(np.vdot(psi.vector(dim), psi_prime.vector(dim))))
        dist = math.sqrt(max(0.0, 1.0 - overlap**2))

    majorizes = a_majorizes(q, p_phi, backend=Backend.RATIONAL).holds
    bound = smoothing_bound(eps)
    certification_logger.info(
        f"🔎 SMOOTH WITNESS | eps={eps:.3e} dist={dist:.3e} bound={bound:.3e} majorizes={majorizes}"
    )
    return SmoothingWitness(state=psi_prime, dist=dist, eps=eps, bound=bound, witness=w, majorizes=majorizes)
