import math
from enum import Enum
from fractions import Fraction
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.settings import settings
from app.models.sequence_models import Backend, IntSeq, to_fraction

TWO_PI = 2.0 * math.pi
RATIONALIZE_DENOMINATOR = 10**12


class EnergyDistribution(BaseModel):
    """
    Probability mass per integer energy level.

    A distribution with infinite support is stored as a prefix: `horizon` is the last
    index whose entry is exact and `tail_mass` the probability left out beyond it.
    Finite distributions have no horizon and zero tail.
    """

    model_config = ConfigDict(frozen=True)

    seq: IntSeq
    tail_mass: float = Field(0.0, ge=0.0, le=1.0)
    horizon: Optional[int] = None

    @field_validator("seq")
    @classmethod
    def _clamp_noise(cls, seq: IntSeq) -> IntSeq:
        if seq.is_zero:
            raise ValueError("an energy distribution needs nonempty support")
        if seq.backend is Backend.RATIONAL:
            if any(v < 0 for v in seq.values):
                raise ValueError("negative probability on the rational backend")
            return seq
        low = min(seq.values)
        if low < -settings.neg_tol:
            raise ValueError(f"negative probability {low:.3e} beyond neg_tol")
        if low < 0:
            seq = IntSeq(offset=seq.offset, values=tuple(max(v, 0.0) for v in seq.values), backend=seq.backend)
        return seq

    @model_validator(mode="after")
    def _check_mass(self) -> "EnergyDistribution":
        if self.seq.offset < 0:
            raise ValueError("energy levels must be nonnegative")
        total = self.seq.total()
        if self.seq.backend is Backend.RATIONAL and self.horizon is None and self.tail_mass == 0:
            if total != 1:
                raise ValueError(f"total mass {total} is not exactly 1")
        elif abs(float(total) + self.tail_mass - 1.0) > settings.mass_tol:
            raise ValueError(f"total mass {float(total) + self.tail_mass:.12f} deviates from 1")
        if self.horizon is not None and self.horizon < self.seq.max_index:
            raise ValueError("horizon lies inside the stored support")
        return self

    # ---- constructors ---------------------------------------------------

    @classmethod
    def of(cls, values, offset: int = 0, backend: Optional[Backend] = None) -> "EnergyDistribution":
        return cls(seq=IntSeq.of(values, offset=offset, backend=backend))

    @classmethod
    def point(cls, n: int = 0, backend: Optional[Backend] = None) -> "EnergyDistribution":
        return cls(seq=IntSeq.delta(n, backend))

    # ---- properties -----------------------------------------------------

    @property
    def backend(self) -> Backend:
        return self.seq.backend

    @property
    def truncated(self) -> bool:
        return self.horizon is not None

    @property
    def exact_until(self) -> float:
        """Last index whose entry is known exactly (+inf for finite distributions)."""
        return math.inf if self.horizon is None else self.horizon

    @property
    def n_star(self) -> int:
        return self.seq.min_index

    @property
    def is_point_mass(self) -> bool:
        return not self.truncated and self.seq.span == 1

    def __getitem__(self, n: int) -> Any:
        return self.seq[n]

    def mean(self) -> Any:
        total = self.seq.total()
        return sum((n * v for n, v in self.seq.items()), self.seq.zero_value()) / total

    def variance(self) -> Any:
        total = self.seq.total()
        mu = self.mean()
        return sum(((n - mu) ** 2 * v for n, v in self.seq.items()), self.seq.zero_value()) / total

    def probabilities(self) -> np.ndarray:
        return self.seq.as_array()

    def to_backend(self, backend: Backend) -> "EnergyDistribution":
        """
        Convert between backends. Finite float distributions are rationalized with a bounded
        denominator and renormalized exactly; truncated prefixes keep their binary values.
        """
        if backend is self.backend:
            return self
        if backend is Backend.FLOAT64:
            return EnergyDistribution(seq=self.seq.to_backend(backend), tail_mass=self.tail_mass, horizon=self.horizon)
        if self.truncated:
            return EnergyDistribution(seq=self.seq.to_backend(backend), tail_mass=self.tail_mass, horizon=self.horizon)
        vals = [to_fraction(v).limit_denominator(RATIONALIZE_DENOMINATOR) for v in self.seq.values]
        total = sum(vals, Fraction(0))
        return EnergyDistribution(seq=IntSeq(offset=self.seq.offset, values=tuple(v / total for v in vals), backend=backend))


class PureState(BaseModel):
    """
    Pure state on the truncated ladder [0, n_trunc): one (modulus, phase) pair per level.

    `profile` optionally carries the exact energy distribution (for instance the rational
    Poisson prefix of a Poisson-profile state); otherwise the squared moduli are used.
    """

    model_config = ConfigDict(frozen=True)

    amps: tuple[tuple[float, float], ...]
    tail_mass: float = Field(0.0, ge=0.0, le=1.0)
    profile: Optional[EnergyDistribution] = None

    @field_validator("amps", mode="before")
    @classmethod
    def _canonical_amps(cls, amps: Any) -> Any:
        out = []
        for pair in amps:
            modulus, phase = float(pair[0]), float(pair[1])
            if modulus < 0 or not math.isfinite(modulus) or not math.isfinite(phase):
                raise ValueError("moduli must be finite and nonnegative")
            out.append((modulus, phase % TWO_PI if modulus > 0 else 0.0))
        if not out:
            raise ValueError("a state needs at least one level")
        return tuple(out)

    @model_validator(mode="after")
    def _check_norm(self) -> "PureState":
        norm = sum(m * m for m, _ in self.amps) + self.tail_mass
        if abs(norm - 1.0) > settings.mass_tol:
            raise ValueError(f"state norm {norm:.12f} deviates from 1")
        return self

    @classmethod
    def from_vector(cls, vec, tail_mass: float = 0.0, profile: Optional[EnergyDistribution] = None) -> "PureState":
        vec = np.asarray(vec, dtype=complex)
        return cls(amps=tuple((float(abs(z)), float(np.angle(z))) for z in vec), tail_mass=tail_mass, profile=profile)

    @classmethod
    def basis(cls, n: int) -> "PureState":
        """Energy eigenstate |n>."""
        return cls(amps=tuple((1.0 if i == n else 0.0, 0.0) for i in range(n + 1)))

    @property
    def n_trunc(self) -> int:
        return len(self.amps)

    @property
    def has_zero_phases(self) -> bool:
        return all(min(phase, TWO_PI - phase) < 1e-12 for _, phase in self.amps)

    def vector(self, dim: Optional[int] = None) -> np.ndarray:
        dim = dim or self.n_trunc
        if dim < self.n_trunc:
            raise ValueError("target dimension smaller than the state truncation")
        out = np.zeros(dim, dtype=complex)
        for n, (modulus, phase) in enumerate(self.amps):
            out[n] = modulus * np.exp(1j * phase)
        return out

    def phases(self) -> np.ndarray:
        return np.array([phase for _, phase in self.amps], dtype=float)

    def energy_distribution(self, backend: Optional[Backend] = None) -> EnergyDistribution:
        """p_psi(n) = |<n|psi>|^2, or the exact profile when one is attached."""
        backend = backend or Backend(settings.default_backend)
        if self.profile is not None:
            return self.profile.to_backend(backend)
        probs = [m * m for m, _ in self.amps]
        horizon = self.n_trunc - 1 if self.tail_mass > 0 else None
        dist = EnergyDistribution(
            seq=IntSeq(offset=0, values=tuple(probs), backend=Backend.FLOAT64),
            tail_mass=self.tail_mass,
            horizon=horizon,
        )
        return dist.to_backend(backend)


class GeneralSpectrum(BaseModel):
    """Weights on arbitrary real energy levels of a system with period tau."""

    model_config = ConfigDict(frozen=True)

    levels: tuple[tuple[float, float], ...]
    period: float = Field(..., gt=0.0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _check_weights(self) -> "GeneralSpectrum":
        if not self.levels:
            raise ValueError("a spectrum needs at least one level")
        if any(w < 0 for _, w in self.levels):
            raise ValueError("level weights must be nonnegative")
        total = sum(w for _, w in self.levels)
        if abs(total - 1.0) > settings.mass_tol:
            raise ValueError(f"level weights sum to {total:.12f}")
        return self


class DensityMatrix(BaseModel):
    """Density matrix on levels with integer energies (default: energy n on basis index n)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray
    energies: tuple[int, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def _as_matrix(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        mat = np.array(data.get("matrix"), dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("density matrix must be square")
        mat.setflags(write=False)
        energies = tuple(int(e) for e in (data.get("energies") or range(mat.shape[0])))
        return {"matrix": mat, "energies": energies}

    @model_validator(mode="after")
    def _check_state(self) -> "DensityMatrix":
        mat = self.matrix
        if len(self.energies) != mat.shape[0]:
            raise ValueError("one energy per basis level is required")
        if np.max(np.abs(mat - mat.conj().T)) > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > settings.mass_tol:
            raise ValueError(f"trace {np.trace(mat).real:.12f} deviates from 1")
        if np.min(np.linalg.eigvalsh(mat)) < -1e-12:
            raise ValueError("density matrix is not positive semidefinite")
        return self

    @classmethod
    def from_state(cls, state: PureState, dim: Optional[int] = None) -> "DensityMatrix":
        vec = state.vector(dim)
        # Poisson-profile states drop a tail of mass state.tail_mass
        vec = vec / np.linalg.norm(vec)
        return cls(matrix=np.outer(vec, vec.conj()))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def hamiltonian(self) -> np.ndarray:
        return np.diag(np.array(self.energies, dtype=float))


class BarbourParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    a: float = Field(..., gt=0.0)
    b: float = Field(..., gt=0.0)
    c: float = Field(..., ge=0.0, allow_inf_nan=False)


class FamilyKind(str, Enum):
    IID = "iid"
    CUSTOM = "custom"


class SchmidtVector(BaseModel):
    """Squared Schmidt coefficients, kept in nonincreasing order."""

    model_config = ConfigDict(frozen=True)

    probs: tuple[float, ...]

    @field_validator("probs", mode="before")
    @classmethod
    def _sorted(cls, probs: Any) -> tuple[float, ...]:
        values = sorted((float(v) for v in probs), reverse=True)
        if not values:
            raise ValueError("a Schmidt vector needs at least one coefficient")
        if values[-1] < -settings.neg_tol:
            raise ValueError("Schmidt weights must be nonnegative")
        if abs(sum(values) - 1.0) > settings.mass_tol:
            raise ValueError(f"Schmidt weights sum to {sum(values):.12f}")
        return tuple(max(v, 0.0) for v in values)

    @classmethod
    def from_coefficients(cls, amplitudes) -> "SchmidtVector":
        """From the coefficient matrix psi[i, j] of sum_ij psi_ij |i>|j>."""
        singular = np.linalg.svd(np.atleast_2d(np.asarray(amplitudes, dtype=complex)), compute_uv=False)
        weights = singular**2
        return cls(probs=tuple(weights / weights.sum()))

    def padded(self, length: int) -> np.ndarray:
        if length < len(self.probs):
            raise ValueError("cannot pad to a shorter length")
        return np.concatenate([np.array(self.probs), np.zeros(length - len(self.probs))])
