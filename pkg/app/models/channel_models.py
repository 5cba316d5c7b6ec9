from collections import defaultdict
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.sequence_models import Backend, IntSeq
from app.models.state_models import DensityMatrix, EnergyDistribution


def _as_complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)):
        re, im = value
        return complex(float(re), float(im))
    return complex(value)


class KrausBranch(BaseModel):
    """Ladder operator K = sum_n c_n |n - shift><n|."""

    model_config = ConfigDict(frozen=True)

    shift: int
    coeffs: tuple[complex, ...]

    @field_validator("coeffs", mode="before")
    @classmethod
    def _complex_coeffs(cls, coeffs: Any) -> tuple[complex, ...]:
        return tuple(_as_complex(c) for c in coeffs)


class CovariantChannel(BaseModel):
    """
    Channel given by fixed-shift Kraus branches on the ladder [0, in_trunc) -> [0, out_trunc).
    Completeness is checked where the channel is used, so a defective family can still be
    loaded and reported on.
    """

    model_config = ConfigDict(frozen=True)

    branches: tuple[KrausBranch, ...]
    in_trunc: int = Field(..., ge=1)
    out_trunc: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _ladder_form(self) -> "CovariantChannel":
        if not self.branches:
            raise ValueError("a channel needs at least one Kraus branch")
        for b in self.branches:
            if len(b.coeffs) > self.in_trunc:
                raise ValueError(f"branch with shift {b.shift} has more coefficients than input levels")
            for n, c in enumerate(b.coeffs):
                if c != 0 and not 0 <= n - b.shift < self.out_trunc:
                    raise ValueError(f"level {n} shifted by {b.shift} leaves the output ladder")
        return self

    @property
    def in_energies(self) -> tuple[int, ...]:
        return tuple(range(self.in_trunc))

    @property
    def out_energies(self) -> tuple[int, ...]:
        return tuple(range(self.out_trunc))

    def operators(self) -> list[np.ndarray]:
        ops = []
        for b in self.branches:
            k = np.zeros((self.out_trunc, self.in_trunc), dtype=complex)
            for n, c in enumerate(b.coeffs):
                if c != 0:
                    k[n - b.shift, n] = c
            ops.append(k)
        return ops


class KrausChannel(BaseModel):
    """Arbitrary Kraus family between two ladders with the given integer energies."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrices: tuple[np.ndarray, ...]
    in_energies: tuple[int, ...]
    out_energies: tuple[int, ...]

    @field_validator("matrices", mode="before")
    @classmethod
    def _as_arrays(cls, matrices: Any) -> tuple[np.ndarray, ...]:
        out = []
        for m in matrices:
            arr = np.array(m, dtype=complex)
            arr.setflags(write=False)
            out.append(arr)
        return tuple(out)

    @model_validator(mode="after")
    def _shapes(self) -> "KrausChannel":
        if not self.matrices:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = (len(self.out_energies), len(self.in_energies))
        for m in self.matrices:
            if m.shape != shape:
                raise ValueError(f"Kraus operator of shape {m.shape}, expected {shape}")
        return self

    def operators(self) -> list[np.ndarray]:
        return list(self.matrices)


class DilatedState(BaseModel):
    """
    Pure state on system (x) ancilla; amplitudes[i, a] multiplies |i>|a>. Energies are additive.
    A dilation of a truncated input carries the input's tail mass and horizon.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    amplitudes: np.ndarray
    sys_energies: tuple[int, ...]
    anc_energies: tuple[int, ...]
    tail_mass: float = Field(0.0, ge=0.0, le=1.0)
    horizon: Optional[int] = None

    @field_validator("amplitudes", mode="before")
    @classmethod
    def _as_matrix(cls, amplitudes: Any) -> np.ndarray:
        arr = np.array(amplitudes, dtype=complex)
        if arr.ndim != 2:
            raise ValueError("dilated amplitudes must be a system x ancilla matrix")
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _shapes(self) -> "DilatedState":
        if self.amplitudes.shape != (len(self.sys_energies), len(self.anc_energies)):
            raise ValueError("one energy per system and ancilla level is required")
        return self

    def total_energy_profile(self) -> EnergyDistribution:
        weights: dict[int, float] = defaultdict(float)
        probs = np.abs(self.amplitudes) ** 2
        for i, e_sys in enumerate(self.sys_energies):
            for a, e_anc in enumerate(self.anc_energies):
                if probs[i, a] > 0:
                    weights[e_sys + e_anc] += float(probs[i, a])
        lo, hi = min(weights), max(weights)
        seq = IntSeq(offset=lo, values=tuple(weights.get(n, 0.0) for n in range(lo, hi + 1)), backend=Backend.FLOAT64)
        return EnergyDistribution(seq=seq, tail_mass=self.tail_mass, horizon=self.horizon)

    def reduced_state(self) -> DensityMatrix:
        """System marginal, renormalized for a truncated input."""
        rho = self.amplitudes @ self.amplitudes.conj().T
        return DensityMatrix(matrix=rho / np.trace(rho).real, energies=self.sys_energies)
