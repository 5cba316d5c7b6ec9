"""
JSON schemas for sequences, distributions, states, spectra, density matrices and channels.

Exact values travel as "p/q" strings, infinities as "inf"; output keys are sorted so equal
inputs produce byte-identical files.
"""

import json
import math
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Union

import numpy as np
from pydantic import BaseModel

from app.core.errors import PreconditionError
from app.models.channel_models import CovariantChannel, KrausBranch, KrausChannel
from app.models.sequence_models import Backend, IntSeq, default_backend
from app.models.state_models import DensityMatrix, EnergyDistribution, GeneralSpectrum, PureState
from app.utility.dists import coherence_bit, poisson_distribution, poisson_profile_state, state_from_distribution


# ---- encoding ----------------------------------------------------------------------------


def to_jsonable(value: Any) -> Any:
    # str-mixin enums are also str instances
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, complex):
        return [to_jsonable(value.real), to_jsonable(value.imag)]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, BaseModel):
        return {name: to_jsonable(getattr(value, name)) for name in type(value).model_fields}
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    raise TypeError(f"cannot encode {type(value).__name__} as JSON")


def dumps(value: Any) -> str:
    return json.dumps(to_jsonable(value), sort_keys=True, ensure_ascii=False, indent=2)


# ---- decoding ----------------------------------------------------------------------------


def _number(value: Any) -> float:
    if isinstance(value, str):
        return float(Fraction(value)) if "/" in value else float(value)
    return float(value)


def _complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)):
        return complex(_number(value[0]), _number(value[1]))
    return complex(_number(value))


def decode_seq(obj: dict) -> IntSeq:
    values = obj["values"]
    if "backend" in obj:
        backend = Backend(obj["backend"])
    elif any(isinstance(v, str) for v in values):
        backend = Backend.RATIONAL
    else:
        backend = default_backend()
    return IntSeq(offset=int(obj.get("offset", 0)), values=tuple(values), backend=backend)


def decode_distribution(obj: dict) -> EnergyDistribution:
    """{"seq": {...}, "tail_mass", "horizon"}, {"offset", "values"} or {"poisson": lam, "trunc": N}."""
    if "poisson" in obj:
        return poisson_distribution(obj["poisson"], obj.get("trunc"))
    if "seq" in obj:
        return EnergyDistribution(
            seq=decode_seq(obj["seq"]), tail_mass=_number(obj.get("tail_mass", 0.0)), horizon=obj.get("horizon")
        )
    return EnergyDistribution(seq=decode_seq(obj))


def decode_state(obj: dict) -> PureState:
    """
    One of {"poisson": lam}, {"coherence_bit": true}, {"basis": n}, {"distribution": {...},
    "phases": [...]}, {"amps": [[modulus, phase], ...]} or {"vector": [[re, im], ...]}.
    """
    if "poisson" in obj:
        return poisson_profile_state(obj["poisson"], obj.get("trunc"))
    if obj.get("coherence_bit"):
        return coherence_bit()
    if "basis" in obj:
        return PureState.basis(int(obj["basis"]))
    if "distribution" in obj:
        phases = obj.get("phases")
        return state_from_distribution(decode_distribution(obj["distribution"]), None if phases is None else np.array(phases, dtype=float))
    if "amps" in obj:
        profile = obj.get("profile")
        return PureState(
            amps=tuple((_number(m), _number(ph)) for m, ph in obj["amps"]),
            tail_mass=_number(obj.get("tail_mass", 0.0)),
            profile=None if profile is None else decode_distribution(profile),
        )
    if "vector" in obj:
        return PureState.from_vector([_complex(z) for z in obj["vector"]], tail_mass=_number(obj.get("tail_mass", 0.0)))
    raise PreconditionError("state JSON needs one of poisson, coherence_bit, basis, distribution, amps or vector")


def decode_spectrum(obj: dict) -> GeneralSpectrum:
    return GeneralSpectrum(levels=tuple((_number(e), _number(w)) for e, w in obj["levels"]), period=_number(obj["period"]))


def decode_density(obj: dict) -> DensityMatrix:
    if "state" in obj:
        return DensityMatrix.from_state(decode_state(obj["state"]), obj.get("dim"))
    matrix = [[_complex(z) for z in row] for row in obj["matrix"]]
    return DensityMatrix(matrix=matrix, energies=obj.get("energies"))


def decode_channel(obj: dict) -> Union[CovariantChannel, KrausChannel]:
    """{"in_trunc", "out_trunc"?, "kraus": [{"shift", "coeffs"}]} or {"matrices", "in_energies", "out_energies"}."""
    if "kraus" in obj:
        branches = tuple(
            KrausBranch(shift=int(b["shift"]), coeffs=tuple(_complex(c) for c in b["coeffs"])) for b in obj["kraus"]
        )
        in_trunc = int(obj["in_trunc"])
        reach = max((n - b.shift + 1 for b in branches for n, c in enumerate(b.coeffs) if c != 0), default=1)
        return CovariantChannel(branches=branches, in_trunc=in_trunc, out_trunc=int(obj.get("out_trunc", max(in_trunc, reach))))
    if "matrices" in obj:
        matrices = tuple(np.array([[_complex(z) for z in row] for row in m]) for m in obj["matrices"])
        return KrausChannel(
            matrices=matrices,
            in_energies=tuple(int(e) for e in obj["in_energies"]),
            out_energies=tuple(int(e) for e in obj["out_energies"]),
        )
    raise PreconditionError("channel JSON needs either kraus branches or matrices")


def encode_channel(channel: CovariantChannel) -> dict:
    return {
        "in_trunc": channel.in_trunc,
        "out_trunc": channel.out_trunc,
        "kraus": [{"shift": b.shift, "coeffs": to_jsonable(b.coeffs)} for b in channel.branches],
    }


def load_json(path: Union[str, Path]) -> Any:
    """Parse a UTF-8 JSON file; json.JSONDecodeError carries the line and column."""
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def load_state(path: Union[str, Path]) -> PureState:
    return decode_state(load_json(path))


def load_distribution(path: Union[str, Path]) -> EnergyDistribution:
    obj = load_json(path)
    if "distribution" in obj:
        return decode_distribution(obj["distribution"])
    if any(key in obj for key in ("amps", "vector", "basis", "coherence_bit")):
        return decode_state(obj).energy_distribution()
    return decode_distribution(obj)


def load_channel(path: Union[str, Path]) -> Union[CovariantChannel, KrausChannel]:
    return decode_channel(load_json(path))


def load_density(path: Union[str, Path]) -> DensityMatrix:
    return decode_density(load_json(path))


def load_spectrum(path: Union[str, Path]) -> GeneralSpectrum:
    return decode_spectrum(load_json(path))
