from enum import Enum
from fractions import Fraction
from numbers import Integral, Rational, Real
from typing import Any, Iterable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.settings import settings


class Backend(str, Enum):
    RATIONAL = "rational"
    FLOAT64 = "f64"


def default_backend() -> Backend:
    return Backend(settings.default_backend)


def to_fraction(value: Any) -> Fraction:
    """Exact conversion; floats keep their binary value, strings accept "p/q"."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("booleans are not sequence entries")
    if isinstance(value, (Integral, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, (Real, np.floating)):
        return Fraction(float(value))
    raise TypeError(f"cannot convert {type(value).__name__} to a rational entry")


def to_float(value: Any) -> float:
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    return float(value)


class IntSeq(BaseModel):
    """
    Finitely supported real sequence over the integers.

    Entries are stored for indices [offset, offset + len(values)); leading and trailing
    exact zeros are trimmed on construction so structural equality is mathematical equality.
    The empty tuple is the all-zero sequence.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    offset: int = 0
    values: tuple[Any, ...] = Field(default_factory=tuple)
    backend: Backend = Backend.RATIONAL

    @model_validator(mode="before")
    @classmethod
    def _normalize(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        backend = Backend(data.get("backend", Backend.RATIONAL))
        raw = data.get("values", ())
        if isinstance(raw, np.ndarray):
            raw = raw.tolist()
        if backend is Backend.RATIONAL:
            vals = [to_fraction(v) for v in raw]
        else:
            vals = [to_float(v) for v in raw]
            if any(not np.isfinite(v) for v in vals):
                raise ValueError("sequence entries must be finite")

        offset = int(data.get("offset", 0))
        lo, hi = 0, len(vals)
        while lo < hi and vals[lo] == 0:
            lo += 1
        while hi > lo and vals[hi - 1] == 0:
            hi -= 1
        if lo == hi:
            return {"offset": 0, "values": (), "backend": backend}
        return {"offset": offset + lo, "values": tuple(vals[lo:hi]), "backend": backend}

    # ---- constructors ---------------------------------------------------

    @classmethod
    def of(cls, values: Iterable[Any], offset: int = 0, backend: Optional[Backend] = None) -> "IntSeq":
        return cls(offset=offset, values=tuple(values), backend=backend or default_backend())

    @classmethod
    def zero(cls, backend: Optional[Backend] = None) -> "IntSeq":
        return cls(offset=0, values=(), backend=backend or default_backend())

    @classmethod
    def delta(cls, k: int = 0, backend: Optional[Backend] = None) -> "IntSeq":
        return cls(offset=k, values=(1,), backend=backend or default_backend())

    # ---- accessors ------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.values

    @property
    def min_index(self) -> int:
        if self.is_zero:
            raise ValueError("the zero sequence has no support")
        return self.offset

    @property
    def max_index(self) -> int:
        if self.is_zero:
            raise ValueError("the zero sequence has no support")
        return self.offset + len(self.values) - 1

    @property
    def span(self) -> int:
        return len(self.values)

    def zero_value(self) -> Any:
        return Fraction(0) if self.backend is Backend.RATIONAL else 0.0

    def __getitem__(self, n: int) -> Any:
        i = n - self.offset
        if 0 <= i < len(self.values):
            return self.values[i]
        return self.zero_value()

    def window(self, lo: int, hi: int) -> list:
        """Entries for indices lo..hi inclusive."""
        return [self[n] for n in range(lo, hi + 1)]

    def items(self) -> Iterable[tuple[int, Any]]:
        for i, v in enumerate(self.values):
            if v != 0:
                yield self.offset + i, v

    def total(self) -> Any:
        return sum(self.values, self.zero_value())

    def restrict(self, lo: int, hi: int) -> "IntSeq":
        """Copy keeping only indices in [lo, hi]."""
        if hi < lo or self.is_zero:
            return IntSeq.zero(self.backend)
        lo = max(lo, self.offset)
        hi = min(hi, self.max_index)
        if hi < lo:
            return IntSeq.zero(self.backend)
        return IntSeq(offset=lo, values=self.values[lo - self.offset:hi - self.offset + 1], backend=self.backend)

    def as_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values], dtype=float)

    def to_backend(self, backend: Backend) -> "IntSeq":
        if backend is self.backend:
            return self
        return IntSeq(offset=self.offset, values=self.values, backend=backend)


class Tolerance(BaseModel):
    model_config = ConfigDict(frozen=True)

    neg_tol: float = Field(0.0, ge=0.0, allow_inf_nan=False)
    mass_tol: float = Field(0.0, ge=0.0, allow_inf_nan=False)

    @classmethod
    def for_backend(cls, backend: Backend) -> "Tolerance":
        if backend is Backend.RATIONAL:
            return cls(neg_tol=0.0, mass_tol=0.0)
        return cls(neg_tol=settings.neg_tol, mass_tol=settings.mass_tol)

    def on_backend(self, backend: Backend) -> "Tolerance":
        """The tolerance an operation on `backend` actually uses; rational arithmetic has none."""
        if backend is Backend.RATIONAL and (self.neg_tol or self.mass_tol):
            return Tolerance.for_backend(backend)
        return self

    def widened(self, extra: float) -> "Tolerance":
        return Tolerance(neg_tol=self.neg_tol + extra, mass_tol=self.mass_tol + extra)
