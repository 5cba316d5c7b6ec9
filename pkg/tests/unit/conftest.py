import json
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from app.models.sequence_models import Backend, IntSeq
from app.models.state_models import EnergyDistribution, PureState
from app.utility.dists import coherence_bit, poisson_profile_state, state_from_distribution


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator shared by the property checks."""
    return np.random.default_rng(20240611)


@pytest.fixture
def coin() -> EnergyDistribution:
    """Energy profile (1/2, 1/2) of a coherence bit."""
    return EnergyDistribution.of([Fraction(1, 2), Fraction(1, 2)], backend=Backend.RATIONAL)


@pytest.fixture
def binomial() -> EnergyDistribution:
    """Energy profile (1/4, 1/2, 1/4) of two coherence bits."""
    return EnergyDistribution.of([Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)], backend=Backend.RATIONAL)


@pytest.fixture
def coin_state() -> PureState:
    return coherence_bit()


@pytest.fixture
def binomial_state(binomial: EnergyDistribution) -> PureState:
    return state_from_distribution(binomial)


@pytest.fixture
def chi_1() -> PureState:
    """Poisson-profile state with lambda = 1."""
    return poisson_profile_state(1)


@pytest.fixture
def seq() -> Callable[..., IntSeq]:
    """Builds rational sequences from "p/q" strings or numbers."""

    def build(values, offset: int = 0, backend: Backend = Backend.RATIONAL) -> IntSeq:
        return IntSeq.of(values, offset=offset, backend=backend)

    return build


@pytest.fixture
def json_file(tmp_path: Path) -> Callable[[str, object], Path]:
    """Writes a JSON payload under tmp_path and returns its path."""

    def write(name: str, payload: object) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return write
