import importlib
import inspect
import pkgutil
from functools import lru_cache
from pathlib import Path
from typing import List

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Arithmetic backends
    default_backend: str = Field("rational")  # rational | f64
    neg_tol: float = Field(1e-10)
    mass_tol: float = Field(1e-9)
    float_growth_limit: float = Field(1e5)  # escalate float decisions to rationals above this

    # a-majorization window
    window_pad: int = Field(64)

    # Poisson truncation: N_trunc = lambda + sigmas * sqrt(lambda) + offset
    poisson_tail_sigmas: float = Field(12.0)
    poisson_tail_offset: int = Field(30)

    # Bisection
    default_tol: float = Field(1e-6)
    bisection_max_doublings: int = Field(20)

    # Channels
    completeness_tol: float = Field(1e-10)
    covariance_tol: float = Field(1e-9)
    covariance_samples: int = Field(4)

    # Smoothing searches
    smoothing_budget: int = Field(256)
    grid_step: float = Field(0.02)

    # Reproducibility / fan-out
    seed: int = Field(0)
    rate_workers: int = Field(1)

    # Named state families, use "*" to auto-load every family module in app/families
    families: str = Field("iid:coin,iid:poisson:1,eigen")

    # Logging
    log_dir: str = Field("logs")
    log_to_file: bool = Field(False)
    console_log_level: str = Field("WARNING")

    model_config = SettingsConfigDict(
        env_prefix="ASYMCALC_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )


settings = Settings()


def get_family_names() -> list[str]:
    return [s.strip() for s in settings.families.split(",") if s.strip()]


def _families_package_dir() -> Path:
    return Path(__file__).resolve().parent.parent / "families"


@lru_cache()
def _discover_family_class_paths() -> List[str]:
    """
    Import every module inside app.families and collect concrete BaseStateFamily subclasses.
    Cached to avoid hitting the filesystem repeatedly within the same process.
    """
    from app.core.base_family import BaseStateFamily

    family_dir = _families_package_dir()
    if not family_dir.exists():
        return []

    discovered: List[str] = []
    package_prefix = "app.families"

    for module_info in pkgutil.iter_modules([str(family_dir)]):
        if module_info.ispkg or module_info.name.startswith("_"):
            continue

        module_name = f"{package_prefix}.{module_info.name}"
        module = importlib.import_module(module_name)

        for attr_name, attr_value in inspect.getmembers(module, inspect.isclass):
            if attr_value is BaseStateFamily or inspect.isabstract(attr_value):
                continue
            if not issubclass(attr_value, BaseStateFamily):
                continue
            if attr_value.__module__ != module.__name__:
                continue
            if not getattr(attr_value, "discoverable", True):
                continue

            discovered.append(f"{module_name}.{attr_name}")

    return sorted(discovered)


def get_family_class_paths() -> list[str]:
    """
    Returns the family class paths available to the registry. If "*" is listed in
    settings.families, every family class in app/families is included.
    """
    declared = get_family_names()
    if "*" not in declared:
        return []

    # Preserve order while removing duplicates
    deduped: List[str] = []
    seen = set()
    for path in _discover_family_class_paths():
        if path in seen:
            continue
        seen.add(path)
        deduped.append(path)

    return deduped
