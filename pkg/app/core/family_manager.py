import importlib
from typing import Any, Dict, List, Optional

from app.core.base_family import BaseStateFamily
from app.core.errors import PreconditionError
from app.core.logger import get_spectra_logger
from app.core.settings import get_family_class_paths, get_family_names
from app.models.result_models import RateDirection, RateEstimate

logger = get_spectra_logger()


def _load_family_class(dotted_path: str):
    module_path, class_name = dotted_path.rsplit(".", 1)
    module = importlib.import_module(module_path)
    return getattr(module, class_name)


def resolve_family(spec: str) -> BaseStateFamily:
    """
    Named families: "iid:coin", "iid:poisson:<lam>", "eigen", "manifest:<path>", or a dotted
    class path such as "app.families.eigen.EigenFamily".
    """
    from app.families import CoinIidFamily, EigenFamily, ManifestFamily, PoissonFamily

    spec = spec.strip()
    if spec == "iid:coin":
        return CoinIidFamily()
    if spec.startswith("iid:poisson:"):
        try:
            lam = float(spec.rsplit(":", 1)[1])
        except ValueError as e:
            raise PreconditionError(f"bad Poisson parameter in family {spec!r}") from e
        return PoissonFamily(lam)
    if spec == "eigen":
        return EigenFamily()
    if spec.startswith("manifest:"):
        return ManifestFamily(spec.split(":", 1)[1])
    if "." in spec:
        return _load_family_class(spec)()
    raise PreconditionError(f"unknown family {spec!r}")


class FamilyManager:
    """
    FamilyManager class
    Responsible for collecting state families and m-grids for batch rate estimation.
    """

    def __init__(self):
        self._family_specs: List[str] = []
        self._ms: List[int] = []

    def add_families(self, specs: List[str]) -> None:
        self._family_specs.extend(specs)

    def add_ms(self, ms: List[int]) -> None:
        self._ms.extend(ms)

    def add_configured_families(self) -> None:
        """Families from settings.families; "*" adds every discoverable family class."""
        self.add_families([name for name in get_family_names() if name != "*"])
        self.add_families(get_family_class_paths())

    def families(self) -> List[BaseStateFamily]:
        seen: Dict[str, BaseStateFamily] = {}
        for spec in self._family_specs:
            if spec not in seen:
                seen[spec] = resolve_family(spec)
        return list(seen.values())

    def run_rates(
        self, eps: float, direction: RateDirection, budget: Optional[int] = None, workers: Optional[int] = None
    ) -> Dict[str, RateEstimate]:
        from app.core.spectra import spectral_rate

        if not self._ms:
            raise PreconditionError("no m values registered")
        results: Dict[str, RateEstimate] = {}
        families = self.families()
        for number, family in enumerate(families, 1):
            logger.info(f"📊 RATE {number}/{len(families)} | family={family.name} ms={self._ms}")
            results[family.name] = spectral_rate(family, eps, sorted(set(self._ms)), direction, budget, workers)
        return results

    def aggregate_results(self, estimates: Dict[str, RateEstimate]) -> Dict[str, Any]:
        """Per-family plateau rates plus a summary block."""
        rows = [
            {
                "family": name,
                "direction": est.direction.value,
                "eps": est.eps,
                "extrapolated": est.extrapolated,
                "spread": est.spread,
                "points": len(est.per_m),
            }
            for name, est in estimates.items()
        ]
        summary = {
            "total_families": len(estimates),
            "expected_families": len(set(self._family_specs)),
            "total_points": sum(len(est.per_m) for est in estimates.values()),
            "unbounded_families": sum(1 for est in estimates.values() if est.extrapolated == float("inf")),
        }
        return {"summary": summary, "results": rows}
