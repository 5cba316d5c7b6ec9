from app.families.eigen import EigenFamily
from app.families.iid import CoinIidFamily, IidFamily
from app.families.manifest import ManifestFamily
from app.families.poisson import PoissonFamily

__all__ = [
    "CoinIidFamily",
    "EigenFamily",
    "IidFamily",
    "ManifestFamily",
    "PoissonFamily",
]
