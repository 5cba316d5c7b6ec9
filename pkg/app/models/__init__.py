from .channel_models import CovariantChannel, DilatedState, KrausBranch, KrausChannel
from .result_models import AMajorVerdict, BoundKind, QfiBracket, RateDirection, RateEstimate, RatePoint, VerdictMode
from .sequence_models import Backend, IntSeq, Tolerance
from .state_models import DensityMatrix, EnergyDistribution, FamilyKind, GeneralSpectrum, PureState, SchmidtVector

__all__ = [
    "AMajorVerdict",
    "Backend",
    "BoundKind",
    "CovariantChannel",
    "DensityMatrix",
    "DilatedState",
    "EnergyDistribution",
    "FamilyKind",
    "GeneralSpectrum",
    "IntSeq",
    "KrausBranch",
    "KrausChannel",
    "PureState",
    "QfiBracket",
    "RateDirection",
    "RateEstimate",
    "RatePoint",
    "SchmidtVector",
    "Tolerance",
    "VerdictMode",
]
