from typing import Optional

from app.core.base_family import BaseStateFamily
from app.core.logger import get_spectra_logger
from app.models.sequence_models import Backend
from app.models.state_models import FamilyKind, PureState
from app.utility.dists import coherence_bit, iid_power, state_from_distribution

logger = get_spectra_logger()


class IidFamily(BaseStateFamily):
    """psi^{(x) m}, represented by its energy profile p_psi^{*m} with zero phases."""

    kind = FamilyKind.IID

    def __init__(self, base: Optional[PureState] = None, name: str = "iid"):
        super().__init__(name)
        self.base = base or coherence_bit()
        self._profile = self.base.energy_distribution(Backend.RATIONAL)

    def generate(self, m: int) -> PureState:
        profile = iid_power(self._profile, m)
        logger.debug(f"🧬 FAMILY | {self.name} m={m} support=[{profile.seq.min_index},{profile.seq.max_index}]")
        return state_from_distribution(profile)


class CoinIidFamily(IidFamily):
    """m coherence bits (|0> + |1>)/sqrt(2)."""

    def __init__(self):
        super().__init__(coherence_bit(), name="iid:coin")
