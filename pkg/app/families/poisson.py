from app.core.base_family import BaseStateFamily
from app.core.errors import PreconditionError
from app.models.state_models import FamilyKind, PureState
from app.utility.dists import poisson_profile_state


class PoissonFamily(BaseStateFamily):
    """chi_lam^{(x) m} = chi_{lam m}, since Poisson profiles convolve to Poisson profiles."""

    kind = FamilyKind.IID

    def __init__(self, lam: float = 1.0):
        if lam < 0:
            raise PreconditionError(f"Poisson family needs lam >= 0, got {lam}")
        super().__init__(f"iid:poisson:{lam:g}")
        self.lam = lam

    def generate(self, m: int) -> PureState:
        return poisson_profile_state(self.lam * m)
