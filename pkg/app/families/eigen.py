from app.core.base_family import BaseStateFamily
from app.models.state_models import PureState


class EigenFamily(BaseStateFamily):
    """Energy eigenstates |m>: symmetric, so every rate vanishes."""

    def __init__(self):
        super().__init__("eigen")

    def generate(self, m: int) -> PureState:
        return PureState.basis(m)
