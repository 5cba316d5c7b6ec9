from abc import ABC, abstractmethod

from app.core.errors import PreconditionError
from app.models.state_models import FamilyKind, PureState


class BaseStateFamily(ABC):
    """A deterministic sequence m -> psi_m of pure states, m >= 1."""

    kind: FamilyKind = FamilyKind.CUSTOM
    discoverable: bool = True

    def __init__(self, name: str):
        self.name = name

    @abstractmethod
    def generate(self, m: int) -> PureState:
        """
        Abstract method that must be implemented by all family classes.
        Returns psi_m; must be safe to call concurrently for distinct m.
        """
        pass

    def __call__(self, m: int) -> PureState:
        if m < 1:
            raise PreconditionError(f"family index must be at least 1, got {m}")
        return self.generate(m)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r})"
