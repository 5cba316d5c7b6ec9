from pathlib import Path
from typing import Union

from app.core.base_family import BaseStateFamily
from app.core.errors import PreconditionError
from app.models.state_models import PureState
from app.storage.json_codec import load_json, load_state


class ManifestFamily(BaseStateFamily):
    """
    User-supplied family: a JSON manifest {"label": str, "states": {"m": "state.json", ...}}
    with paths relative to the manifest.
    """

    discoverable = False

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        manifest = load_json(self.path)
        super().__init__(manifest.get("label", f"manifest:{self.path.name}"))
        self._files = {int(m): self.path.parent / f for m, f in manifest["states"].items()}

    @property
    def available(self) -> list[int]:
        return sorted(self._files)

    def generate(self, m: int) -> PureState:
        if m not in self._files:
            raise PreconditionError(f"manifest {self.path} has no state for m={m}")
        return load_state(self._files[m])
