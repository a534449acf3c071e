"""
Encoder hyperparameters.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Dict

from config import constants
from core.errors import ContractError


@dataclass(frozen=True)
class EncoderConfig:
    """编码器超参数"""
    embed_dim: int = constants.DEFAULT_EMBED_DIM
    image_side: int = constants.DEFAULT_IMAGE_SIDE
    sh_degree: int = constants.DEFAULT_SH_DEGREE
    siren_layers: int = constants.DEFAULT_SIREN_LAYERS
    siren_hidden: int = constants.DEFAULT_SIREN_HIDDEN
    siren_omega0: float = constants.DEFAULT_SIREN_OMEGA0
    text_hidden: int = constants.DEFAULT_TEXT_HIDDEN

    def __post_init__(self):
        if self.embed_dim < 2:
            raise ContractError(f"embed_dim must be >= 2, got {self.embed_dim}")
        if self.image_side < 8:
            raise ContractError(f"image_side must be >= 8, got {self.image_side}")
        if self.sh_degree < 0:
            raise ContractError(f"sh_degree must be >= 0, got {self.sh_degree}")
        if self.siren_layers < 1:
            raise ContractError(f"siren_layers must be >= 1, got {self.siren_layers}")
        if self.sh_features > self.siren_hidden:
            raise ContractError(
                f"(L+1)^2 = {self.sh_features} exceeds SIREN width {self.siren_hidden}"
            )
        if self.siren_omega0 <= 0:
            raise ContractError(f"siren_omega0 must be positive, got {self.siren_omega0}")
        if self.text_hidden < 1:
            raise ContractError(f"text_hidden must be positive, got {self.text_hidden}")

    @property
    def sh_features(self) -> int:
        return (self.sh_degree + 1) ** 2

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EncoderConfig":
        return cls(
            embed_dim=int(data.get("embed_dim", constants.DEFAULT_EMBED_DIM)),
            image_side=int(data.get("image_side", constants.DEFAULT_IMAGE_SIDE)),
            sh_degree=int(data.get("sh_degree", constants.DEFAULT_SH_DEGREE)),
            siren_layers=int(data.get("siren_layers", constants.DEFAULT_SIREN_LAYERS)),
            siren_hidden=int(data.get("siren_hidden", constants.DEFAULT_SIREN_HIDDEN)),
            siren_omega0=float(data.get("siren_omega0", constants.DEFAULT_SIREN_OMEGA0)),
            text_hidden=int(data.get("text_hidden", constants.DEFAULT_TEXT_HIDDEN)),
        )
