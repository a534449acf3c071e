"""
encoders
========

文本、SAR、MSI 与位置编码器，输出维度相同的单位向量。
"""

from .config import EncoderConfig
from .location import LocationEncoder, encode_location, sh_basis, sh_encode
from .model import ClospModel
from .text import TextEncoder, encode_text
from .vision import VisionEncoder, encode_image

__all__ = [
    "EncoderConfig",
    "LocationEncoder",
    "encode_location",
    "sh_basis",
    "sh_encode",
    "ClospModel",
    "TextEncoder",
    "encode_text",
    "VisionEncoder",
    "encode_image",
]
