"""Optical channel: QR codec, padding-codeword steganography, invisible overlay."""

from .invisible import GrayImage, from_pgm, invisible_embed, invisible_extract, to_pgm
from .qr import (
    EC_LEVELS,
    MAX_VERSION,
    MIN_VERSION,
    QrMatrix,
    byte_mode_capacity,
    from_pbm,
    matrix_from_modules,
    qr_decode,
    qr_encode,
    to_pbm,
)
from .stego import stego_capacity, stego_embed, stego_extract

__all__ = [
    "EC_LEVELS",
    "GrayImage",
    "MAX_VERSION",
    "MIN_VERSION",
    "QrMatrix",
    "byte_mode_capacity",
    "from_pbm",
    "from_pgm",
    "invisible_embed",
    "invisible_extract",
    "matrix_from_modules",
    "qr_decode",
    "qr_encode",
    "stego_capacity",
    "stego_embed",
    "stego_extract",
    "to_pbm",
    "to_pgm",
]
