"""
Scalar field of the BN254 curve.

Every value hashed, committed or proven by zkace is an element of this
field. Elements encode canonically as 32 little-endian bytes and display
as 64 lowercase hex digits in big-endian order.
"""

import secrets
from dataclasses import dataclass

from py_ecc.optimized_bn128 import curve_order

from .common import FieldEncodingError

MODULUS: int = curve_order
ENCODED_SIZE = 32
HEX_SIZE = 64


@dataclass(frozen=True, order=True)
class FieldElement:
    value: int

    def __post_init__(self) -> None:
        if not isinstance(self.value, int) or isinstance(self.value, bool):
            raise FieldEncodingError(f'field element must be an integer, got {self.value!r}')
        if not 0 <= self.value < MODULUS:
            raise FieldEncodingError(f'value out of field range: {self.value}')

    @classmethod
    def reduce(cls, value: int) -> 'FieldElement':
        """Construct from an arbitrary integer reduced mod p."""
        return cls(value % MODULUS)

    @classmethod
    def from_bytes(cls, data: bytes) -> 'FieldElement':
        """Decode the canonical 32-byte little-endian encoding."""
        if len(data) != ENCODED_SIZE:
            raise FieldEncodingError(
                f'field element encoding must be {ENCODED_SIZE} bytes, got {len(data)}')
        return cls(int.from_bytes(data, 'little'))

    @classmethod
    def from_hex(cls, text: str) -> 'FieldElement':
        """Decode the 64-char big-endian hex display form."""
        if not isinstance(text, str) or len(text) != HEX_SIZE:
            raise FieldEncodingError(f'field element hex must be {HEX_SIZE} characters: {text!r}')
        try:
            value = int(text, 16)
        except ValueError:
            raise FieldEncodingError(f'invalid field element hex: {text!r}') from None
        return cls(value)

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(ENCODED_SIZE, 'little')

    def hex(self) -> str:
        return f'{self.value:064x}'

    def __int__(self) -> int:
        return self.value

    def __add__(self, other: 'FieldElement | int') -> 'FieldElement':
        return FieldElement((self.value + int(other)) % MODULUS)

    def __repr__(self) -> str:
        return f'FieldElement(0x{self.hex()})'


ZERO = FieldElement(0)
ONE = FieldElement(1)


def reduce_bytes(data: bytes) -> FieldElement:
    """Interpret bytes as a little-endian integer and reduce mod p."""
    return FieldElement.reduce(int.from_bytes(data, 'little'))


def random_element() -> FieldElement:
    """Sample a field element from 256 fresh random bits, reduced mod p."""
    return reduce_bytes(secrets.token_bytes(ENCODED_SIZE))
