"""
BN254 group helpers on top of py_ecc's optimized (projective) arithmetic.

Point encodings are uncompressed affine coordinates, big-endian:
G1 is x || y (64 bytes), G2 is x.c0 || x.c1 || y.c0 || y.c1 (128 bytes).
The point at infinity encodes as all zero bytes, which is not on either curve.
"""

import struct
from typing import Any, Sequence

from py_ecc import optimized_bn128 as bn

from .common import FormatError

R = bn.curve_order
Q = bn.field_modulus
G1_SIZE = 64
G2_SIZE = 128

Point = tuple[Any, Any, Any]


def is_infinity(pt: Point) -> bool:
    return pt[2] == pt[2].zero()


def scalar_mul(pt: Point, k: int) -> Point:
    """Left-to-right double-and-add, without reducing k."""
    result = None
    if k > 0:
        for bit in bin(k)[2:]:
            if result is not None:
                result = bn.double(result)
            if bit == '1':
                result = pt if result is None else bn.add(result, pt)
    return _zero_like(pt) if result is None else result


def _zero_like(pt: Point) -> Point:
    return bn.Z2 if isinstance(pt[2], bn.FQ2) else bn.Z1


def _window_bits(n: int) -> int:
    if n < 8:
        return 2
    return max(3, n.bit_length() - 3)


def msm(points: Sequence[Point], scalars: Sequence[int]) -> Point | None:
    """
    Pippenger multi-scalar multiplication: sum of scalars[i] * points[i].

    Returns None for the point at infinity so callers can keep skipping
    additions with it; use msm_or_zero when a concrete point is needed.
    """
    pairs = [(pt, s % R) for pt, s in zip(points, scalars) if s % R and not is_infinity(pt)]
    if not pairs:
        return None
    c = _window_bits(len(pairs))
    mask = (1 << c) - 1
    windows = (R.bit_length() + c - 1) // c
    result: Point | None = None
    for w in range(windows - 1, -1, -1):
        if result is not None:
            for _ in range(c):
                result = bn.double(result)
        shift = w * c
        buckets: list[Point | None] = [None] * (mask + 1)
        for pt, s in pairs:
            idx = (s >> shift) & mask
            if idx:
                bucket = buckets[idx]
                buckets[idx] = pt if bucket is None else bn.add(bucket, pt)
        running = None
        total = None
        for idx in range(mask, 0, -1):
            bucket = buckets[idx]
            if bucket is not None:
                running = bucket if running is None else bn.add(running, bucket)
            if running is not None:
                total = running if total is None else bn.add(total, running)
        if total is not None:
            result = total if result is None else bn.add(result, total)
    return result


def msm_or_zero(points: Sequence[Point], scalars: Sequence[int], zero: Point) -> Point:
    result = msm(points, scalars)
    return zero if result is None else result


def add_all(*points: Point | None) -> Point | None:
    """Sum of the given points, None standing for infinity."""
    total = None
    for pt in points:
        if pt is None or is_infinity(pt):
            continue
        total = pt if total is None else bn.add(total, pt)
    return total


class FixedBaseTable:
    """Windowed precomputation for many multiplications of one base point."""

    def __init__(self, base: Point, window: int = 8) -> None:
        self.window = window
        self.zero = _zero_like(base)
        size = 1 << window
        self.rows: list[list[Point | None]] = []
        step = base
        for _ in range((R.bit_length() + window - 1) // window):
            row: list[Point | None] = [None, step]
            for _ in range(2, size):
                row.append(bn.add(row[-1], step))
            self.rows.append(row)
            step = bn.double(row[size // 2])

    def mul(self, k: int) -> Point:
        k %= R
        mask = (1 << self.window) - 1
        result = None
        for row in self.rows:
            if not k:
                break
            pt = row[k & mask]
            if pt is not None:
                result = pt if result is None else bn.add(result, pt)
            k >>= self.window
        return self.zero if result is None else result


def _coeff(value: Any) -> int:
    return int(value.n) if hasattr(value, 'n') else int(value)


def encode_g1(pt: Point) -> bytes:
    if is_infinity(pt):
        return bytes(G1_SIZE)
    x, y = bn.normalize(pt)
    return _coeff(x).to_bytes(32, 'big') + _coeff(y).to_bytes(32, 'big')


def encode_g2(pt: Point) -> bytes:
    if is_infinity(pt):
        return bytes(G2_SIZE)
    x, y = bn.normalize(pt)
    return b''.join(_coeff(c).to_bytes(32, 'big') for c in (*x.coeffs, *y.coeffs))


def _coordinates(data: bytes, count: int) -> list[int]:
    values = [int.from_bytes(data[i * 32:(i + 1) * 32], 'big') for i in range(count)]
    if any(v >= Q for v in values):
        raise FormatError('point coordinate out of range')
    return values


def decode_g1(data: bytes) -> Point:
    if len(data) != G1_SIZE:
        raise FormatError(f'G1 point must be {G1_SIZE} bytes')
    if not any(data):
        return bn.Z1
    x, y = _coordinates(data, 2)
    pt = (bn.FQ(x), bn.FQ(y), bn.FQ.one())
    if not bn.is_on_curve(pt, bn.b):
        raise FormatError('G1 point is not on the curve')
    return pt


def decode_g2(data: bytes, check_subgroup: bool = False) -> Point:
    if len(data) != G2_SIZE:
        raise FormatError(f'G2 point must be {G2_SIZE} bytes')
    if not any(data):
        return bn.Z2
    x0, x1, y0, y1 = _coordinates(data, 4)
    pt = (bn.FQ2([x0, x1]), bn.FQ2([y0, y1]), bn.FQ2.one())
    if not bn.is_on_curve(pt, bn.b2):
        raise FormatError('G2 point is not on the curve')
    if check_subgroup and not is_infinity(scalar_mul(pt, R)):
        raise FormatError('G2 point is not in the prime order subgroup')
    return pt


class Reader:
    """Sequential reader over a key blob."""

    def __init__(self, data: bytes, what: str) -> None:
        self.data = data
        self.offset = 0
        self.what = what

    def take(self, size: int) -> bytes:
        end = self.offset + size
        if end > len(self.data):
            raise FormatError(f'{self.what}: truncated')
        chunk = self.data[self.offset:end]
        self.offset = end
        return chunk

    def u32(self) -> int:
        return struct.unpack('>I', self.take(4))[0]

    def g1(self) -> Point:
        return decode_g1(self.take(G1_SIZE))

    def g2(self) -> Point:
        return decode_g2(self.take(G2_SIZE))

    def g1_list(self) -> list[Point]:
        return [self.g1() for _ in range(self.u32())]

    def g2_list(self) -> list[Point]:
        return [self.g2() for _ in range(self.u32())]

    def finish(self) -> None:
        if self.offset != len(self.data):
            raise FormatError(f'{self.what}: {len(self.data) - self.offset} trailing bytes')


def encode_g1_list(points: Sequence[Point]) -> bytes:
    return struct.pack('>I', len(points)) + b''.join(encode_g1(pt) for pt in points)


def encode_g2_list(points: Sequence[Point]) -> bytes:
    return struct.pack('>I', len(points)) + b''.join(encode_g2(pt) for pt in points)
