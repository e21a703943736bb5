"""
Field-native sponge hash over the BN254 scalar field.

Width 3 (rate 2, capacity 1), x^17 S-box, 8 full and 57 partial rounds.
The same permutation is evaluated natively here and as constraints in
zkace.circuit; both read one frozen parameter table.

Each call starts from the state [tag * 2^64 + arity, 0, 0]: the use tag and
the input count live in the capacity element, so inputs of different arity
or call sites never share a starting state. Inputs are absorbed two at a
time, the final odd chunk padded with zero, and the digest is the first
rate element after the last permutation.
"""

import hashlib
import math
from dataclasses import dataclass
from enum import IntEnum
from importlib.resources import files
from typing import Sequence

from .common import ChecksumError, FormatError
from .field import MODULUS, FieldElement
from .log import log

DEFAULT_PARAMS_NAME = 'sponge_bn254_t3_a17_v1.txt'
DEFAULT_PARAMS_SHA256 = '197d70e283690abff6b17f0ffa8bb25a583e3a4a63942dbf9e421e5a2caa3665'

CHUNK_SIZE = 31
MAX_PAYLOAD = 2 ** 32
_TAG_SHIFT = 64

Digest = FieldElement


class DomainTag(IntEnum):
    """Use tag of a hash call site. Part of the frozen format."""
    COMMITMENT = 1
    DERIVE_INNER = 2
    DERIVE_OUTER = 3
    AUTH = 4
    REPLAY = 5
    TX = 6
    DOMAIN = 7


@dataclass(frozen=True)
class SpongeParams:
    t: int
    rate: int
    capacity: int
    alpha: int
    full_rounds: int
    partial_rounds: int
    seed: str
    mds: tuple[tuple[int, ...], ...]
    round_constants: tuple[int, ...]
    digest: str
    version: int = 1

    @property
    def rounds(self) -> int:
        return self.full_rounds + self.partial_rounds

    @property
    def sbox_count(self) -> int:
        """S-box applications per permutation."""
        return self.full_rounds * self.t + self.partial_rounds

    def permutations_for(self, arity: int) -> int:
        return math.ceil(arity / self.rate)

    def describe(self) -> dict[str, object]:
        return {
            'version': self.version,
            't': self.t,
            'rate': self.rate,
            'capacity': self.capacity,
            'alpha': self.alpha,
            'full_rounds': self.full_rounds,
            'partial_rounds': self.partial_rounds,
            'seed': self.seed,
            'sha256': self.digest,
        }


def generate_round_constants(seed: str, count: int) -> list[int]:
    """Counter-mode SHA-256 expansion of the seed, each block reduced mod p."""
    prefix = seed.encode('ascii')
    return [
        int.from_bytes(hashlib.sha256(prefix + i.to_bytes(4, 'big')).digest(), 'big') % MODULUS
        for i in range(count)
    ]


def cauchy_mds(t: int) -> list[list[int]]:
    """Cauchy matrix 1 / (x_i + y_j) with x_i = i and y_j = t + j."""
    return [[pow(i + j + t, -1, MODULUS) for j in range(t)] for i in range(t)]


def _is_invertible(matrix: Sequence[Sequence[int]]) -> bool:
    rows = [list(row) for row in matrix]
    n = len(rows)
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] % MODULUS), None)
        if pivot is None:
            return False
        rows[col], rows[pivot] = rows[pivot], rows[col]
        inv = pow(rows[col][col], -1, MODULUS)
        for r in range(col + 1, n):
            factor = rows[r][col] * inv % MODULUS
            rows[r] = [(a - factor * b) % MODULUS for a, b in zip(rows[r], rows[col])]
    return True


def _parse_params(text: str, digest: str, source: str) -> SpongeParams:
    header: dict[str, str] = {}
    mds: list[tuple[int, ...]] = []
    constants: list[int] = []
    section = 'header'

    def field_value(token: str) -> int:
        try:
            value = int(token, 16)
        except ValueError:
            raise FormatError(f'{source}: invalid hex value "{token}"') from None
        if value >= MODULUS:
            raise FormatError(f'{source}: value out of field range "{token}"')
        return value

    for raw in text.splitlines():
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if line in ('mds', 'round_constants'):
            section = line
            continue
        if section == 'header':
            key, _, value = line.partition(' ')
            header[key] = value.strip()
        elif section == 'mds':
            mds.append(tuple(field_value(token) for token in line.split()))
        else:
            constants.append(field_value(line))

    try:
        params = SpongeParams(
            t=int(header['t']),
            rate=int(header['rate']),
            capacity=int(header['capacity']),
            alpha=int(header['alpha']),
            full_rounds=int(header['full_rounds']),
            partial_rounds=int(header['partial_rounds']),
            seed=header.get('seed', ''),
            mds=tuple(mds),
            round_constants=tuple(constants),
            digest=digest,
            version=int(header['version']),
        )
        field = int(header['field'], 16)
    except (KeyError, ValueError) as e:
        raise FormatError(f'{source}: incomplete or invalid header ({e})') from None

    if field != MODULUS:
        raise FormatError(f'{source}: parameters are for a different field')
    if params.t != params.rate + params.capacity:
        raise FormatError(f'{source}: width must equal rate + capacity')
    if params.full_rounds % 2:
        raise FormatError(f'{source}: full rounds must split evenly around the partial rounds')
    if len(params.round_constants) != params.t * params.rounds:
        raise FormatError(
            f'{source}: expected {params.t * params.rounds} round constants, '
            f'found {len(params.round_constants)}')
    if len(params.mds) != params.t or any(len(row) != params.t for row in params.mds):
        raise FormatError(f'{source}: mds must be {params.t}x{params.t}')
    if not _is_invertible(params.mds):
        raise FormatError(f'{source}: mds matrix is singular')
    if math.gcd(params.alpha, MODULUS - 1) != 1:
        raise FormatError(f'{source}: x^{params.alpha} is not a permutation of the field')
    return params


def load_params(path: str | None = None) -> SpongeParams:
    """
    Load and validate a sponge parameter table.

    Args:
        path: Parameter file, or None for the table shipped with zkace

    Returns:
        Validated parameters

    Raises:
        FormatError: If the table is malformed or structurally invalid
        ChecksumError: If the shipped table does not match its committed digest
    """
    if path is None:
        data = (files('zkace') / 'params' / DEFAULT_PARAMS_NAME).read_bytes()
        source = DEFAULT_PARAMS_NAME
    else:
        try:
            with open(path, 'rb') as f:
                data = f.read()
        except OSError as e:
            raise FormatError(f'cannot read hash parameters {path}: {e.strerror}') from None
        source = path

    digest = hashlib.sha256(data).hexdigest()
    if path is None and digest != DEFAULT_PARAMS_SHA256:
        raise ChecksumError(f'{source}: digest {digest} does not match the committed table')

    try:
        text = data.decode('ascii')
    except UnicodeDecodeError:
        raise FormatError(f'{source}: parameter table must be ASCII text') from None

    params = _parse_params(text, digest, source)
    if path is not None and digest != DEFAULT_PARAMS_SHA256:
        log.warning(f'using non-default hash parameters {path} (sha256 {digest[:16]}...)')
    return params


_default: SpongeParams | None = None
_active: SpongeParams | None = None


def default_params() -> SpongeParams:
    global _default
    if _default is None:
        _default = load_params()
    return _default


def active_params() -> SpongeParams:
    """Parameters used when a caller does not pass its own."""
    return _active if _active is not None else default_params()


def use_params(params: SpongeParams | None) -> None:
    """Install process-wide parameters (None restores the default table)."""
    global _active
    _active = params


def permute(state: list[int], params: SpongeParams) -> list[int]:
    """Apply the full permutation to a width-t state of field integers."""
    p = MODULUS
    t = params.t
    alpha = params.alpha
    rc = params.round_constants
    mds = params.mds
    half = params.full_rounds // 2
    partial_end = half + params.partial_rounds
    for r in range(params.rounds):
        offset = r * t
        state = [(s + rc[offset + i]) % p for i, s in enumerate(state)]
        if r < half or r >= partial_end:
            state = [pow(s, alpha, p) for s in state]
        else:
            state[0] = pow(state[0], alpha, p)
        state = [sum(m * s for m, s in zip(row, state)) % p for row in mds]
    return state


def initial_state(tag: int, arity: int, params: SpongeParams) -> list[int]:
    state = [0] * params.t
    state[0] = ((tag << _TAG_SHIFT) + arity) % MODULUS
    return state


def hash_ints(values: Sequence[int], tag: int, params: SpongeParams | None = None) -> int:
    """Hash raw field integers. Callers guarantee 0 <= v < p."""
    if not values:
        raise ValueError('hash input must be non-empty')
    if params is None:
        params = active_params()
    state = initial_state(tag, len(values), params)
    rate = params.rate
    cap = params.capacity
    for i in range(0, len(values), rate):
        chunk = values[i:i + rate]
        for j, v in enumerate(chunk):
            state[cap + j] = (state[cap + j] + v) % MODULUS
        state = permute(state, params)
    return state[cap]


def hash_fields(inputs: Sequence[FieldElement], tag: DomainTag,
                params: SpongeParams | None = None) -> Digest:
    """
    Hash a non-empty sequence of field elements under a use tag.

    Args:
        inputs: Elements to absorb, in order
        tag: Call-site tag
        params: Parameter table (defaults to the active table)

    Returns:
        The single squeezed field element
    """
    values = []
    for element in inputs:
        if not isinstance(element, FieldElement):
            element = FieldElement(element)
        values.append(element.value)
    return FieldElement(hash_ints(values, int(tag), params))


def pack_bytes(payload: bytes) -> list[FieldElement]:
    """Length prefix followed by little-endian 31-byte chunks."""
    if len(payload) >= MAX_PAYLOAD:
        raise FormatError(f'payload of {len(payload)} bytes exceeds the packing bound')
    packed = [FieldElement(len(payload))]
    for i in range(0, len(payload), CHUNK_SIZE):
        packed.append(FieldElement(int.from_bytes(payload[i:i + CHUNK_SIZE], 'little')))
    return packed


def tx_hash(payload: bytes, params: SpongeParams | None = None) -> FieldElement:
    return hash_fields(pack_bytes(payload), DomainTag.TX, params)


def parse_domain_descriptor(descriptor: str) -> tuple[str, str]:
    """Split "<chain_id>:<namespace>" into its two parts."""
    chain_id, sep, namespace = descriptor.partition(':')
    if not sep or not chain_id or not namespace:
        raise FormatError(
            f'domain descriptor must look like "<chain_id>:<namespace>", got "{descriptor}"')
    return chain_id, namespace


def domain_from_descriptor(descriptor: str, params: SpongeParams | None = None) -> FieldElement:
    """Domain field element for a "<chain_id>:<namespace>" descriptor."""
    parse_domain_descriptor(descriptor)
    return hash_fields(pack_bytes(descriptor.encode('utf-8')), DomainTag.DOMAIN, params)
