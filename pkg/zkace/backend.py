"""
Proof backends behind one setup/prove/verify surface.

Real is Groth16 over BN254 (zkace.groth16). Mock is a keyed authenticator
over (circuit id, public inputs) whose prover checks the witness natively;
it has no soundness against anyone holding the verifying key and exists for
pipeline tests and benchmarks only.

Keys are binary files:

    magic "ZKACEKEY" | u16 format_version | u8 kind | u8 backend | u8 mode
    | circuit id (32 bytes) | backend payload
"""

import base64
import binascii
import hashlib
import hmac
import os
import struct
from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import cached_property
from typing import Any, ClassVar, Sequence

from . import groth16
from .circuit import (
    AuthorizationWitness,
    PublicInputs,
    ReplayMode,
    build_circuit,
    failing_relations,
)
from .common import (
    FORMAT_VERSION,
    ConfigurationError,
    FormatError,
    UnsatisfiedWitnessError,
    VersionError,
    check_format_version,
    read_bytes,
    read_json,
    write_bytes,
    write_json,
)
from .config import Profile
from .log import log
from .sponge import SpongeParams

KEY_MAGIC = b'ZKACEKEY'
SEED_SIZE = 32
MOCK_SECRET_SIZE = 32
MOCK_PROOF_SIZE = 32
CIRCUIT_ID_SIZE = 32
_HEADER = struct.Struct('>8sHBBB32s')
_MODE_BYTES = {ReplayMode.NONCE: 1, ReplayMode.NULLIFIER: 2}


class BackendId(str, Enum):
    REAL = 'real'
    MOCK = 'mock'

    @property
    def code(self) -> int:
        return 1 if self is BackendId.REAL else 2

    @classmethod
    def from_code(cls, code: int) -> 'BackendId':
        for backend in cls:
            if backend.code == code:
                return backend
        raise FormatError(f'unknown backend id {code}')


def parse_backend(value: str) -> BackendId:
    try:
        return BackendId(value)
    except ValueError:
        raise FormatError(f'unknown backend "{value}"') from None


class KeyKind(IntEnum):
    PROVING = 1
    VERIFYING = 2


def proof_size(backend: BackendId) -> int:
    """Proof size in bytes; constant per backend."""
    return groth16.PROOF_SIZE if backend is BackendId.REAL else MOCK_PROOF_SIZE


@dataclass(frozen=True)
class KeyFile:
    backend: BackendId
    mode: ReplayMode
    circuit_id: bytes
    payload: bytes
    format_version: int = FORMAT_VERSION

    kind: ClassVar[KeyKind]

    def to_bytes(self) -> bytes:
        header = _HEADER.pack(KEY_MAGIC, self.format_version, int(self.kind),
                              self.backend.code, _MODE_BYTES[self.mode], self.circuit_id)
        return header + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> 'KeyFile':
        """
        Parse a key file.

        Raises:
            FormatError: If the magic, kind, backend or mode byte is wrong
            VersionError: If the file was written by another format version
        """
        what = 'proving key' if cls.kind is KeyKind.PROVING else 'verifying key'
        if len(data) < _HEADER.size:
            raise FormatError(f'{what}: truncated header')
        magic, version, kind, backend, mode, circuit_id = _HEADER.unpack_from(data)
        if magic != KEY_MAGIC:
            raise FormatError(f'{what}: not a zkace key file')
        if version != FORMAT_VERSION:
            raise VersionError(
                f'{what}: unsupported format_version {version} (expected {FORMAT_VERSION})')
        if kind != cls.kind:
            raise FormatError(f'{what}: wrong key kind {kind}')
        modes = {v: k for k, v in _MODE_BYTES.items()}
        if mode not in modes:
            raise FormatError(f'{what}: unknown mode byte {mode}')
        return cls(backend=BackendId.from_code(backend), mode=modes[mode],
                   circuit_id=circuit_id, payload=data[_HEADER.size:])


@dataclass(frozen=True)
class ProvingKey(KeyFile):
    kind: ClassVar[KeyKind] = KeyKind.PROVING

    @cached_property
    def material(self) -> groth16.ProvingKey:
        return groth16.ProvingKey.from_bytes(self.payload)


@dataclass(frozen=True)
class VerifyingKey(KeyFile):
    kind: ClassVar[KeyKind] = KeyKind.VERIFYING

    @cached_property
    def material(self) -> groth16.VerifyingKey:
        return groth16.VerifyingKey.from_bytes(self.payload)


@dataclass(frozen=True)
class AuthorizationProof:
    proof_bytes: bytes
    backend: BackendId
    circuit_id: bytes

    @property
    def size_bytes(self) -> int:
        return len(self.proof_bytes)


@dataclass(frozen=True)
class ProofBundle:
    """The unit submitted to the chain: proof, public inputs and optionally the payload."""
    proof: AuthorizationProof
    pub: PublicInputs
    mode: ReplayMode
    payload: bytes | None = None

    def to_json(self) -> dict[str, Any]:
        document: dict[str, Any] = {
            'format_version': FORMAT_VERSION,
            'backend_id': self.proof.backend.value,
            'circuit_id': self.proof.circuit_id.hex(),
            'proof_b64': base64.b64encode(self.proof.proof_bytes).decode('ascii'),
            'public_inputs': self.pub.to_json(self.mode),
        }
        if self.payload is not None:
            document['payload_b64'] = base64.b64encode(self.payload).decode('ascii')
        return document

    @classmethod
    def from_json(cls, document: Any) -> 'ProofBundle':
        if not isinstance(document, dict):
            raise FormatError('proof bundle must be a JSON object')
        check_format_version(document, 'proof bundle')
        for name in ('backend_id', 'circuit_id', 'proof_b64', 'public_inputs'):
            if name not in document:
                raise FormatError(f'proof bundle: missing field "{name}"')
        try:
            circuit_id = bytes.fromhex(document['circuit_id'])
            proof_bytes = base64.b64decode(document['proof_b64'], validate=True)
            payload = None
            if document.get('payload_b64') is not None:
                payload = base64.b64decode(document['payload_b64'], validate=True)
        except (TypeError, ValueError, binascii.Error) as e:
            raise FormatError(f'proof bundle: bad encoding ({e})') from None
        if len(circuit_id) != CIRCUIT_ID_SIZE:
            raise FormatError('proof bundle: circuit_id must be 32 bytes')
        pub, mode = PublicInputs.from_json(document['public_inputs'])
        proof = AuthorizationProof(proof_bytes, parse_backend(document['backend_id']), circuit_id)
        return cls(proof=proof, pub=pub, mode=mode, payload=payload)


@dataclass(frozen=True)
class BatchResult:
    accepted: bool
    failing: tuple[int, ...] = ()


def setup(mode: ReplayMode, backend: BackendId = BackendId.REAL, seed: bytes | None = None,
          profile: Profile = Profile.PRODUCTION,
          params: SpongeParams | None = None) -> tuple[ProvingKey, VerifyingKey]:
    """
    Generate a key pair for the circuit of a replay mode.

    Args:
        mode: Replay model selecting the circuit
        backend: Real (Groth16) or Mock
        seed: 32-byte seed for deterministic keys
        profile: Test requires a seed; production warns when one is given
        params: Sponge parameters (defaults to the active table)

    Returns:
        (proving key, verifying key) bound to the circuit identifier

    Raises:
        ConfigurationError: If the seed does not fit the profile
    """
    if seed is not None and len(seed) != SEED_SIZE:
        raise ConfigurationError(f'setup seed must be {SEED_SIZE} bytes, got {len(seed)}')
    if profile is Profile.TEST and seed is None:
        raise ConfigurationError('the test profile requires an explicit setup seed')
    if profile is Profile.PRODUCTION and seed is not None:
        log.warning('INSECURE-FOR-PRODUCTION: deterministic setup seed in use; '
                    'anyone with the seed can forge proofs')

    circuit = build_circuit(mode, params)
    circuit_id = circuit.circuit_id
    if backend is BackendId.MOCK:
        if seed is None:
            secret = os.urandom(MOCK_SECRET_SIZE)
        else:
            secret = hashlib.sha256(b'zkace-mock' + seed + circuit_id).digest()
        return (ProvingKey(backend, mode, circuit_id, secret),
                VerifyingKey(backend, mode, circuit_id, secret))

    g16_pk, g16_vk = groth16.setup(circuit.shape, seed)
    pk = ProvingKey(backend, mode, circuit_id, g16_pk.to_bytes())
    vk = VerifyingKey(backend, mode, circuit_id, g16_vk.to_bytes())
    # already decoded; skip parsing the payloads again
    vars(pk)['material'] = g16_pk
    vars(vk)['material'] = g16_vk
    return pk, vk


def mock_authenticator(secret: bytes, circuit_id: bytes, pub: PublicInputs) -> bytes:
    return hmac.new(secret, circuit_id + pub.to_bytes(), hashlib.sha256).digest()


def prove(pk: ProvingKey, witness: AuthorizationWitness, pub: PublicInputs,
          allow_unsatisfied: bool = False,
          params: SpongeParams | None = None) -> AuthorizationProof:
    """
    Prove an authorization statement.

    Args:
        pk: Proving key
        witness: Private witness
        pub: Public inputs the proof is bound to
        allow_unsatisfied: Emit a (non-verifying) proof for a bad witness
            instead of raising; used by the adversarial games
        params: Sponge parameters the key was generated with

    Raises:
        UnsatisfiedWitnessError: If the witness violates the circuit
        ConfigurationError: If the key belongs to another circuit
    """
    circuit = build_circuit(pk.mode, params)
    if circuit.circuit_id != pk.circuit_id:
        raise ConfigurationError(
            'proving key was generated for a different circuit or hash parameter table')

    if pk.backend is BackendId.MOCK:
        failed = failing_relations(witness, pub, pk.mode, circuit.params)
        if failed and not allow_unsatisfied:
            raise UnsatisfiedWitnessError(
                f'witness does not satisfy constraint groups: {", ".join(failed)}', failed)
        if failed:
            tag = os.urandom(MOCK_PROOF_SIZE)
        else:
            tag = mock_authenticator(pk.payload, pk.circuit_id, pub)
        return AuthorizationProof(tag, pk.backend, pk.circuit_id)

    cs = circuit.synthesize(witness, pub)
    proof = groth16.prove(pk.material, cs, allow_unsatisfied=allow_unsatisfied)
    return AuthorizationProof(proof.to_bytes(), pk.backend, pk.circuit_id)


def _matches(vk: VerifyingKey, proof: AuthorizationProof) -> bool:
    return (proof.backend is vk.backend and proof.circuit_id == vk.circuit_id
            and proof.size_bytes == proof_size(vk.backend))


def verify(vk: VerifyingKey, proof: AuthorizationProof, pub: PublicInputs) -> bool:
    """Accept or reject. Malformed or foreign proofs reject; nothing here raises."""
    if not _matches(vk, proof):
        return False
    if vk.backend is BackendId.MOCK:
        expected = mock_authenticator(vk.payload, vk.circuit_id, pub)
        return hmac.compare_digest(proof.proof_bytes, expected)
    try:
        decoded = groth16.Proof.from_bytes(proof.proof_bytes)
    except FormatError:
        return False
    return groth16.verify(vk.material, decoded, pub.values())


def batch_verify(vk: VerifyingKey,
                 items: Sequence[tuple[AuthorizationProof, PublicInputs]]) -> BatchResult:
    """
    Verify a batch; accepted iff every item verifies.

    On rejection the result lists the failing indices. The Real backend
    checks the whole batch with one randomized pairing product and only
    falls back to per-item checks when that fails.
    """
    if not items:
        raise ValueError('batch must contain at least one proof')
    if vk.backend is BackendId.MOCK:
        failing = tuple(i for i, (proof, pub) in enumerate(items) if not verify(vk, proof, pub))
        return BatchResult(not failing, failing)

    failing_list: list[int] = []
    decoded: list[tuple[int, groth16.Proof, list[int]]] = []
    for i, (proof, pub) in enumerate(items):
        if not _matches(vk, proof):
            failing_list.append(i)
            continue
        try:
            decoded.append((i, groth16.Proof.from_bytes(proof.proof_bytes), pub.values()))
        except FormatError:
            failing_list.append(i)

    if decoded and not groth16.batch_verify(vk.material, [(p, v) for _, p, v in decoded]):
        log.verbose('batch check failed, verifying items individually')
        failing_list.extend(i for i, p, v in decoded if not groth16.verify(vk.material, p, v))
    failing = tuple(sorted(failing_list))
    return BatchResult(not failing, failing)


def save_key(path: str, key: KeyFile) -> None:
    write_bytes(path, key.to_bytes())


def load_proving_key(path: str) -> ProvingKey:
    key = ProvingKey.from_bytes(read_bytes(path, 'proving key'))
    assert isinstance(key, ProvingKey)
    return key


def load_verifying_key(path: str) -> VerifyingKey:
    key = VerifyingKey.from_bytes(read_bytes(path, 'verifying key'))
    assert isinstance(key, VerifyingKey)
    return key


def save_bundle(path: str, bundle: ProofBundle) -> None:
    write_json(path, bundle.to_json())


def load_bundle(path: str) -> ProofBundle:
    return ProofBundle.from_json(read_json(path, 'proof bundle'))
