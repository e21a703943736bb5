"""
Deterministic identity derivation.

The root entropy value (REV) is the 256-bit identity root. It is kept
sealed at rest (scrypt-derived key, AES-GCM) and only opened on the prover
side. Derived keys are computed with the circuit-native sponge so the
derivation proven in-circuit and the one computed here are the same function.
"""

import hmac
import os
import secrets
from dataclasses import dataclass
from typing import Any

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.scrypt import Scrypt

from .common import (
    FORMAT_VERSION,
    FormatError,
    UsageError,
    canonical_json,
    check_format_version,
    read_json,
    write_json,
)
from .config import MAX_KDF_COST, MIN_KDF_COST
from .field import FieldElement, reduce_bytes
from .sponge import DomainTag, SpongeParams, hash_fields

REV_SIZE = 32
KDF_SALT_SIZE = 16
NONCE_SIZE = 12
TAG_SIZE = 16
KEY_SIZE = 32
KDF_NAME = 'scrypt'
# block size and parallelism written by seal; headers asking for more are refused
SCRYPT_R = 8
SCRYPT_P = 1


class RootEntropy:
    """A 256-bit identity root held in a wipeable buffer."""

    __slots__ = ('_buffer', '_wiped')

    def __init__(self, rev_bytes: bytes) -> None:
        if len(rev_bytes) != REV_SIZE:
            raise FormatError(f'root entropy must be {REV_SIZE} bytes, got {len(rev_bytes)}')
        self._buffer = bytearray(rev_bytes)
        self._wiped = False

    @classmethod
    def generate(cls) -> 'RootEntropy':
        return cls(secrets.token_bytes(REV_SIZE))

    @property
    def rev_bytes(self) -> bytes:
        if self._wiped:
            raise ValueError('root entropy has been wiped')
        return bytes(self._buffer)

    @property
    def rev_field(self) -> FieldElement:
        """The REV reduced mod p, as used inside the circuit."""
        return reduce_bytes(self.rev_bytes)

    def wipe(self) -> None:
        """Overwrite the buffer with zeros."""
        for i in range(len(self._buffer)):
            self._buffer[i] = 0
        self._wiped = True

    def __enter__(self) -> 'RootEntropy':
        return self

    def __exit__(self, *exc: object) -> None:
        self.wipe()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RootEntropy):
            return NotImplemented
        return hmac.compare_digest(self._buffer, other._buffer)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return 'RootEntropy(<redacted>)'


@dataclass(frozen=True)
class DerivationContext:
    alg_id: FieldElement
    ctx_domain: FieldElement
    index: FieldElement

    @classmethod
    def for_domain(cls, domain: FieldElement, alg_id: int = 1,
                   index: int = 0) -> 'DerivationContext':
        return cls(FieldElement(alg_id), domain, FieldElement(index))

    def elements(self) -> list[FieldElement]:
        return [self.alg_id, self.ctx_domain, self.index]


@dataclass(frozen=True)
class KdfParams:
    log2_n: int
    r: int = SCRYPT_R
    p: int = SCRYPT_P
    name: str = KDF_NAME

    def to_json(self) -> dict[str, Any]:
        return {'name': self.name, 'log2_n': self.log2_n, 'r': self.r, 'p': self.p}

    @classmethod
    def from_json(cls, document: Any) -> 'KdfParams':
        if not isinstance(document, dict):
            raise FormatError('kdf_params must be an object')
        try:
            params = cls(name=document['name'], log2_n=int(document['log2_n']),
                         r=int(document['r']), p=int(document['p']))
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f'invalid kdf_params: {e}') from None
        if params.name != KDF_NAME:
            raise FormatError(f'unsupported kdf "{params.name}"')
        if not MIN_KDF_COST <= params.log2_n <= MAX_KDF_COST:
            raise FormatError(f'kdf cost out of range: {params.to_json()}')
        if (params.r, params.p) != (SCRYPT_R, SCRYPT_P):
            raise FormatError(f'unsupported scrypt parameters r={params.r} p={params.p} '
                              f'(expected r={SCRYPT_R} p={SCRYPT_P})')
        return params

    def derive_key(self, credential: bytes, salt: bytes) -> bytes:
        kdf = Scrypt(salt=salt, length=KEY_SIZE, n=2 ** self.log2_n, r=self.r, p=self.p)
        return kdf.derive(credential)


@dataclass(frozen=True)
class SealedArtifact:
    kdf_salt: bytes
    kdf_params: KdfParams
    cipher_nonce: bytes
    ciphertext: bytes
    auth_tag: bytes
    format_version: int = FORMAT_VERSION

    def associated_data(self) -> bytes:
        return canonical_json({
            'version': self.format_version,
            'kdf_salt': self.kdf_salt.hex(),
            'kdf_params': self.kdf_params.to_json(),
            'nonce': self.cipher_nonce.hex(),
        })

    def to_json(self) -> dict[str, Any]:
        return {
            'version': self.format_version,
            'kdf_salt': self.kdf_salt.hex(),
            'kdf_params': self.kdf_params.to_json(),
            'nonce': self.cipher_nonce.hex(),
            'ciphertext': self.ciphertext.hex(),
            'tag': self.auth_tag.hex(),
        }

    @classmethod
    def from_json(cls, document: Any) -> 'SealedArtifact':
        """
        Parse the JSON envelope.

        Raises:
            FormatError: If a field is missing, not hex, or has the wrong length
            VersionError: If the envelope version is not supported
        """
        if not isinstance(document, dict):
            raise FormatError('sealed artifact must be a JSON object')
        if 'version' not in document:
            raise FormatError('sealed artifact: missing version')
        check_format_version({'format_version': document.get('version')}, 'sealed artifact')

        def hex_field(name: str, size: int) -> bytes:
            value = document.get(name)
            if not isinstance(value, str):
                raise FormatError(f'sealed artifact: missing field "{name}"')
            try:
                data = bytes.fromhex(value)
            except ValueError:
                raise FormatError(f'sealed artifact: field "{name}" is not hex') from None
            if len(data) != size:
                raise FormatError(
                    f'sealed artifact: field "{name}" must be {size} bytes, got {len(data)}')
            return data

        return cls(
            kdf_salt=hex_field('kdf_salt', KDF_SALT_SIZE),
            kdf_params=KdfParams.from_json(document.get('kdf_params')),
            cipher_nonce=hex_field('nonce', NONCE_SIZE),
            ciphertext=hex_field('ciphertext', REV_SIZE),
            auth_tag=hex_field('tag', TAG_SIZE),
            format_version=document['version'],
        )


def seal(rev: RootEntropy, credential: bytes, kdf_cost: int) -> SealedArtifact:
    """
    Encrypt a root entropy value under a credential.

    Args:
        rev: Root entropy to seal
        credential: Password or other secret, non-empty
        kdf_cost: scrypt log2(N)

    Returns:
        A sealed artifact with fresh salt and nonce
    """
    if not credential:
        raise UsageError('credential must be non-empty')
    header = SealedArtifact(
        kdf_salt=os.urandom(KDF_SALT_SIZE),
        kdf_params=KdfParams(log2_n=kdf_cost),
        cipher_nonce=os.urandom(NONCE_SIZE),
        ciphertext=b'',
        auth_tag=b'',
    )
    key = header.kdf_params.derive_key(credential, header.kdf_salt)
    sealed = AESGCM(key).encrypt(header.cipher_nonce, rev.rev_bytes, header.associated_data())
    return SealedArtifact(
        kdf_salt=header.kdf_salt,
        kdf_params=header.kdf_params,
        cipher_nonce=header.cipher_nonce,
        ciphertext=sealed[:-TAG_SIZE],
        auth_tag=sealed[-TAG_SIZE:],
    )


def unseal(artifact: SealedArtifact, credential: bytes) -> RootEntropy | None:
    """
    Open a sealed artifact.

    Returns:
        The root entropy, or None if the credential does not authenticate
    """
    if not credential:
        return None
    key = artifact.kdf_params.derive_key(credential, artifact.kdf_salt)
    try:
        rev_bytes = AESGCM(key).decrypt(
            artifact.cipher_nonce, artifact.ciphertext + artifact.auth_tag,
            artifact.associated_data())
    except InvalidTag:
        return None
    return RootEntropy(rev_bytes)


def derive(rev: RootEntropy, ctx: DerivationContext,
           params: SpongeParams | None = None) -> FieldElement:
    """Circuit-native derived key for a context."""
    return hash_fields([rev.rev_field, *ctx.elements()], DomainTag.DERIVE_INNER, params)


def derive_target(rev: RootEntropy, ctx: DerivationContext,
                  params: SpongeParams | None = None) -> FieldElement:
    """Public commitment to the derived key."""
    return hash_fields([derive(rev, ctx, params)], DomainTag.DERIVE_OUTER, params)


def save_sealed(path: str, artifact: SealedArtifact) -> None:
    write_json(path, artifact.to_json())


def load_sealed(path: str) -> SealedArtifact:
    return SealedArtifact.from_json(read_json(path, 'sealed identity'))
