"""
Per-transaction authorization data accounting.

Compares the bytes a post-quantum signature scheme puts on chain for one
transaction with what an authorization proof needs. Sizes are structural:
cryptographic artifacts only, no chain encoding.
"""

import argparse
from dataclasses import dataclass, replace
from typing import Any, Sequence

from .backend import BackendId, proof_size
from .circuit import PUBLIC_INPUT_FIELDS
from .common import UsageError
from .field import ENCODED_SIZE
from .log import log

COMMITMENT_BYTES = ENCODED_SIZE
COMPRESSED_GROTH16_PROOF_BYTES = 128
PROOF_ROW = 'Signature / proof'

CAVEATS = (
    "(i) public-key amortization depends on whether the sender's key is already "
    'known to the chain (repeat senders amortize to zero in the PQC model, '
    'narrowing the gap)',
    '(ii) ZK proof size varies by proof system (Groth16 yields ~128-256 B, while '
    'PLONK or STARK proofs are larger)',
    '(iii) chain-specific encoding formats (RLP, SSZ, ABI encoding) add overhead to '
    'both models',
)

PROOF_NOTES = {
    'measured': 'uncompressed Groth16 on BN254; the compressed encoding is '
                f'{COMPRESSED_GROTH16_PROOF_BYTES} B',
    'groth16-class': 'compressed Groth16 on BN254',
}


@dataclass(frozen=True)
class ArtifactProfile:
    name: str
    signature_or_proof_bytes: int
    public_key_bytes: int = 0
    commitment_bytes: int = 0
    public_input_bytes: int = 0
    public_key_amortized: bool = False
    note: str = ''

    @property
    def total_bytes(self) -> int:
        key = 0 if self.public_key_amortized else self.public_key_bytes
        return (self.signature_or_proof_bytes + key + self.commitment_bytes
                + self.public_input_bytes)

    def amortized(self) -> 'ArtifactProfile':
        """The repeat-sender view of this profile."""
        return replace(self, public_key_amortized=True)

    def to_json(self) -> dict[str, Any]:
        return {
            'name': self.name,
            'signature_or_proof_bytes': self.signature_or_proof_bytes,
            'public_key_bytes': self.public_key_bytes,
            'public_key_amortized': self.public_key_amortized,
            'commitment_bytes': self.commitment_bytes,
            'public_input_bytes': self.public_input_bytes,
            'total_bytes': self.total_bytes,
            **({'note': self.note} if self.note else {}),
        }


_BUILTIN = (
    ArtifactProfile('ML-DSA-44', 2420, 1312),
    ArtifactProfile('ML-DSA-65', 3309, 1952),
    ArtifactProfile('ML-DSA-87', 4627, 2592),
    ArtifactProfile('SLH-DSA-128f', 17088, 32),
    ArtifactProfile('FN-DSA-512', 666, 897),
    ArtifactProfile('Ed25519', 64, 32),
    ArtifactProfile('secp256k1', 71, 33),
)


def builtin_profiles() -> list[ArtifactProfile]:
    return list(_BUILTIN)


def find_profile(name: str) -> ArtifactProfile:
    for profile in _BUILTIN:
        if profile.name.lower() == name.lower():
            return profile
    choices = ', '.join(p.name.lower() for p in _BUILTIN)
    raise UsageError(f'unknown signature profile "{name}" (expected one of: {choices})')


def zkace_profile(measured_proof_bytes: int, note: str = '') -> ArtifactProfile:
    """Identity commitment, proof and one field element per public input."""
    if measured_proof_bytes <= 0:
        raise UsageError('proof size must be positive')
    return ArtifactProfile(
        name=f'zkace ({measured_proof_bytes} B proof)',
        signature_or_proof_bytes=measured_proof_bytes,
        commitment_bytes=COMMITMENT_BYTES,
        public_input_bytes=ENCODED_SIZE * len(PUBLIC_INPUT_FIELDS),
        note=note,
    )


@dataclass(frozen=True)
class ReductionReport:
    pqc: ArtifactProfile
    zk: ArtifactProfile

    @property
    def ratio(self) -> float:
        return self.pqc.total_bytes / self.zk.total_bytes

    def to_json(self) -> dict[str, Any]:
        return {
            'pqc': self.pqc.to_json(),
            'zk': self.zk.to_json(),
            'ratio': round(self.ratio, 2),
            'caveats': list(CAVEATS),
        }

    def render(self) -> str:
        rows = [
            (PROOF_ROW, self.pqc.signature_or_proof_bytes,
             self.zk.signature_or_proof_bytes),
            ('Public key', _key_bytes(self.pqc), _key_bytes(self.zk)),
            ('Identity commitment', self.pqc.commitment_bytes, self.zk.commitment_bytes),
            ('Public inputs', self.pqc.public_input_bytes, self.zk.public_input_bytes),
            ('Total', self.pqc.total_bytes, self.zk.total_bytes),
        ]
        label_width = max(len(r[0]) for r in rows)
        left = max(len(self.pqc.name), 8)
        right = max(len(self.zk.name), 8)
        lines = [f'{"":<{label_width}}  {self.pqc.name:>{left}}  {self.zk.name:>{right}}']
        for label, a, b in rows:
            line = f'{label:<{label_width}}  {a:>{left - 2},} B  {b:>{right - 2},} B'
            if label == PROOF_ROW and self.zk.note:
                line += f'  ({self.zk.note})'
            lines.append(line)
        lines.append('')
        lines.append(f'Reduction: {self.ratio:.1f}x')
        lines.append('')
        lines.append('Caveats:')
        lines.extend(f'  {caveat}' for caveat in CAVEATS)
        return '\n'.join(lines)


def _key_bytes(profile: ArtifactProfile) -> int:
    return 0 if profile.public_key_amortized else profile.public_key_bytes


def reduction_report(pqc: ArtifactProfile, zk: ArtifactProfile) -> ReductionReport:
    return ReductionReport(pqc, zk)


def pairing_bracket(pqc: Sequence[ArtifactProfile],
                    zk: Sequence[ArtifactProfile]) -> tuple[float, float]:
    """Smallest and largest reduction ratio over all pairings."""
    ratios = [p.total_bytes / z.total_bytes for p in pqc for z in zk]
    return min(ratios), max(ratios)


def zk_proof_bytes(choice: str) -> int:
    if choice == 'measured':
        return proof_size(BackendId.REAL)
    if choice == 'groth16-class':
        return COMPRESSED_GROTH16_PROOF_BYTES
    raise UsageError(f'unknown --zk choice "{choice}"')


def accounting_command(args: argparse.Namespace) -> int:
    """
    Execute the 'accounting' command.

    Args:
        args: Parsed command line arguments

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    pqc = find_profile(args.pqc)
    if args.repeat_sender:
        pqc = pqc.amortized()
    zk = zkace_profile(zk_proof_bytes(args.zk), PROOF_NOTES[args.zk])
    report = reduction_report(pqc, zk)

    ml_dsa = [find_profile(name) for name in ('ml-dsa-44', 'ml-dsa-87')]
    proofs = [zkace_profile(COMPRESSED_GROTH16_PROOF_BYTES),
              zkace_profile(proof_size(BackendId.REAL))]
    worst, best = pairing_bracket(ml_dsa, proofs)

    if args.format == 'json':
        document = report.to_json()
        document['bracket'] = {'worst': round(worst, 2), 'best': round(best, 2)}
        log.result(document)
    else:
        log.table(report.render())
        log.table(f'ML-DSA vs zkace pairings: {worst:.1f}x to {best:.1f}x')
    return 0
