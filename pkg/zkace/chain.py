"""
Consensus-side verification of authorization bundles.

process_tx runs the ordered checks below and stops at the first failure;
a rejected transaction never mutates state.

   6  tx_hash(payload) equals the declared tx_hash
   7  bundle mode matches the chain, id_com is registered, domain matches
   8  the proof verifies under the chain's verifying key
   9  replay predicate of the chain's mode
  10  apply: advance the nonce counter or insert the nullifier, height += 1

The state file is JSON with a SHA-256 checksum over the canonical body.
"""

import argparse
import base64
import binascii
import glob
import hashlib
import os
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterator, Sequence

from .backend import (
    BackendId,
    ProofBundle,
    VerifyingKey,
    batch_verify,
    load_bundle,
    load_verifying_key,
    verify,
)
from .circuit import ReplayMode, nonce_commitment, parse_mode
from .common import (
    FORMAT_VERSION,
    ChecksumError,
    CommandError,
    ConfigurationError,
    DuplicateIdentityError,
    FormatError,
    RejectedError,
    UsageError,
    canonical_json,
    check_format_version,
    read_bytes,
    read_json,
    write_json,
)
from .config import Profile
from .field import FieldElement
from .log import log
from .sponge import SpongeParams, domain_from_descriptor, tx_hash

DEFAULT_STATE_PATH = os.path.join('.zkace', 'chain.json')


class RejectReason(str, Enum):
    CONTEXT_BINDING = 'context-binding'
    MALFORMED_PUBLIC_INPUT = 'malformed-public-input'
    UNREGISTERED_IDENTITY = 'unregistered-identity'
    DOMAIN_MISMATCH = 'domain-mismatch'
    PROOF = 'proof'
    REPLAY = 'replay'

    @property
    def step(self) -> int:
        return _REASON_STEPS[self]


_REASON_STEPS = {
    RejectReason.CONTEXT_BINDING: 6,
    RejectReason.MALFORMED_PUBLIC_INPUT: 7,
    RejectReason.UNREGISTERED_IDENTITY: 7,
    RejectReason.DOMAIN_MISMATCH: 7,
    RejectReason.PROOF: 8,
    RejectReason.REPLAY: 9,
}


@dataclass(frozen=True)
class SubmittedTx:
    payload: bytes
    bundle: ProofBundle


@dataclass(frozen=True)
class TxResult:
    accepted: bool
    reason: RejectReason | None = None

    @property
    def step(self) -> int | None:
        return self.reason.step if self.reason else None

    def to_json(self) -> dict[str, Any]:
        if self.accepted:
            return {'accepted': True}
        return {'accepted': False, 'reason': self.reason.value, 'step': self.step}


ACCEPTED = TxResult(True)


class NonceRegistry:
    """Next expected nonce per identity; counters start at 0 and only grow."""

    def __init__(self, counters: dict[FieldElement, int] | None = None) -> None:
        self.counters: dict[FieldElement, int] = dict(counters or {})

    def expected(self, id_com: FieldElement) -> int:
        return self.counters.get(id_com, 0)

    def match(self, id_com: FieldElement, rp_com: FieldElement, window: int,
              params: SpongeParams | None = None) -> int | None:
        """Nonce in [expected, expected + window] whose commitment is rp_com, if any."""
        start = self.expected(id_com)
        for nonce in range(start, start + window + 1):
            if nonce_commitment(id_com, FieldElement(nonce), params) == rp_com:
                return nonce
        return None

    def advance(self, id_com: FieldElement, used: int) -> None:
        if used < self.expected(id_com):
            raise ValueError('nonce counters never decrease')
        self.counters[id_com] = used + 1

    def __len__(self) -> int:
        return len(self.counters)


class NullifierSet:
    """Append-only set that remembers insertion order."""

    def __init__(self, entries: Sequence[FieldElement] = ()) -> None:
        self._order: list[FieldElement] = []
        self._members: set[FieldElement] = set()
        for entry in entries:
            self.add(entry)

    def add(self, entry: FieldElement) -> None:
        if entry in self._members:
            raise ValueError(f'nullifier {entry.hex()} already spent')
        self._order.append(entry)
        self._members.add(entry)

    def __contains__(self, entry: object) -> bool:
        return entry in self._members

    def __iter__(self) -> Iterator[FieldElement]:
        return iter(self._order)

    def __len__(self) -> int:
        return len(self._order)


class ChainState:
    """Registered identities, replay state and verifier parameters of one chain."""

    def __init__(self, mode: ReplayMode, vk: VerifyingKey, expected_domain: FieldElement,
                 domain_descriptor: str | None = None, nonce_window: int = 0,
                 profile: Profile = Profile.PRODUCTION,
                 params: SpongeParams | None = None) -> None:
        if vk.mode is not mode:
            raise ConfigurationError(
                f'verifying key is for {vk.mode.value} mode, chain is {mode.value}')
        if profile is Profile.PRODUCTION and vk.backend is BackendId.MOCK:
            raise ConfigurationError('the mock backend is not permitted in the production profile')
        if nonce_window < 0:
            raise ConfigurationError('nonce window must be non-negative')
        self.mode = mode
        self.vk = vk
        self.expected_domain = expected_domain
        self.domain_descriptor = domain_descriptor
        self.nonce_window = nonce_window
        self.params = params
        self.height = 0
        self.registered_identities: set[FieldElement] = set()
        self.nonces = NonceRegistry()
        self.nullifiers = NullifierSet()

    @property
    def replay(self) -> NonceRegistry | NullifierSet:
        return self.nonces if self.mode is ReplayMode.NONCE else self.nullifiers

    def register_identity(self, id_com: FieldElement) -> None:
        if id_com in self.registered_identities:
            raise DuplicateIdentityError(f'identity {id_com.hex()} is already registered')
        self.registered_identities.add(id_com)

    def precheck(self, tx: SubmittedTx) -> TxResult | None:
        """Steps 6 and 7; None when both pass."""
        pub = tx.bundle.pub
        if tx_hash(tx.payload, self.params) != pub.tx_hash:
            return TxResult(False, RejectReason.CONTEXT_BINDING)
        if tx.bundle.mode is not self.mode:
            return TxResult(False, RejectReason.MALFORMED_PUBLIC_INPUT)
        if pub.id_com not in self.registered_identities:
            return TxResult(False, RejectReason.UNREGISTERED_IDENTITY)
        if pub.domain != self.expected_domain:
            return TxResult(False, RejectReason.DOMAIN_MISMATCH)
        # target is accepted as declared; the circuit binds it
        return None

    def _apply(self, tx: SubmittedTx) -> TxResult:
        """Steps 9 and 10 for a transaction whose proof has been verified."""
        pub = tx.bundle.pub
        if self.mode is ReplayMode.NONCE:
            used = self.nonces.match(pub.id_com, pub.rp_com, self.nonce_window, self.params)
            if used is None:
                return TxResult(False, RejectReason.REPLAY)
            self.nonces.advance(pub.id_com, used)
        else:
            if pub.rp_com in self.nullifiers:
                return TxResult(False, RejectReason.REPLAY)
            self.nullifiers.add(pub.rp_com)
        self.height += 1
        return ACCEPTED

    def process_tx(self, tx: SubmittedTx) -> TxResult:
        result = self.precheck(tx)
        if result is None:
            if not verify(self.vk, tx.bundle.proof, tx.bundle.pub):
                result = TxResult(False, RejectReason.PROOF)
            else:
                result = self._apply(tx)
        _trace(result)
        return result

    def process_batch(self, txs: Sequence[SubmittedTx]) -> list[TxResult]:
        """
        Process transactions in submission order.

        Observable results and state equal folding process_tx over txs.
        Proof checks of all transactions passing steps 6 and 7 are done in
        one batch verification, since they do not depend on replay state.
        """
        results: list[TxResult | None] = [self.precheck(tx) for tx in txs]
        pending = [i for i, result in enumerate(results) if result is None]
        bad_proofs: set[int] = set()
        if pending:
            outcome = batch_verify(self.vk, [(txs[i].bundle.proof, txs[i].bundle.pub)
                                             for i in pending])
            bad_proofs = {pending[k] for k in outcome.failing}
        final: list[TxResult] = []
        for i, tx in enumerate(txs):
            result = results[i]
            if result is None:
                result = TxResult(False, RejectReason.PROOF) if i in bad_proofs else self._apply(tx)
            _trace(result)
            final.append(result)
        return final

    def status(self) -> dict[str, Any]:
        document: dict[str, Any] = {
            'mode': self.mode.value,
            'registry': self.mode.registry_name,
            'backend': self.vk.backend.value,
            'domain': self.expected_domain.hex(),
            'height': self.height,
            'identities': len(self.registered_identities),
            'nonce_window': self.nonce_window,
        }
        if self.domain_descriptor:
            document['domain_descriptor'] = self.domain_descriptor
        if self.mode is ReplayMode.NONCE:
            document['nonce_counters'] = len(self.nonces)
        else:
            document['nullifiers'] = len(self.nullifiers)
        return document

    def body(self) -> dict[str, Any]:
        return {
            'mode': self.mode.value,
            'expected_domain': self.expected_domain.hex(),
            'domain_descriptor': self.domain_descriptor,
            'height': self.height,
            'identities': sorted(e.hex() for e in self.registered_identities),
            'nonces': {e.hex(): n for e, n in sorted(self.nonces.counters.items())},
            'nullifiers': [e.hex() for e in self.nullifiers],
            'nonce_window': self.nonce_window,
            'vk_b64': base64.b64encode(self.vk.to_bytes()).decode('ascii'),
        }

    def to_json(self) -> dict[str, Any]:
        body = self.body()
        return {
            'format_version': FORMAT_VERSION,
            'checksum': hashlib.sha256(canonical_json(body)).hexdigest(),
            'body': body,
        }

    @classmethod
    def from_json(cls, document: dict[str, Any], profile: Profile = Profile.PRODUCTION,
                  params: SpongeParams | None = None) -> 'ChainState':
        """
        Rebuild a chain state from its file document.

        Raises:
            VersionError: If format_version is not supported
            ChecksumError: If the body does not match its checksum
            FormatError: If the body is malformed
        """
        check_format_version(document, 'chain state')
        body = document.get('body')
        if not isinstance(body, dict) or not isinstance(document.get('checksum'), str):
            raise FormatError('chain state: missing body or checksum')
        if hashlib.sha256(canonical_json(body)).hexdigest() != document['checksum']:
            raise ChecksumError('chain state: checksum mismatch')
        try:
            vk = VerifyingKey.from_bytes(base64.b64decode(body['vk_b64'], validate=True))
            state = cls(
                mode=parse_mode(body['mode']),
                vk=vk,  # type: ignore[arg-type]
                expected_domain=FieldElement.from_hex(body['expected_domain']),
                domain_descriptor=body.get('domain_descriptor'),
                nonce_window=int(body['nonce_window']),
                profile=profile,
                params=params,
            )
            state.height = int(body['height'])
            state.registered_identities = {FieldElement.from_hex(e) for e in body['identities']}
            state.nonces = NonceRegistry(
                {FieldElement.from_hex(e): int(n) for e, n in body['nonces'].items()})
            state.nullifiers = NullifierSet([FieldElement.from_hex(e) for e in body['nullifiers']])
        except (KeyError, TypeError, AttributeError, binascii.Error) as e:
            raise FormatError(f'chain state: malformed body ({e})') from None
        except ValueError as e:
            raise FormatError(f'chain state: {e}') from None
        return state

    def save(self, path: str) -> None:
        write_json(path, self.to_json())

    @classmethod
    def load(cls, path: str, profile: Profile = Profile.PRODUCTION,
             params: SpongeParams | None = None) -> 'ChainState':
        return cls.from_json(read_json(path, 'chain state'), profile, params)


def _trace(result: TxResult) -> None:
    if result.accepted:
        log.verbose('steps 6-10 passed: accepted')
    else:
        log.verbose(f'rejected at step {result.step}: {result.reason.value}')


def load_commitment(path: str) -> dict[str, Any]:
    """Read an identity commitment file written by 'identity commit'."""
    document = read_json(path, 'identity commitment')
    check_format_version(document, 'identity commitment')
    for name in ('id_com', 'domain'):
        if name not in document:
            raise FormatError(f'identity commitment: missing field "{name}"')
    return document


def _profile(args: argparse.Namespace) -> Profile:
    return args.settings.profile


def _load_state(args: argparse.Namespace) -> ChainState:
    return ChainState.load(args.state, _profile(args))


def _submitted(bundle: ProofBundle, payload_path: str | None, where: str) -> SubmittedTx:
    if payload_path is not None:
        return SubmittedTx(read_bytes(payload_path, 'payload'), bundle)
    if bundle.payload is None:
        raise UsageError(f'{where}: bundle carries no payload; pass --payload')
    return SubmittedTx(bundle.payload, bundle)


def chain_init_command(args: argparse.Namespace) -> int:
    """
    Execute the 'chain init' command.

    Args:
        args: Parsed command line arguments

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    if os.path.exists(args.state) and not args.force:
        raise CommandError(f'chain state {args.state} already exists (use -f/--force to overwrite)')
    mode = parse_mode(args.mode)
    domain = domain_from_descriptor(args.domain)
    vk = load_verifying_key(args.vk)
    state = ChainState(mode, vk, domain, domain_descriptor=args.domain,
                       nonce_window=args.nonce_window, profile=_profile(args))
    state.save(args.state)
    log.heading('Initialized chain')
    log.detail('state', args.state)
    log.detail('mode', mode.value)
    log.detail('domain', domain.hex())
    log.result(state.status())
    return 0


def chain_register_command(args: argparse.Namespace) -> int:
    """
    Execute the 'chain register' command.

    Args:
        args: Parsed command line arguments

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    state = _load_state(args)
    commitment = load_commitment(args.commitment)
    domain = FieldElement.from_hex(commitment['domain'])
    if domain != state.expected_domain:
        raise RejectedError(f'commitment was made for domain {domain.hex()}, '
                            f'chain expects {state.expected_domain.hex()}',
                            RejectReason.DOMAIN_MISMATCH.value)
    id_com = FieldElement.from_hex(commitment['id_com'])
    state.register_identity(id_com)
    state.save(args.state)
    log.detail('registered', id_com.hex())
    log.result({'registered': id_com.hex(), 'identities': len(state.registered_identities)})
    return 0


def chain_submit_command(args: argparse.Namespace) -> int:
    """
    Execute the 'chain submit' command.

    Args:
        args: Parsed command line arguments

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    state = _load_state(args)
    tx = _submitted(load_bundle(args.bundle), args.payload, args.bundle)
    with log.working('Verifying transaction'):
        result = state.process_tx(tx)
    if not result.accepted:
        raise RejectedError(f'transaction rejected: {result.reason.value}',
                            result.reason.value, result.step)
    state.save(args.state)
    log.detail('height', state.height)
    log.result({**result.to_json(), 'height': state.height})
    return 0


def chain_batch_command(args: argparse.Namespace) -> int:
    """
    Execute the 'chain batch' command.

    Every *.json file in the directory is a bundle with an embedded payload;
    files are processed in name order.

    Args:
        args: Parsed command line arguments

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    if not os.path.isdir(args.directory):
        raise UsageError(f'not a directory: {args.directory}')
    paths = sorted(glob.glob(os.path.join(args.directory, '*.json')))
    if not paths:
        raise UsageError(f'no bundles found in {args.directory}')
    state = _load_state(args)
    txs = [_submitted(load_bundle(path), None, path) for path in paths]
    with log.working(f'Verifying {len(txs)} transactions'):
        results = state.process_batch(txs)
    state.save(args.state)
    accepted = sum(1 for r in results if r.accepted)
    log.detail('accepted', f'{accepted}/{len(results)}')
    log.result({
        'height': state.height,
        'accepted': accepted,
        'rejected': len(results) - accepted,
        'results': [{'bundle': os.path.basename(path), **result.to_json()}
                    for path, result in zip(paths, results)],
    })
    return 0


def chain_status_command(args: argparse.Namespace) -> int:
    """
    Execute the 'chain status' command.

    Args:
        args: Parsed command line arguments

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    state = _load_state(args)
    log.result(state.status())
    return 0


def chain_command(args: argparse.Namespace) -> int:
    """
    Dispatch chain subcommands.

    Args:
        args: Parsed command line arguments

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    if args.chain_action == 'init':
        return chain_init_command(args)
    elif args.chain_action == 'register':
        return chain_register_command(args)
    elif args.chain_action == 'submit':
        return chain_submit_command(args)
    elif args.chain_action == 'batch':
        return chain_batch_command(args)
    elif args.chain_action == 'status':
        return chain_status_command(args)
    else:
        raise UsageError('No chain action specified. Use "zkace chain -h" for help.')
