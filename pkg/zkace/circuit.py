"""
The authorization statement and its constraint system.

Public inputs, in this order: id_com, tx_hash, domain, target, rp_com.
Private witness: rev, salt, (alg_id, ctx_domain, index), nonce.

  C1  hash([rev, salt, domain], COMMITMENT) == id_com
  C2  hash([hash([rev, alg_id, ctx_domain, index], DERIVE_INNER)], DERIVE_OUTER) == target
  C3  auth = hash([rev, alg_id, ctx_domain, index, tx_hash, domain, nonce], AUTH)
  C4  rp_com == hash([id_com, nonce], REPLAY)      nonce registry
      rp_com == hash([auth, domain], REPLAY)       nullifier set
  C5  ctx_domain == domain

auth stays internal. In nonce mode it is computed and constrained but not
used downstream, so both modes have the same shape and size.
"""

import hashlib
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property, lru_cache
from typing import Any, Sequence

from .common import FORMAT_VERSION, FormatError, check_format_version
from .didp import DerivationContext, RootEntropy, derive_target
from .field import ZERO, FieldElement
from .r1cs import ConstraintSystem, Lc, combine
from .sponge import (
    DomainTag,
    SpongeParams,
    active_params,
    hash_fields,
    initial_state,
    tx_hash as hash_payload,
)

PUBLIC_INPUT_FIELDS = ('id_com', 'tx_hash', 'domain', 'target', 'rp_com')
GROUPS = ('C1', 'C2', 'C3', 'C4', 'C5')
INPUT_ARITIES = {'C1': '3', 'C2': '4+1', 'C3': '7', 'C4': '2', 'C5': 'equality'}
REFERENCE_COUNTS = {'C1': 805, 'C2': 1200, 'C3': 1615, 'C4': 400, 'C5': 4}
REFERENCE_TOTAL = 4024
COUNT_TOLERANCE = 0.15


class ReplayMode(str, Enum):
    NONCE = 'nonce'
    NULLIFIER = 'nullifier'

    @property
    def registry_name(self) -> str:
        return 'NonceRegistry' if self is ReplayMode.NONCE else 'NullifierSet'


def parse_mode(value: str) -> ReplayMode:
    try:
        return ReplayMode(value)
    except ValueError:
        raise FormatError(f'unknown replay mode "{value}"') from None


@dataclass(frozen=True)
class PublicInputs:
    id_com: FieldElement
    tx_hash: FieldElement
    domain: FieldElement
    target: FieldElement
    rp_com: FieldElement

    def elements(self) -> list[FieldElement]:
        return [getattr(self, name) for name in PUBLIC_INPUT_FIELDS]

    def values(self) -> list[int]:
        return [e.value for e in self.elements()]

    def to_bytes(self) -> bytes:
        return b''.join(e.to_bytes() for e in self.elements())

    def mutate(self, name: str, value: FieldElement) -> 'PublicInputs':
        """Copy with one named field replaced."""
        if name not in PUBLIC_INPUT_FIELDS:
            raise KeyError(name)
        return replace(self, **{name: value})

    def to_json(self, mode: ReplayMode) -> dict[str, Any]:
        document: dict[str, Any] = {'format_version': FORMAT_VERSION, 'mode': mode.value}
        for name in PUBLIC_INPUT_FIELDS:
            document[name] = getattr(self, name).hex()
        return document

    @classmethod
    def from_json(cls, document: Any) -> tuple['PublicInputs', ReplayMode]:
        """Parse public inputs; returns them with the mode they were produced for."""
        if not isinstance(document, dict):
            raise FormatError('public_inputs must be a JSON object')
        check_format_version(document, 'public inputs')
        missing = [name for name in PUBLIC_INPUT_FIELDS if name not in document]
        if missing or 'mode' not in document:
            raise FormatError(f'public inputs: missing {", ".join(missing or ["mode"])}')
        pub = cls(**{name: FieldElement.from_hex(document[name]) for name in PUBLIC_INPUT_FIELDS})
        return pub, parse_mode(document['mode'])


@dataclass(frozen=True)
class AuthorizationWitness:
    rev_field: FieldElement
    salt: FieldElement
    ctx: DerivationContext
    nonce: FieldElement
    aux: tuple[FieldElement, ...] = ()

    def to_json(self) -> dict[str, Any]:
        """Plaintext witness, for test vector generation only."""
        return {
            'format_version': FORMAT_VERSION,
            'rev_field': self.rev_field.hex(),
            'salt': self.salt.hex(),
            'alg_id': self.ctx.alg_id.hex(),
            'ctx_domain': self.ctx.ctx_domain.hex(),
            'index': self.ctx.index.hex(),
            'nonce': self.nonce.hex(),
        }

    def __repr__(self) -> str:
        return 'AuthorizationWitness(<redacted>)'


_ZERO_WITNESS = AuthorizationWitness(ZERO, ZERO, DerivationContext(ZERO, ZERO, ZERO), ZERO)
_ZERO_PUBLIC = PublicInputs(ZERO, ZERO, ZERO, ZERO, ZERO)


def _rev_field(rev: RootEntropy | FieldElement) -> FieldElement:
    return rev.rev_field if isinstance(rev, RootEntropy) else rev


def identity_commitment(rev: RootEntropy | FieldElement, salt: FieldElement, domain: FieldElement,
                        params: SpongeParams | None = None) -> FieldElement:
    return hash_fields([_rev_field(rev), salt, domain], DomainTag.COMMITMENT, params)


def auth_token(rev: RootEntropy | FieldElement, ctx: DerivationContext, tx_hash: FieldElement,
               domain: FieldElement, nonce: FieldElement,
               params: SpongeParams | None = None) -> FieldElement:
    """Native evaluation of the C3 hash."""
    inputs = [_rev_field(rev), *ctx.elements(), tx_hash, domain, nonce]
    return hash_fields(inputs, DomainTag.AUTH, params)


def nonce_commitment(id_com: FieldElement, nonce: FieldElement,
                     params: SpongeParams | None = None) -> FieldElement:
    return hash_fields([id_com, nonce], DomainTag.REPLAY, params)


def nullifier(auth: FieldElement, domain: FieldElement,
              params: SpongeParams | None = None) -> FieldElement:
    return hash_fields([auth, domain], DomainTag.REPLAY, params)


def replay_commitment(mode: ReplayMode, id_com: FieldElement, auth: FieldElement,
                      nonce: FieldElement, domain: FieldElement,
                      params: SpongeParams | None = None) -> FieldElement:
    """rp_com for the given replay model."""
    if mode is ReplayMode.NONCE:
        return nonce_commitment(id_com, nonce, params)
    return nullifier(auth, domain, params)


def make_statement(rev: RootEntropy, salt: FieldElement, ctx: DerivationContext,
                   nonce: FieldElement, tx_payload: bytes, domain: FieldElement,
                   mode: ReplayMode, params: SpongeParams | None = None,
                   ) -> tuple[AuthorizationWitness, PublicInputs]:
    """
    Assemble the witness and public inputs of one authorization.

    Args:
        rev: Root entropy of the signer
        salt: Identity commitment salt
        ctx: Derivation context; ctx.ctx_domain must equal domain
        nonce: Per-identity nonce
        tx_payload: Transaction bytes being authorized
        domain: Chain/application domain element
        mode: Replay model selecting the rp_com construction
        params: Sponge parameters (defaults to the active table)

    Returns:
        (witness, public inputs)
    """
    params = params or active_params()
    rev_field = rev.rev_field
    tx = hash_payload(tx_payload, params)
    id_com = identity_commitment(rev_field, salt, domain, params)
    target = derive_target(rev, ctx, params)
    auth = auth_token(rev_field, ctx, tx, domain, nonce, params)
    rp_com = replay_commitment(mode, id_com, auth, nonce, domain, params)
    witness = AuthorizationWitness(rev_field=rev_field, salt=salt, ctx=ctx, nonce=nonce)
    pub = PublicInputs(id_com=id_com, tx_hash=tx, domain=domain, target=target, rp_com=rp_com)
    return witness, pub


def failing_relations(witness: AuthorizationWitness, pub: PublicInputs, mode: ReplayMode,
                      params: SpongeParams | None = None) -> list[str]:
    """Constraint groups a witness violates, computed natively."""
    params = params or active_params()
    rev = witness.rev_field
    ctx = witness.ctx
    failed = []
    if identity_commitment(rev, witness.salt, pub.domain, params) != pub.id_com:
        failed.append('C1')
    key = hash_fields([rev, *ctx.elements()], DomainTag.DERIVE_INNER, params)
    if hash_fields([key], DomainTag.DERIVE_OUTER, params) != pub.target:
        failed.append('C2')
    auth = auth_token(rev, ctx, pub.tx_hash, pub.domain, witness.nonce, params)
    rp_com = replay_commitment(mode, pub.id_com, auth, witness.nonce, pub.domain, params)
    if rp_com != pub.rp_com:
        failed.append('C4')
    if ctx.ctx_domain != pub.domain:
        failed.append('C5')
    return failed


def _sbox(cs: ConstraintSystem, x: Lc, alpha: int) -> Lc:
    # square-and-multiply: x^17 costs four squarings and one multiplication
    result = x
    for bit in bin(alpha)[3:]:
        result = cs.mul(result, result)
        if bit == '1':
            result = cs.mul(result, x)
    return result


def _permute_gadget(cs: ConstraintSystem, state: list[Lc], params: SpongeParams) -> list[Lc]:
    t = params.t
    rc = params.round_constants
    half = params.full_rounds // 2
    partial_end = half + params.partial_rounds
    for r in range(params.rounds):
        state = [s.add_const(rc[r * t + i]) for i, s in enumerate(state)]
        if r < half or r >= partial_end:
            state = [_sbox(cs, s, params.alpha) for s in state]
        else:
            state = [_sbox(cs, state[0], params.alpha)] + state[1:]
        state = [combine(zip(row, state)) for row in params.mds]
    return state


def hash_gadget(cs: ConstraintSystem, inputs: Sequence[Lc], tag: DomainTag,
                params: SpongeParams, label: str) -> Lc:
    """In-circuit counterpart of sponge.hash_fields; records the digest under label."""
    state = [Lc.constant(v) for v in initial_state(int(tag), len(inputs), params)]
    cap = params.capacity
    for i in range(0, len(inputs), params.rate):
        for j, x in enumerate(inputs[i:i + params.rate]):
            state[cap + j] = state[cap + j] + x
        state = _permute_gadget(cs, state, params)
    digest = state[cap]
    cs.trace[label] = digest.value
    return digest


@dataclass(frozen=True)
class ConstraintReport:
    mode: ReplayMode
    counts: dict[str, int]
    total: int
    hash_invocations: int
    wires: int
    public_inputs: int

    @property
    def deviation(self) -> float:
        """Relative difference of the total from the reference breakdown."""
        return (self.total - REFERENCE_TOTAL) / REFERENCE_TOTAL

    @property
    def within_tolerance(self) -> bool:
        return abs(self.deviation) <= COUNT_TOLERANCE

    def to_json(self) -> dict[str, Any]:
        return {
            'format_version': FORMAT_VERSION,
            'mode': self.mode.value,
            'constraints': dict(self.counts),
            'total': self.total,
            'hash_invocations': self.hash_invocations,
            'arities': dict(INPUT_ARITIES),
            'reference': {'constraints': dict(REFERENCE_COUNTS), 'total': REFERENCE_TOTAL},
            'deviation': round(self.deviation, 6),
            'within_tolerance': self.within_tolerance,
            'wires': self.wires,
            'public_inputs': self.public_inputs,
        }


class Circuit:
    """The authorization circuit for one replay mode and parameter table."""

    def __init__(self, mode: ReplayMode, params: SpongeParams) -> None:
        self.mode = mode
        self.params = params

    def synthesize(self, witness: AuthorizationWitness | None = None,
                   pub: PublicInputs | None = None) -> ConstraintSystem:
        """Build the constraint system with the given assignment (zeros if omitted)."""
        witness = witness or _ZERO_WITNESS
        pub = pub or _ZERO_PUBLIC
        params = self.params
        cs = ConstraintSystem(num_public=len(PUBLIC_INPUT_FIELDS))

        id_com, tx, domain, target, rp_com = (
            cs.public(name, value) for name, value in zip(PUBLIC_INPUT_FIELDS, pub.values()))
        rev = cs.private(witness.rev_field.value)
        salt = cs.private(witness.salt.value)
        alg_id = cs.private(witness.ctx.alg_id.value)
        ctx_domain = cs.private(witness.ctx.ctx_domain.value)
        index = cs.private(witness.ctx.index.value)
        nonce = cs.private(witness.nonce.value)

        cs.group('C1')
        commitment = hash_gadget(cs, [rev, salt, domain], DomainTag.COMMITMENT, params, 'C1')
        cs.enforce_equal(commitment, id_com)

        cs.group('C2')
        key = hash_gadget(cs, [rev, alg_id, ctx_domain, index], DomainTag.DERIVE_INNER,
                          params, 'C2-inner')
        derived = hash_gadget(cs, [key], DomainTag.DERIVE_OUTER, params, 'C2-outer')
        cs.enforce_equal(derived, target)

        cs.group('C3')
        auth = hash_gadget(cs, [rev, alg_id, ctx_domain, index, tx, domain, nonce],
                           DomainTag.AUTH, params, 'C3')

        cs.group('C4')
        if self.mode is ReplayMode.NONCE:
            replay = hash_gadget(cs, [id_com, nonce], DomainTag.REPLAY, params, 'C4')
        else:
            replay = hash_gadget(cs, [auth, domain], DomainTag.REPLAY, params, 'C4')
        cs.enforce_equal(replay, rp_com)

        cs.group('C5')
        cs.enforce_equal(ctx_domain, domain)
        return cs

    @cached_property
    def shape(self) -> ConstraintSystem:
        return self.synthesize()

    @cached_property
    def circuit_id(self) -> bytes:
        """Binds keys to this mode, parameter table and constraint matrices."""
        h = hashlib.sha256(b'zkace-circuit-v1')
        h.update(self.mode.value.encode())
        h.update(bytes.fromhex(self.params.digest))
        h.update(self.shape.digest())
        return h.digest()

    def report(self) -> ConstraintReport:
        cs = self.shape
        counts = cs.counts()
        ordered = {group: counts.get(group, 0) for group in GROUPS}
        return ConstraintReport(
            mode=self.mode,
            counts=ordered,
            total=len(cs.constraints),
            hash_invocations=len(cs.trace),
            wires=cs.num_wires,
            public_inputs=cs.num_public,
        )


@lru_cache(maxsize=8)
def _cached_circuit(mode: ReplayMode, params: SpongeParams) -> Circuit:
    return Circuit(mode, params)


def build_circuit(mode: ReplayMode, params: SpongeParams | None = None) -> Circuit:
    return _cached_circuit(mode, params or active_params())


def count_constraints(mode: ReplayMode, params: SpongeParams | None = None) -> ConstraintReport:
    return build_circuit(mode, params).report()

