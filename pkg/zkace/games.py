"""
Adversarial games against the full verification stack.

Each game runs structural strategies that do not know the victim's root
entropy and counts how often the chain accepts a tuple meeting the win
condition. Honest controls run alongside, so a broken pipeline shows up as
failed controls rather than as a vacuous zero-win result.

The adversary sees every accepted tuple (passive transcript observation).
"""

import argparse
import os
import random
from dataclasses import dataclass, field
from typing import Any, Callable

from .backend import (
    AuthorizationProof,
    BackendId,
    ProofBundle,
    ProvingKey,
    VerifyingKey,
    load_proving_key,
    load_verifying_key,
    mock_authenticator,
    parse_backend,
    proof_size,
    prove,
    setup,
    verify,
)
from .chain import ChainState, SubmittedTx
from .circuit import (
    PUBLIC_INPUT_FIELDS,
    AuthorizationWitness,
    PublicInputs,
    ReplayMode,
    identity_commitment,
    make_statement,
    nonce_commitment,
    parse_mode,
)
from .common import CommandError, UsageError
from .config import Profile
from .didp import DerivationContext, RootEntropy
from .field import FieldElement, random_element
from .log import log
from .prove import parse_seed
from .sponge import domain_from_descriptor, tx_hash

GAMES = ('auth', 'replay', 'subst', 'domain')
DEFAULT_TRIALS = 100
HOME_DOMAIN = 'zkace-games:home'
FOREIGN_DOMAIN = 'zkace-games:foreign'
PAYLOAD_SIZE = 64


@dataclass
class GameResult:
    game: str
    trials: int
    adversary_wins: int = 0
    strategies_exercised: list[str] = field(default_factory=list)
    controls: int = 0
    controls_accepted: int = 0

    @property
    def passed(self) -> bool:
        return self.adversary_wins == 0 and self.controls_accepted == self.controls

    def attempt(self, strategy: str, accepted: bool) -> None:
        if strategy not in self.strategies_exercised:
            self.strategies_exercised.append(strategy)
        if accepted:
            self.adversary_wins += 1
            log.verbose(f'{self.game}: strategy {strategy} was accepted')

    def control(self, accepted: bool) -> None:
        self.controls += 1
        if accepted:
            self.controls_accepted += 1
        else:
            log.verbose(f'{self.game}: honest control rejected')

    def to_json(self) -> dict[str, Any]:
        return {
            'game': self.game,
            'trials': self.trials,
            'adversary_wins': self.adversary_wins,
            'strategies_exercised': list(self.strategies_exercised),
            'controls': self.controls,
            'controls_accepted': self.controls_accepted,
            'passed': self.passed,
        }


@dataclass(frozen=True)
class GameKeys:
    pk: ProvingKey
    vk: VerifyingKey

    @property
    def mode(self) -> ReplayMode:
        return self.pk.mode

    @property
    def profile(self) -> Profile:
        # chains refuse mock keys in production
        return Profile.TEST if self.vk.backend is BackendId.MOCK else Profile.PRODUCTION


def game_keys(mode: ReplayMode, backend: BackendId = BackendId.REAL,
              seed: bytes | None = None) -> GameKeys:
    pk, vk = setup(mode, backend, seed, Profile.TEST if seed else Profile.PRODUCTION)
    return GameKeys(pk, vk)


def random_payload() -> bytes:
    return os.urandom(PAYLOAD_SIZE)


class Signer:
    """An honest identity: root entropy, salt and the next nonce for one domain."""

    def __init__(self, domain: FieldElement, rev: RootEntropy | None = None) -> None:
        self.rev = rev or RootEntropy.generate()
        self.domain = domain
        self.salt = random_element()
        self.id_com = identity_commitment(self.rev, self.salt, domain)
        self.next_nonce = 0

    def statement(self, mode: ReplayMode, payload: bytes,
                  nonce: int | None = None) -> tuple[AuthorizationWitness, PublicInputs]:
        if nonce is None:
            nonce = self.next_nonce
            self.next_nonce += 1
        ctx = DerivationContext.for_domain(self.domain)
        return make_statement(self.rev, self.salt, ctx, FieldElement(nonce), payload,
                              self.domain, mode)

    def authorize(self, keys: GameKeys, payload: bytes | None = None,
                  nonce: int | None = None) -> SubmittedTx:
        payload = payload if payload is not None else random_payload()
        witness, pub = self.statement(keys.mode, payload, nonce)
        proof = prove(keys.pk, witness, pub)
        return SubmittedTx(payload, ProofBundle(proof, pub, keys.mode, payload))


def new_chain(keys: GameKeys, descriptor: str = HOME_DOMAIN) -> ChainState:
    return ChainState(keys.mode, keys.vk, domain_from_descriptor(descriptor),
                      domain_descriptor=descriptor, profile=keys.profile)


def _resubmit(tx: SubmittedTx, keys: GameKeys, pub: PublicInputs,
              proof: AuthorizationProof | None = None, payload: bytes | None = None) -> SubmittedTx:
    payload = tx.payload if payload is None else payload
    bundle = ProofBundle(proof or tx.bundle.proof, pub, keys.mode, payload)
    return SubmittedTx(payload, bundle)


def _targeted_pub(keys: GameKeys, chain: ChainState, victim: Signer,
                  template: PublicInputs, payload: bytes) -> PublicInputs:
    """Public inputs that pass every chain check for the victim except the proof."""
    if keys.mode is ReplayMode.NONCE:
        rp_com = nonce_commitment(victim.id_com, FieldElement(chain.nonces.expected(victim.id_com)))
    else:
        rp_com = random_element()
    return PublicInputs(id_com=victim.id_com, tx_hash=tx_hash(payload), domain=victim.domain,
                        target=template.target, rp_com=rp_com)


def game_auth(trials: int, keys: GameKeys) -> GameResult:
    """Forge an authorization for an identity whose root entropy is withheld."""
    result = GameResult('auth', trials)
    for _ in range(trials):
        chain = new_chain(keys)
        victim = Signer(chain.expected_domain)
        adversary = Signer(chain.expected_domain)
        chain.register_identity(victim.id_com)
        chain.register_identity(adversary.id_com)

        transcript = victim.authorize(keys)
        result.control(chain.process_tx(transcript).accepted)

        payload = random_payload()
        pub = _targeted_pub(keys, chain, victim, transcript.bundle.pub, payload)

        for strategy, size in (('random-proof-bytes', proof_size(keys.vk.backend)),
                               ('random-192-byte-blob', 192)):
            blob = AuthorizationProof(os.urandom(size), keys.vk.backend, keys.vk.circuit_id)
            result.attempt(strategy, chain.process_tx(_resubmit(transcript, keys, pub, blob,
                                                                payload)).accepted)

        own = adversary.authorize(keys, payload)
        retargeted = own.bundle.pub.mutate('id_com', victim.id_com).mutate('rp_com', pub.rp_com)
        result.attempt('other-identity-retarget',
                       chain.process_tx(_resubmit(own, keys, retargeted)).accepted)

        foreign_pk, _ = setup(keys.mode, BackendId.MOCK, os.urandom(32), Profile.TEST)
        forged = AuthorizationProof(mock_authenticator(foreign_pk.payload, keys.vk.circuit_id, pub),
                                    BackendId.MOCK, keys.vk.circuit_id)
        result.attempt('mock-proof-to-verifier',
                       chain.process_tx(_resubmit(transcript, keys, pub, forged,
                                                  payload)).accepted)

        guess = Signer(victim.domain)
        witness, _ = guess.statement(keys.mode, payload)
        bad_proof = prove(keys.pk, witness, pub, allow_unsatisfied=True)
        result.attempt('random-rev-witness',
                       chain.process_tx(_resubmit(transcript, keys, pub, bad_proof,
                                                  payload)).accepted)

        rebound = transcript.bundle.pub.mutate('tx_hash', pub.tx_hash).mutate('rp_com', pub.rp_com)
        result.attempt('transcript-rebinding',
                       chain.process_tx(_resubmit(transcript, keys, rebound,
                                                  payload=payload)).accepted)
    return result


def game_replay(trials: int, keys: GameKeys) -> GameResult:
    """Get a second authorization accepted from a single honest one."""
    result = GameResult('replay', trials)
    for _ in range(trials):
        chain = new_chain(keys)
        signer = Signer(chain.expected_domain)
        chain.register_identity(signer.id_com)

        first = signer.authorize(keys)
        result.control(chain.process_tx(first).accepted)

        result.attempt('direct-replay', chain.process_tx(first).accepted)

        if keys.mode is ReplayMode.NONCE:
            stale = signer.authorize(keys, nonce=0)
            result.attempt('stale-nonce', chain.process_tx(stale).accepted)
        else:
            witness, pub = signer.statement(keys.mode, first.payload, nonce=0)
            again = _resubmit(first, keys, pub, prove(keys.pk, witness, pub))
            result.attempt('same-authorization-reproved', chain.process_tx(again).accepted)

        fresh = signer.authorize(keys, nonce=1)
        batch = chain.process_batch([fresh, fresh])
        result.control(batch[0].accepted)
        result.attempt('intra-batch-duplicate', batch[1].accepted)
    return result


def _mutation(name: str, pub: PublicInputs) -> tuple[PublicInputs, bytes | None]:
    """Random replacement for one public input, with a matching payload for tx_hash."""
    if name == 'tx_hash':
        payload = random_payload()
        return pub.mutate(name, tx_hash(payload)), payload
    return pub.mutate(name, random_element()), None


def _permissive_chain(keys: GameKeys, pub: PublicInputs) -> ChainState:
    """A chain on which only the proof check can reject pub."""
    chain = new_chain(keys)
    chain.expected_domain = pub.domain
    chain.register_identity(pub.id_com)
    return chain


def game_subst(trials: int, keys: GameKeys, rng: random.Random | None = None) -> GameResult:
    """Reuse an honest proof with modified public inputs."""
    rng = rng or random.Random()
    result = GameResult('subst', trials)
    for _ in range(trials):
        home = new_chain(keys)
        signer = Signer(home.expected_domain)
        honest = signer.authorize(keys)
        pub = honest.bundle.pub

        control_chain = _permissive_chain(keys, pub)
        result.control(control_chain.process_tx(honest).accepted)

        for name in PUBLIC_INPUT_FIELDS:
            mutated, payload = _mutation(name, pub)
            chain = _permissive_chain(keys, mutated)
            tx = _resubmit(honest, keys, mutated, payload=payload)
            result.attempt(f'single-field-{name}', chain.process_tx(tx).accepted)

        first, second = rng.sample(PUBLIC_INPUT_FIELDS, 2)
        mutated, _ = _mutation(first, pub)
        mutated, _ = _mutation(second, mutated)
        result.attempt('two-field', verify(keys.vk, honest.bundle.proof, mutated))
    return result


def game_domain(trials: int, keys: GameKeys) -> GameResult:
    """Carry an authorization from one domain to another."""
    result = GameResult('domain', trials)
    for _ in range(trials):
        home = new_chain(keys, HOME_DOMAIN)
        foreign = new_chain(keys, FOREIGN_DOMAIN)
        rev = RootEntropy.generate()
        on_home = Signer(home.expected_domain, rev)
        on_foreign = Signer(foreign.expected_domain, rev)
        home.register_identity(on_home.id_com)
        foreign.register_identity(on_foreign.id_com)

        honest = on_home.authorize(keys)
        result.control(home.process_tx(honest).accepted)

        result.attempt('raw-reuse', foreign.process_tx(honest).accepted)

        pub = honest.bundle.pub.mutate('domain', foreign.expected_domain)
        result.attempt('rewrite-domain', foreign.process_tx(_resubmit(honest, keys, pub)).accepted)

        rp_com = pub.rp_com
        if keys.mode is ReplayMode.NONCE:
            rp_com = nonce_commitment(on_foreign.id_com, FieldElement(0))
        pub = pub.mutate('id_com', on_foreign.id_com).mutate('rp_com', rp_com)
        result.attempt('rewrite-domain-and-identity',
                       foreign.process_tx(_resubmit(honest, keys, pub)).accepted)

        native = on_foreign.authorize(keys)
        result.control(foreign.process_tx(native).accepted)
    return result


_GAME_FUNCTIONS: dict[str, Callable[[int, GameKeys], GameResult]] = {
    'auth': game_auth,
    'replay': game_replay,
    'subst': game_subst,
    'domain': game_domain,
}


def run_games(names: list[str], trials: int, keys: GameKeys) -> list[GameResult]:
    results = []
    for name in names:
        with log.working(f'Running {name} game ({trials} trials)'):
            results.append(_GAME_FUNCTIONS[name](trials, keys))
    return results


def _keys_for(args: argparse.Namespace, mode: ReplayMode) -> GameKeys:
    if args.keys:
        keys = GameKeys(load_proving_key(f'{args.keys}.pk'), load_verifying_key(f'{args.keys}.vk'))
        if keys.mode is not mode:
            raise UsageError(f'keys {args.keys} are for {keys.mode.value} mode')
        return keys
    backend = parse_backend(args.backend)
    with log.working(f'Generating {backend.value} keys'):
        return game_keys(mode, backend, parse_seed(args.seed))


def games_command(args: argparse.Namespace) -> int:
    """
    Execute the 'games run' command.

    Args:
        args: Parsed command line arguments

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    if args.trials < 1:
        raise UsageError('--trials must be at least 1')
    mode = parse_mode(args.mode)
    names = list(GAMES) if args.game == 'all' else [args.game]
    log.heading(f'Adversarial games ({mode.value} mode)')
    keys = _keys_for(args, mode)
    results = run_games(names, args.trials, keys)
    for game in results:
        log.detail(game.game, f'{game.adversary_wins} wins, '
                              f'{game.controls_accepted}/{game.controls} controls accepted')
    soundness_evidence = keys.vk.backend is BackendId.REAL
    if not soundness_evidence:
        log.warning('mock backend: results exercise the pipeline only and are not '
                    'soundness evidence (use --backend real)')
    log.result({
        'mode': mode.value,
        'backend': keys.vk.backend.value,
        'soundness_evidence': soundness_evidence,
        'games': [game.to_json() for game in results],
    })
    failed = [game.game for game in results if not game.passed]
    if failed:
        raise CommandError(f'games failed: {", ".join(failed)}')
    return 0
