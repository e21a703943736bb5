"""Shared test helpers for zkace tests."""

import functools
import hashlib
import os

import pytest
from hypothesis import strategies as st

from zkace.backend import BackendId, ProofBundle, prove, setup
from zkace.chain import ChainState, SubmittedTx
from zkace.circuit import ReplayMode, make_statement
from zkace.config import Profile
from zkace.didp import DerivationContext, RootEntropy
from zkace.field import MODULUS, FieldElement
from zkace.sponge import default_params

SEED = hashlib.sha256(b'zkace-tests').digest()
DOMAIN = FieldElement(5)
SALT = FieldElement(42)
PAYLOAD = bytes(range(100))
TEST_ENV = {'ZKACE_PROFILE': 'test', 'ZKACE_KDF_COST': '4'}

# Groth16 setup and proving over the full circuit take tens of seconds.
slow = pytest.mark.skipif(not os.environ.get('ZKACE_RUN_SLOW'),
                          reason='set ZKACE_RUN_SLOW=1 to run Groth16 end to end')

# Trials per game on the Groth16 backend; each trial proves several statements.
GAME_TRIALS_REAL = int(os.environ.get('ZKACE_GAME_TRIALS', '2'))

# Random statements per mode proved and verified with Groth16.
REAL_STATEMENTS = int(os.environ.get('ZKACE_REAL_STATEMENTS', '2'))


def sample_rev():
    """Root entropy 00 01 02 .. 1f, the fixed input of the frozen vectors."""
    return RootEntropy(bytes(range(32)))


def sample_statement(mode=ReplayMode.NONCE, nonce=0, payload=PAYLOAD):
    ctx = DerivationContext.for_domain(DOMAIN)
    return make_statement(sample_rev(), SALT, ctx, FieldElement(nonce), payload, DOMAIN, mode)


field_values = st.integers(min_value=0, max_value=MODULUS - 1)


@st.composite
def statements(draw, mode):
    """Random honest (witness, public inputs) for mode."""
    rev = RootEntropy(draw(st.binary(min_size=32, max_size=32)))
    domain = FieldElement(draw(field_values))
    ctx = DerivationContext.for_domain(domain, alg_id=draw(st.integers(1, 2 ** 16)),
                                       index=draw(st.integers(0, 2 ** 32)))
    nonce = FieldElement(draw(st.integers(0, 2 ** 64)))
    payload = draw(st.binary(max_size=256))
    return make_statement(rev, FieldElement(draw(field_values)), ctx, nonce, payload, domain, mode)


def reference_hash(values, tag):
    """Straight-line sponge evaluation, written independently of zkace.sponge."""
    params = default_params()
    p = MODULUS
    state = [((tag << 64) + len(values)) % p, 0, 0]
    padded = list(values) + [0] * (len(values) % 2)
    for i in range(0, len(padded), 2):
        state[1] = (state[1] + padded[i]) % p
        state[2] = (state[2] + padded[i + 1]) % p
        for r in range(params.full_rounds + params.partial_rounds):
            state = [(state[k] + params.round_constants[3 * r + k]) % p for k in range(3)]
            full = r < 4 or r >= 4 + params.partial_rounds
            for k in range(3 if full else 1):
                state[k] = pow(state[k], 17, p)
            state = [sum(params.mds[row][k] * state[k] for k in range(3)) % p
                     for row in range(3)]
    return state[1]


@functools.lru_cache(maxsize=None)
def mock_keys(mode=ReplayMode.NONCE):
    return setup(mode, BackendId.MOCK, SEED, Profile.TEST)


@functools.lru_cache(maxsize=None)
def real_keys(mode=ReplayMode.NONCE):
    return setup(mode, BackendId.REAL, SEED, Profile.TEST)


def mock_chain(mode=ReplayMode.NONCE, domain=DOMAIN, nonce_window=0):
    _, vk = mock_keys(mode)
    return ChainState(mode, vk, domain, nonce_window=nonce_window, profile=Profile.TEST)


def submitted(pk, witness, pub, payload=PAYLOAD):
    return SubmittedTx(payload, ProofBundle(prove(pk, witness, pub), pub, pk.mode, payload))
