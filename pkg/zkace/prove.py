"""
Key generation, proving and standalone verification commands.
"""

import argparse

from .backend import (
    ProofBundle,
    load_bundle,
    load_proving_key,
    load_verifying_key,
    parse_backend,
    prove,
    save_bundle,
    save_key,
    setup,
    verify,
)
from .chain import load_commitment
from .circuit import make_statement, parse_mode
from .common import RejectedError, UsageError, read_bytes, timed, write_json
from .didp import DerivationContext
from .field import FieldElement
from .identity import open_identity, read_credential
from .log import log


def parse_seed(text: str | None) -> bytes | None:
    if text is None:
        return None
    try:
        seed = bytes.fromhex(text)
    except ValueError:
        raise UsageError('--seed must be hex') from None
    if len(seed) != 32:
        raise UsageError(f'--seed must be 32 bytes (64 hex digits), got {len(seed)} bytes')
    return seed


def setup_command(args: argparse.Namespace) -> int:
    """
    Execute the 'setup' command.

    Args:
        args: Parsed command line arguments

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    mode = parse_mode(args.mode)
    backend = parse_backend(args.backend)
    seed = parse_seed(args.seed)
    log.heading(f'Generating {backend.value} keys for {mode.value} mode')
    with log.working('Running setup'):
        result = timed(setup, mode, backend, seed, args.settings.profile)
    pk, vk = result.value
    log.elapsed(result.elapsed)
    pk_path = f'{args.out}.pk'
    vk_path = f'{args.out}.vk'
    save_key(pk_path, pk)
    save_key(vk_path, vk)
    log.detail('proving key', pk_path)
    log.detail('verifying key', vk_path)
    log.result({
        'mode': mode.value,
        'backend': backend.value,
        'circuit_id': vk.circuit_id.hex(),
        'proving_key': pk_path,
        'verifying_key': vk_path,
    })
    return 0


def prove_command(args: argparse.Namespace) -> int:
    """
    Execute the 'prove' command.

    Args:
        args: Parsed command line arguments

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    credential = read_credential(args)
    if args.nonce < 0:
        raise UsageError('--nonce must be non-negative')
    pk = load_proving_key(args.pk)
    commitment = load_commitment(args.commitment)
    domain = FieldElement.from_hex(commitment['domain'])
    salt = FieldElement.from_hex(commitment['salt'])
    payload = read_bytes(args.payload, 'payload')

    log.heading(f'Proving authorization ({pk.mode.value} mode, {pk.backend.value} backend)')
    with log.working('Unsealing identity'):
        rev = open_identity(args.identity, credential)
    with rev:
        ctx = DerivationContext.for_domain(domain, alg_id=args.alg_id, index=args.index)
        witness, pub = make_statement(rev, salt, ctx, FieldElement(args.nonce), payload,
                                      domain, pk.mode)
    if pub.id_com.hex() != commitment['id_com']:
        raise UsageError(f'identity {args.identity} does not match commitment {args.commitment}')

    if args.dump_witness_insecure:
        log.warning(f'INSECURE: writing the plaintext witness to {args.dump_witness_insecure}')
        write_json(args.dump_witness_insecure, witness.to_json())

    with log.working('Generating proof'):
        result = timed(prove, pk, witness, pub)
    log.elapsed(result.elapsed)
    proof = result.value
    bundle = ProofBundle(proof=proof, pub=pub, mode=pk.mode, payload=payload)
    save_bundle(args.out, bundle)
    log.detail('bundle', args.out)
    log.detail('proof size', f'{proof.size_bytes} bytes')
    log.result({'bundle': args.out, 'proof_size': proof.size_bytes,
                'public_inputs': pub.to_json(pk.mode)})
    return 0


def verify_command(args: argparse.Namespace) -> int:
    """
    Execute the 'verify' command.

    Args:
        args: Parsed command line arguments

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    vk = load_verifying_key(args.vk)
    bundle = load_bundle(args.bundle)
    result = timed(verify, vk, bundle.proof, bundle.pub)
    log.elapsed(result.elapsed)
    if bundle.mode is not vk.mode or not result.value:
        raise RejectedError('proof rejected', 'proof', 8)
    log.result({'accepted': True, 'backend': vk.backend.value, 'mode': vk.mode.value})
    return 0
