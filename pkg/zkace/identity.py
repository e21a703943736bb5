"""
Identity commands: create a sealed root entropy and commit it to a domain.
"""

import argparse
import sys
from typing import BinaryIO

from .circuit import identity_commitment
from .common import FORMAT_VERSION, AuthenticationError, UsageError, write_json
from .didp import RootEntropy, SealedArtifact, load_sealed, save_sealed, seal, unseal
from .field import FieldElement, random_element
from .log import log
from .sponge import domain_from_descriptor


def read_credential(args: argparse.Namespace, stream: BinaryIO | None = None) -> bytes:
    """
    Read the credential from stdin.

    The credential is never accepted on the command line. One trailing
    newline is stripped.
    """
    if not getattr(args, 'credential_stdin', False):
        raise UsageError('the credential must be supplied on stdin (--credential-stdin)')
    if stream is None:
        stream = sys.stdin.buffer
    credential = stream.read()
    if credential.endswith(b'\r\n'):
        credential = credential[:-2]
    elif credential.endswith(b'\n'):
        credential = credential[:-1]
    if not credential:
        raise UsageError('empty credential on stdin')
    return credential


def open_identity(path: str, credential: bytes) -> RootEntropy:
    """Unseal an identity file, raising AuthenticationError on a wrong credential."""
    artifact: SealedArtifact = load_sealed(path)
    rev = unseal(artifact, credential)
    if rev is None:
        raise AuthenticationError(f'credential does not open {path}')
    return rev


def identity_new_command(args: argparse.Namespace) -> int:
    """
    Execute the 'identity new' command.

    Args:
        args: Parsed command line arguments

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    credential = read_credential(args)
    kdf_cost = args.settings.kdf_cost
    log.heading('Creating identity')
    with RootEntropy.generate() as rev:
        with log.working(f'Sealing root entropy (scrypt 2^{kdf_cost})'):
            artifact = seal(rev, credential, kdf_cost)
    save_sealed(args.out, artifact)
    log.detail('identity', args.out)
    log.result({'identity': args.out, 'kdf_params': artifact.kdf_params.to_json()})
    return 0


def identity_commit_command(args: argparse.Namespace) -> int:
    """
    Execute the 'identity commit' command.

    Args:
        args: Parsed command line arguments

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    credential = read_credential(args)
    domain = domain_from_descriptor(args.domain)
    salt = FieldElement.from_hex(args.salt) if args.salt else random_element()
    log.heading('Committing identity')
    log.detail('domain', args.domain)
    with log.working('Unsealing identity'):
        rev = open_identity(args.identity, credential)
    with rev:
        id_com = identity_commitment(rev, salt, domain)
    document = {
        'format_version': FORMAT_VERSION,
        'domain_descriptor': args.domain,
        'domain': domain.hex(),
        'salt': salt.hex(),
        'id_com': id_com.hex(),
    }
    write_json(args.out, document)
    log.detail('id_com', id_com.hex())
    log.result(document)
    return 0


def identity_command(args: argparse.Namespace) -> int:
    """
    Dispatch identity subcommands.

    Args:
        args: Parsed command line arguments

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    if args.identity_action == 'new':
        return identity_new_command(args)
    elif args.identity_action == 'commit':
        return identity_commit_command(args)
    else:
        raise UsageError('No identity action specified. Use "zkace identity -h" for help.')
