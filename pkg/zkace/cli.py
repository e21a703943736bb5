"""
Main CLI entry point for zkace.
"""

import argparse
import sys
from typing import NoReturn

from . import __version__
from .accounting import accounting_command
from .backend import BackendId
from .bench import MIN_ITERATIONS, SUITES, bench_command
from .chain import DEFAULT_STATE_PATH, chain_command
from .circuit import ReplayMode, count_constraints
from .common import CommandError, UsageError
from .config import apply_overrides, load_settings
from .games import DEFAULT_TRIALS, GAMES, games_command
from .identity import identity_command
from .log import log
from .prove import prove_command, setup_command, verify_command
from .sponge import load_params, use_params

MODES = [mode.value for mode in ReplayMode]
BACKENDS = [backend.value for backend in BackendId]


class ArgumentParser(argparse.ArgumentParser):
    """Parser that raises UsageError instead of printing usage and exiting."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(f'{self.prog}: {message}')


def _add_state_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        '--state',
        default=DEFAULT_STATE_PATH,
        help=f'Chain state file. Default is {DEFAULT_STATE_PATH}'
    )


def _add_credential_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        '--credential-stdin',
        action='store_true',
        help='Read the credential from stdin (required; never pass it as an argument)'
    )


def create_parser() -> argparse.ArgumentParser:
    """Create the main argument parser."""
    parser = ArgumentParser(
        prog='zkace',
        description='Identity-centric authorization proofs: identities, proofs, '
        'a verifying chain, adversarial games and benchmarks',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  zkace identity new --credential-stdin --out alice.id < pass.txt
  zkace identity commit --identity alice.id --domain devnet:payments \\
      --credential-stdin --out alice.com < pass.txt
  zkace setup --mode nonce --out keys/nonce         # Writes keys/nonce.pk and keys/nonce.vk
  zkace prove --pk keys/nonce.pk --identity alice.id --commitment alice.com \\
      --payload tx.bin --nonce 0 --credential-stdin --out tx.json < pass.txt
  zkace verify --vk keys/nonce.vk tx.json
  zkace chain init --mode nonce --domain devnet:payments --vk keys/nonce.vk
  zkace chain register alice.com
  zkace chain submit tx.json                        # Exits 6 with reason=replay on resubmission
  zkace games run --game all --trials 100 --backend mock
  zkace accounting --pqc ml-dsa-44 --zk measured    # Per-transaction byte comparison
  zkace constraints --mode nonce                    # Constraint breakdown as JSON
        """
    )

    parser.add_argument(
        '--version',
        action='version',
        version=f'zkace {__version__}'
    )

    parser.add_argument(
        '-v', '--verbose',
        action='store_true',
        default=False,
        help='Show verbose output (rejection traces, elapsed times)'
    )

    parser.add_argument(
        '--hash-params',
        default=None,
        help='Alternative sponge parameter table (overrides ZKACE_HASH_PARAMS)'
    )

    parser.add_argument(
        '--kdf-cost',
        type=int,
        default=None,
        help='scrypt log2(N) for sealing identities (overrides ZKACE_KDF_COST)'
    )

    subparsers = parser.add_subparsers(
        dest='command',
        help='Available commands',
        metavar='COMMAND'
    )

    # Identity subcommand
    identity_parser = subparsers.add_parser(
        'identity',
        help='Create and commit identities',
        description='Create sealed root entropy files and identity commitments'
    )
    identity_subparsers = identity_parser.add_subparsers(
        dest='identity_action',
        help='Available identity actions',
        metavar='ACTION'
    )

    # identity new
    identity_new_parser = identity_subparsers.add_parser(
        'new',
        help='Generate a root entropy value and seal it under a credential',
        description='Generate 256 bits of root entropy and write them sealed '
        '(scrypt + AES-GCM) under the credential read from stdin.'
    )
    _add_credential_argument(identity_new_parser)
    identity_new_parser.add_argument(
        '--out',
        required=True,
        help='Sealed identity file to write'
    )

    # identity commit
    identity_commit_parser = identity_subparsers.add_parser(
        'commit',
        help='Compute the identity commitment for a domain',
        description='Unseal an identity and write its commitment for a '
        '"<chain_id>:<namespace>" domain, with a fresh or given salt.'
    )
    identity_commit_parser.add_argument(
        '--identity',
        required=True,
        help='Sealed identity file'
    )
    identity_commit_parser.add_argument(
        '--domain',
        required=True,
        help='Domain descriptor "<chain_id>:<namespace>"'
    )
    _add_credential_argument(identity_commit_parser)
    identity_commit_parser.add_argument(
        '--salt',
        default=None,
        help='Salt as 64 hex digits. Default is a fresh random salt'
    )
    identity_commit_parser.add_argument(
        '--out',
        required=True,
        help='Commitment file to write'
    )

    # Setup subcommand
    setup_parser = subparsers.add_parser(
        'setup',
        help='Generate proving and verifying keys',
        description='Generate a key pair for the circuit of a replay mode. '
        'The test profile requires --seed; production uses OS entropy.'
    )
    setup_parser.add_argument(
        '--mode',
        choices=MODES,
        required=True,
        help='Replay model of the circuit'
    )
    setup_parser.add_argument(
        '--backend',
        choices=BACKENDS,
        default=BackendId.REAL.value,
        help='Proof backend. Default is real'
    )
    setup_parser.add_argument(
        '--seed',
        default=None,
        help='32-byte seed as hex for deterministic keys (insecure outside tests)'
    )
    setup_parser.add_argument(
        '--out',
        required=True,
        help='Output prefix; writes PREFIX.pk and PREFIX.vk'
    )

    # Prove subcommand
    prove_parser = subparsers.add_parser(
        'prove',
        help='Prove an authorization for a transaction payload',
        description='Unseal an identity and prove that it authorizes the '
        'payload under the committed identity. Writes a proof bundle.'
    )
    prove_parser.add_argument('--pk', required=True, help='Proving key file')
    prove_parser.add_argument('--identity', required=True, help='Sealed identity file')
    prove_parser.add_argument('--commitment', required=True, help='Identity commitment file')
    _add_credential_argument(prove_parser)
    prove_parser.add_argument('--payload', required=True, help='Transaction payload file')
    prove_parser.add_argument(
        '--nonce',
        type=int,
        default=0,
        help='Nonce of this authorization. Default is 0'
    )
    prove_parser.add_argument(
        '--alg-id',
        type=int,
        default=1,
        help='Algorithm id of the derivation context. Default is 1'
    )
    prove_parser.add_argument(
        '--index',
        type=int,
        default=0,
        help='Index of the derivation context. Default is 0'
    )
    prove_parser.add_argument('--out', required=True, help='Proof bundle file to write')
    prove_parser.add_argument(
        '--dump-witness-INSECURE',
        dest='dump_witness_insecure',
        default=None,
        help='Also write the plaintext witness to this file (test vectors only)'
    )

    # Verify subcommand
    verify_parser = subparsers.add_parser(
        'verify',
        help='Verify a proof bundle',
        description='Verify a proof bundle against a verifying key. Exits 6 on rejection.'
    )
    verify_parser.add_argument('--vk', required=True, help='Verifying key file')
    verify_parser.add_argument('bundle', help='Proof bundle file')

    # Chain subcommand
    chain_parser = subparsers.add_parser(
        'chain',
        help='Run the verifying chain',
        description='Maintain a local chain state: registered identities, '
        'replay state and verifier parameters.'
    )
    chain_subparsers = chain_parser.add_subparsers(
        dest='chain_action',
        help='Available chain actions',
        metavar='ACTION'
    )

    # chain init
    chain_init_parser = chain_subparsers.add_parser(
        'init',
        help='Create a chain state',
        description='Create an empty chain state for a mode, domain and verifying key'
    )
    chain_init_parser.add_argument('--mode', choices=MODES, required=True,
                                   help='Replay model of the chain')
    chain_init_parser.add_argument('--domain', required=True,
                                   help='Domain descriptor "<chain_id>:<namespace>"')
    chain_init_parser.add_argument('--vk', required=True, help='Verifying key file')
    chain_init_parser.add_argument(
        '--nonce-window',
        type=int,
        default=0,
        help='Accept nonces up to this far past the expected one. Default is 0 (strict)'
    )
    chain_init_parser.add_argument(
        '-f', '--force',
        action='store_true',
        help='Overwrite an existing chain state'
    )
    _add_state_argument(chain_init_parser)

    # chain register
    chain_register_parser = chain_subparsers.add_parser(
        'register',
        help='Register an identity commitment',
        description='Register the id_com of a commitment file written by "identity commit"'
    )
    chain_register_parser.add_argument('commitment', help='Identity commitment file')
    _add_state_argument(chain_register_parser)

    # chain submit
    chain_submit_parser = chain_subparsers.add_parser(
        'submit',
        help='Submit one proof bundle',
        description='Run the verification steps on one bundle and apply it on success'
    )
    chain_submit_parser.add_argument('bundle', help='Proof bundle file')
    chain_submit_parser.add_argument(
        '--payload',
        default=None,
        help='Payload file. Default is the payload embedded in the bundle'
    )
    _add_state_argument(chain_submit_parser)

    # chain batch
    chain_batch_parser = chain_subparsers.add_parser(
        'batch',
        help='Submit every bundle in a directory',
        description='Process all *.json bundles in a directory in name order, '
        'with the same results as submitting them one by one'
    )
    chain_batch_parser.add_argument('directory', help='Directory of proof bundles')
    _add_state_argument(chain_batch_parser)

    # chain status
    chain_status_parser = chain_subparsers.add_parser(
        'status',
        help='Show the chain state',
        description='Print height, mode, domain and replay state size'
    )
    _add_state_argument(chain_status_parser)

    # Games subcommand
    games_parser = subparsers.add_parser(
        'games',
        help='Run adversarial games',
        description='Run the authorization, replay, substitution and domain games'
    )
    games_subparsers = games_parser.add_subparsers(
        dest='games_action',
        help='Available games actions',
        metavar='ACTION'
    )
    games_run_parser = games_subparsers.add_parser(
        'run',
        help='Run one or all games and print a JSON report',
        description='Run games; exits non-zero if the adversary wins or a control fails'
    )
    games_run_parser.add_argument('--game', choices=[*GAMES, 'all'], default='all',
                                  help='Game to run. Default is all')
    games_run_parser.add_argument('--trials', type=int, default=DEFAULT_TRIALS,
                                  help=f'Trials per game. Default is {DEFAULT_TRIALS}')
    games_run_parser.add_argument('--mode', choices=MODES, default=ReplayMode.NONCE.value,
                                  help='Replay model. Default is nonce')
    games_run_parser.add_argument('--backend', choices=BACKENDS, default=BackendId.REAL.value,
                                  help='Proof backend. Default is real (mock is pipeline only)')
    games_run_parser.add_argument('--seed', default=None,
                                  help='32-byte hex seed for the game keys')
    games_run_parser.add_argument('--keys', default=None,
                                  help='Use PREFIX.pk and PREFIX.vk instead of running setup')

    # Accounting subcommand
    accounting_parser = subparsers.add_parser(
        'accounting',
        help='Compare per-transaction authorization bytes',
        description='Compare on-chain authorization data of a post-quantum '
        'signature scheme with an authorization proof'
    )
    accounting_parser.add_argument('--pqc', default='ml-dsa-44',
                                   help='Signature profile, e.g. ml-dsa-44, ml-dsa-87, ed25519')
    accounting_parser.add_argument('--zk', choices=['measured', 'groth16-class'],
                                   default='measured',
                                   help='Proof size: the real backend (measured) or 128 bytes')
    accounting_parser.add_argument('--format', choices=['table', 'json'], default='table',
                                   help='Output format. Default is table')
    accounting_parser.add_argument('--repeat-sender', action='store_true',
                                   help='Amortize the signature public key to zero')

    # Bench subcommand
    bench_parser = subparsers.add_parser(
        'bench',
        help='Run benchmarks',
        description='Time native operations, the backends and a 2,000 transaction pipeline'
    )
    bench_parser.add_argument('--suite', choices=SUITES, default='quick',
                              help='quick (native + mock) or full (adds Groth16)')
    bench_parser.add_argument('--out', default=None, help='Write the JSON report to this file')
    bench_parser.add_argument('--iterations', type=int, default=MIN_ITERATIONS,
                              help=f'Timed iterations per operation. Default is {MIN_ITERATIONS}')
    bench_parser.add_argument('--mode', choices=MODES, default=ReplayMode.NONCE.value,
                              help='Replay model. Default is nonce')
    bench_parser.add_argument('--parallel', type=int, default=0,
                              help='Also measure proving throughput on N worker processes')

    # Constraints subcommand
    constraints_parser = subparsers.add_parser(
        'constraints',
        help='Report the constraint breakdown of the circuit',
        description='Print constraint counts per relation, hash invocations and arities'
    )
    constraints_parser.add_argument('--mode', choices=[*MODES, 'all'], default='all',
                                    help='Replay model. Default is all')

    return parser


def constraints_command(args: argparse.Namespace) -> int:
    """
    Execute the 'constraints' command.

    Args:
        args: Parsed command line arguments

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    if args.mode != 'all':
        log.result(count_constraints(ReplayMode(args.mode)).to_json())
        return 0
    reports = [count_constraints(mode) for mode in ReplayMode]
    log.result({
        'modes': [report.to_json() for report in reports],
        'identical_totals': len({report.total for report in reports}) == 1,
    })
    return 0


def run_command(args: argparse.Namespace) -> int:
    if args.command == 'identity':
        return identity_command(args)
    elif args.command == 'setup':
        return setup_command(args)
    elif args.command == 'prove':
        return prove_command(args)
    elif args.command == 'verify':
        return verify_command(args)
    elif args.command == 'chain':
        return chain_command(args)
    elif args.command == 'games':
        if args.games_action != 'run':
            raise UsageError('No games action specified. Use "zkace games -h" for help.')
        return games_command(args)
    elif args.command == 'accounting':
        return accounting_command(args)
    elif args.command == 'bench':
        return bench_command(args)
    elif args.command == 'constraints':
        return constraints_command(args)
    else:
        raise UsageError(f'Unknown command: {args.command}')


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the CLI."""
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        log.failure(e.kind, str(e))
        return e.returncode

    if not args.command:
        parser.print_help(sys.stderr)
        return 1

    log.verbose_mode = args.verbose

    custom_params = False
    try:
        args.settings = apply_overrides(load_settings(), args.hash_params, args.kdf_cost)
        if args.settings.hash_params_path:
            use_params(load_params(args.settings.hash_params_path))
            custom_params = True
        return run_command(args)
    except KeyboardInterrupt:
        log.error('\nOperation cancelled by user')
        return 1
    except CommandError as e:
        log.failure(e.kind, str(e), **e.details())
        return e.returncode
    except Exception as e:
        log.failure('error', str(e))
        return 1
    finally:
        if custom_params:
            use_params(None)


if __name__ == '__main__':
    sys.exit(main())
