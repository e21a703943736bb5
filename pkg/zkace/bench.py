"""
Benchmark harness.

The quick suite times the native operations and the mock-backend pipeline;
the full suite adds Groth16 setup, proving and verification. Every timing
is a median over warm iterations with an order-statistic 95% confidence
interval. Performance bounds are reported as environment flags only.
"""

import argparse
import hashlib
import math
import os
import platform
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

from .backend import (
    BackendId,
    ProofBundle,
    ProvingKey,
    batch_verify,
    prove,
    setup,
    verify,
)
from .chain import ChainState, SubmittedTx
from .circuit import AuthorizationWitness, PublicInputs, ReplayMode, identity_commitment, parse_mode
from .common import UsageError, timed, write_json
from .config import Profile
from .didp import DerivationContext, RootEntropy, derive, seal, unseal
from .field import random_element
from .games import Signer, random_payload
from .log import log
from .sponge import domain_from_descriptor, tx_hash

SUITES = ('quick', 'full')
MIN_ITERATIONS = 20
# Key generation is timed fewer times than the other operations.
SETUP_ITERATIONS = 3
PIPELINE_SIZE = 2000
BATCH_SIZE = 16
BENCH_DOMAIN = 'zkace-bench:pipeline'
BENCH_SEED = hashlib.sha256(b'zkace-bench-setup').digest()
BENCH_CREDENTIAL = b'zkace-bench-credential'

# Single-threaded reference medians and the order-of-magnitude bounds
# checked on this machine, in seconds.
REFERENCE_SECONDS = {
    'verify': 651e-6,
    'prove': 63e-3,
    'setup': 120e-3,
    'pipeline': 7.56e-3,
}
BOUND_SECONDS = {
    'verify': 10e-3,
    'prove': 2.0,
    'setup': 5.0,
    'pipeline': 5.0,
}
PIPELINE_NOTE = ('pipeline times process_batch over mock-backend bundles; '
                 'it does not include the external attestation checks of the reference run')


@dataclass(frozen=True)
class Timing:
    samples: tuple[float, ...]

    @property
    def median(self) -> float:
        return statistics.median(self.samples)

    @property
    def interval(self) -> tuple[float, float]:
        """Distribution-free 95% confidence interval for the median."""
        ordered = sorted(self.samples)
        n = len(ordered)
        half_width = 0.98 * math.sqrt(n)
        lower = max(1, math.floor(n / 2 - half_width))
        upper = min(n, math.ceil(1 + n / 2 + half_width))
        return ordered[lower - 1], ordered[upper - 1]

    def to_json(self) -> dict[str, Any]:
        low, high = self.interval
        return {
            'median_s': self.median,
            'ci95_low_s': low,
            'ci95_high_s': high,
            'iterations': len(self.samples),
        }


def measure(func: Callable[[], Any], iterations: int, warmup: int = 1) -> Timing:
    for _ in range(warmup):
        func()
    return Timing(tuple(timed(func).elapsed.total_seconds() for _ in range(iterations)))


@dataclass
class BenchReport:
    suite: str
    iterations: int
    setup_iterations: int = SETUP_ITERATIONS
    operations: dict[str, Timing] = field(default_factory=dict)
    pipeline: dict[str, Any] = field(default_factory=dict)
    parallel: dict[str, Any] | None = None

    def flags(self) -> dict[str, dict[str, Any]]:
        """Bound checks; a false flag points at the environment, not at correctness."""
        observed = {name: self.operations[name].median
                    for name in ('verify', 'prove', 'setup') if name in self.operations}
        if self.pipeline:
            observed['pipeline'] = self.pipeline['seconds']
        return {
            name: {'observed_s': value, 'bound_s': BOUND_SECONDS[name],
                   'within_bound': value < BOUND_SECONDS[name]}
            for name, value in observed.items()
        }

    def to_json(self) -> dict[str, Any]:
        document: dict[str, Any] = {
            'suite': self.suite,
            'iterations': self.iterations,
            'setup_iterations': self.setup_iterations,
            'hardware': hardware_descriptor(),
            'operations': {name: t.to_json() for name, t in self.operations.items()},
            'pipeline': dict(self.pipeline),
            'reference_s': dict(REFERENCE_SECONDS),
            'environment_flags': self.flags(),
        }
        if self.parallel is not None:
            document['parallel'] = dict(self.parallel)
        return document

    def render(self) -> str:
        width = max([len(name) for name in self.operations] + [10])
        lines = [f'{self.iterations} iterations per operation, '
                 f'{self.setup_iterations} for setup',
                 '',
                 f'{"operation":<{width}}  {"median":>12}  {"95% CI":>27}']
        for name, timing in self.operations.items():
            low, high = timing.interval
            lines.append(f'{name:<{width}}  {_ms(timing.median):>12}  '
                         f'{_ms(low):>12} - {_ms(high):>12}')
        if self.pipeline:
            lines.append('')
            lines.append(f'pipeline: {self.pipeline["transactions"]} txs in '
                         f'{_ms(self.pipeline["seconds"])} '
                         f'({self.pipeline["accepted"]} accepted)')
        if self.parallel:
            lines.append(f'parallel proving: {self.parallel["proofs_per_second"]:.2f} proofs/s '
                         f'with {self.parallel["workers"]} workers')
        lines.append('')
        for name, flag in self.flags().items():
            state = 'ok' if flag['within_bound'] else 'SLOW (environment)'
            lines.append(f'{name}: {_ms(flag["observed_s"])} '
                         f'(bound {_ms(flag["bound_s"])}, reference '
                         f'{_ms(REFERENCE_SECONDS[name])}) {state}')
        return '\n'.join(lines)


def _ms(seconds: float) -> str:
    return f'{seconds * 1000:.3f} ms'


def hardware_descriptor() -> dict[str, Any]:
    return {
        'machine': platform.machine(),
        'processor': platform.processor() or 'unknown',
        'system': platform.system(),
        'python': platform.python_version(),
        'implementation': sys.implementation.name,
        'cpu_count': os.cpu_count(),
    }


def _bench_native(report: BenchReport, kdf_cost: int) -> None:
    n = report.iterations
    domain = domain_from_descriptor(BENCH_DOMAIN)
    rev = RootEntropy.generate()
    salt = random_element()
    ctx = DerivationContext.for_domain(domain)
    payload = random_payload()
    report.operations['commitment'] = measure(lambda: identity_commitment(rev, salt, domain), n)
    report.operations['derive'] = measure(lambda: derive(rev, ctx), n)
    report.operations['tx_hash'] = measure(lambda: tx_hash(payload), n)
    sealed = seal(rev, BENCH_CREDENTIAL, kdf_cost)
    report.operations['seal'] = measure(lambda: seal(rev, BENCH_CREDENTIAL, kdf_cost), n)
    report.operations['unseal'] = measure(lambda: unseal(sealed, BENCH_CREDENTIAL), n)


def _bench_backend(report: BenchReport, mode: ReplayMode, backend: BackendId) -> ProvingKey:
    n = report.iterations
    suffix = '' if backend is BackendId.REAL else '_mock'
    keys = []

    def run_setup() -> None:
        keys.append(setup(mode, backend, BENCH_SEED, Profile.TEST))

    report.operations[f'setup{suffix}'] = measure(run_setup, report.setup_iterations, warmup=0)
    pk, vk = keys[-1]

    signer = Signer(domain_from_descriptor(BENCH_DOMAIN))
    witness, pub = signer.statement(mode, random_payload())
    proof = prove(pk, witness, pub)
    report.operations[f'prove{suffix}'] = measure(lambda: prove(pk, witness, pub), n)
    report.operations[f'verify{suffix}'] = measure(lambda: verify(vk, proof, pub), n)

    items = [(proof, pub)]
    for _ in range(BATCH_SIZE - 1):
        w, p = signer.statement(mode, random_payload())
        items.append((prove(pk, w, p), p))
    report.operations[f'batch_verify_{BATCH_SIZE}{suffix}'] = measure(
        lambda: batch_verify(vk, items), n)

    payer = Signer(signer.domain)
    chain = ChainState(mode, vk, payer.domain, profile=Profile.TEST)
    chain.register_identity(payer.id_com)
    txs = []
    for _ in range(n + 1):
        body = random_payload()
        w, p = payer.statement(mode, body)
        txs.append(SubmittedTx(body, ProofBundle(prove(pk, w, p), p, mode, body)))
    pending = iter(txs)
    report.operations[f'process_tx{suffix}'] = measure(lambda: chain.process_tx(next(pending)), n)
    return pk


def run_pipeline(mode: ReplayMode, size: int) -> dict[str, Any]:
    """Time process_batch over size honest mock-backend transactions from distinct signers."""
    pk, vk = setup(mode, BackendId.MOCK, BENCH_SEED, Profile.TEST)
    domain = domain_from_descriptor(BENCH_DOMAIN)
    chain = ChainState(mode, vk, domain, profile=Profile.TEST)
    txs = []
    with log.working(f'Preparing {size} pipeline transactions'):
        for _ in range(size):
            signer = Signer(domain)
            chain.register_identity(signer.id_com)
            payload = random_payload()
            witness, pub = signer.statement(mode, payload)
            txs.append(SubmittedTx(payload, ProofBundle(prove(pk, witness, pub), pub, mode,
                                                        payload)))
    result = timed(chain.process_batch, txs)
    return {
        'transactions': size,
        'backend': BackendId.MOCK.value,
        'seconds': result.elapsed.total_seconds(),
        'accepted': sum(1 for r in result.value if r.accepted),
        'note': PIPELINE_NOTE,
    }


def _prove_job(job: tuple[ProvingKey, AuthorizationWitness, PublicInputs]) -> int:
    pk, witness, pub = job
    return prove(pk, witness, pub).size_bytes


def run_parallel(pk: ProvingKey, workers: int, proofs: int) -> dict[str, Any]:
    """Proving throughput with a process pool, reported apart from single-threaded numbers."""
    signer = Signer(domain_from_descriptor(BENCH_DOMAIN))
    jobs = [(pk, *signer.statement(pk.mode, random_payload())) for _ in range(proofs)]

    def run() -> list[int]:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_prove_job, jobs))

    result = timed(run)
    seconds = result.elapsed.total_seconds()
    return {
        'workers': workers,
        'proofs': proofs,
        'backend': pk.backend.value,
        'seconds': seconds,
        'proofs_per_second': proofs / seconds if seconds else float('inf'),
    }


def run_bench(suite: str, mode: ReplayMode = ReplayMode.NONCE, iterations: int = MIN_ITERATIONS,
              kdf_cost: int = 10, pipeline_size: int = PIPELINE_SIZE,
              parallel: int = 0) -> BenchReport:
    """
    Run a benchmark suite.

    Args:
        suite: 'quick' or 'full'
        mode: Replay mode of the circuit under test
        iterations: Timed iterations per operation
        kdf_cost: scrypt cost for seal/unseal timings
        pipeline_size: Transactions in the mock pipeline run
        parallel: Worker processes for the parallel proving run (0 disables it)

    Returns:
        The report
    """
    if suite not in SUITES:
        raise UsageError(f'unknown suite "{suite}"')
    if iterations < 1:
        raise UsageError('iterations must be positive')
    report = BenchReport(suite=suite, iterations=iterations,
                         setup_iterations=min(iterations, SETUP_ITERATIONS))
    with log.working('Timing native operations'):
        _bench_native(report, kdf_cost)
    with log.working('Timing mock backend'):
        pk = _bench_backend(report, mode, BackendId.MOCK)
    if suite == 'full':
        with log.working('Timing Groth16 backend'):
            pk = _bench_backend(report, mode, BackendId.REAL)
    if pipeline_size:
        report.pipeline = run_pipeline(mode, pipeline_size)
    if parallel:
        with log.working(f'Proving in parallel on {parallel} workers'):
            report.parallel = run_parallel(pk, parallel, parallel * 4)
    return report


def bench_command(args: argparse.Namespace) -> int:
    """
    Execute the 'bench' command.

    Args:
        args: Parsed command line arguments

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    if args.iterations < MIN_ITERATIONS:
        raise UsageError(f'--iterations must be at least {MIN_ITERATIONS}')
    if args.parallel < 0:
        raise UsageError('--parallel must be non-negative')
    log.heading(f'Benchmark ({args.suite} suite)')
    report = run_bench(args.suite, parse_mode(args.mode), args.iterations,
                       args.settings.kdf_cost, parallel=args.parallel)
    document = report.to_json()
    if args.out:
        write_json(args.out, document)
        log.detail('report', args.out)
    log.table(report.render())
    for name, flag in report.flags().items():
        if not flag['within_bound']:
            log.warning(f'{name} exceeded its {_ms(flag["bound_s"])} bound on this machine')
    return 0
