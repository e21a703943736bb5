"""
zkace - Identity-centric authorization proofs.

This package provides:
- identity: sealed root entropy and per-domain identity commitments
- setup/prove/verify: authorization proofs over a BN254 sponge circuit
- chain: a verifying chain with nonce or nullifier replay protection
- games, accounting, bench: adversarial suites, byte accounting and timings
"""

__version__ = "0.1.0"
__author__ = "zkace developers"
__email__ = "zkace@users.noreply.github.com"
