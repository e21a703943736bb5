"""
Groth16 over BN254.

The constraint system is turned into a QAP over a power-of-two evaluation
domain of the scalar field. Setup publishes powers of tau so the prover can
commit to the A, B and H polynomials by their coefficients; the quotient H
is computed on a coset of the domain, where the vanishing polynomial is the
constant -2.

One row `x_i * 0 = 0` is appended per public wire (and the constant wire)
so the public input polynomials are linearly independent.
"""

import hashlib
import secrets
import struct
from dataclasses import dataclass
from typing import Sequence

from py_ecc import optimized_bn128 as bn

from .common import FormatError, UnsatisfiedWitnessError
from .curve import (
    G1_SIZE,
    G2_SIZE,
    R,
    FixedBaseTable,
    Point,
    Reader,
    add_all,
    decode_g1,
    decode_g2,
    encode_g1,
    encode_g1_list,
    encode_g2,
    encode_g2_list,
    msm,
    msm_or_zero,
    scalar_mul,
)
from .log import log
from .r1cs import Constraint, ConstraintSystem, evaluate

PROOF_SIZE = 2 * G1_SIZE + G2_SIZE
TWO_ADICITY = 28
GENERATOR = 5
BATCH_COEFFICIENT_BITS = 128


def _root_of_unity(n: int) -> int:
    if n & (n - 1) or not 0 < n <= 1 << TWO_ADICITY:
        raise ValueError(f'no root of unity of order {n}')
    return pow(GENERATOR, (R - 1) // n, R)


def _bit_reverse(values: Sequence[int]) -> list[int]:
    n = len(values)
    bits = n.bit_length() - 1
    return [values[int(f'{i:0{bits}b}'[::-1], 2) if bits else 0] for i in range(n)]


def _ntt(values: Sequence[int], omega: int) -> list[int]:
    a = _bit_reverse(values)
    n = len(a)
    length = 2
    while length <= n:
        half = length // 2
        step = pow(omega, n // length, R)
        twiddles = [1] * half
        for k in range(1, half):
            twiddles[k] = twiddles[k - 1] * step % R
        for start in range(0, n, length):
            for k in range(half):
                u = a[start + k]
                v = a[start + k + half] * twiddles[k] % R
                a[start + k] = (u + v) % R
                a[start + k + half] = (u - v) % R
        length <<= 1
    return a


class EvaluationDomain:
    """Multiplicative subgroup of order n and its coset g * <omega>."""

    def __init__(self, n: int) -> None:
        self.size = n
        self.omega = _root_of_unity(n)
        self.omega_inv = pow(self.omega, -1, R)
        self.size_inv = pow(n, -1, R)
        # primitive 2n-th root: g^n = -1, so Z(X) = X^n - 1 is -2 on the coset
        self.shift = _root_of_unity(2 * n)
        self.shift_inv = pow(self.shift, -1, R)
        self.vanishing_on_coset_inv = pow(R - 2, -1, R)

    @classmethod
    def for_rows(cls, rows: int) -> 'EvaluationDomain':
        return cls(1 << max(1, (rows - 1).bit_length()))

    def ntt(self, coeffs: Sequence[int]) -> list[int]:
        return _ntt(self._padded(coeffs), self.omega)

    def intt(self, evals: Sequence[int]) -> list[int]:
        return [v * self.size_inv % R for v in _ntt(self._padded(evals), self.omega_inv)]

    def coset_ntt(self, coeffs: Sequence[int]) -> list[int]:
        return self.ntt(self._scale(coeffs, self.shift))

    def coset_intt(self, evals: Sequence[int]) -> list[int]:
        return self._scale(self.intt(evals), self.shift_inv)

    def vanishing_at(self, x: int) -> int:
        return (pow(x, self.size, R) - 1) % R

    def lagrange_at(self, tau: int) -> list[int]:
        """L_i(tau) for every domain point, as the inverse transform of tau powers."""
        powers = [1] * self.size
        for k in range(1, self.size):
            powers[k] = powers[k - 1] * tau % R
        return self.intt(powers)

    def _padded(self, values: Sequence[int]) -> list[int]:
        if len(values) > self.size:
            raise ValueError(f'{len(values)} values exceed domain size {self.size}')
        return list(values) + [0] * (self.size - len(values))

    def _scale(self, values: Sequence[int], factor: int) -> list[int]:
        out = []
        power = 1
        for v in values:
            out.append(v * power % R)
            power = power * factor % R
        return out


def qap_rows(cs: ConstraintSystem) -> list[Constraint]:
    return cs.constraints + [Constraint({i: 1}, {}, {}, 'public') for i in range(cs.num_public + 1)]


@dataclass(frozen=True)
class ProvingKey:
    domain_size: int
    num_wires: int
    num_public: int
    alpha_g1: Point
    beta_g1: Point
    delta_g1: Point
    beta_g2: Point
    delta_g2: Point
    tau_g1: tuple[Point, ...]
    tau_g2: tuple[Point, ...]
    k_g1: tuple[Point, ...]
    h_g1: tuple[Point, ...]

    def to_bytes(self) -> bytes:
        return b''.join([
            struct.pack('>III', self.domain_size, self.num_wires, self.num_public),
            encode_g1(self.alpha_g1), encode_g1(self.beta_g1), encode_g1(self.delta_g1),
            encode_g2(self.beta_g2), encode_g2(self.delta_g2),
            encode_g1_list(self.tau_g1), encode_g2_list(self.tau_g2),
            encode_g1_list(self.k_g1), encode_g1_list(self.h_g1),
        ])

    @classmethod
    def from_bytes(cls, data: bytes) -> 'ProvingKey':
        reader = Reader(data, 'groth16 proving key')
        domain_size, num_wires, num_public = reader.u32(), reader.u32(), reader.u32()
        key = cls(
            domain_size=domain_size, num_wires=num_wires, num_public=num_public,
            alpha_g1=reader.g1(), beta_g1=reader.g1(), delta_g1=reader.g1(),
            beta_g2=reader.g2(), delta_g2=reader.g2(),
            tau_g1=tuple(reader.g1_list()), tau_g2=tuple(reader.g2_list()),
            k_g1=tuple(reader.g1_list()), h_g1=tuple(reader.g1_list()),
        )
        reader.finish()
        if len(key.tau_g1) != domain_size or len(key.tau_g2) != domain_size \
                or len(key.h_g1) != domain_size - 1 \
                or len(key.k_g1) != num_wires - num_public - 1:
            raise FormatError('groth16 proving key: inconsistent table sizes')
        return key


@dataclass(frozen=True)
class VerifyingKey:
    alpha_g1: Point
    beta_g2: Point
    gamma_g2: Point
    delta_g2: Point
    ic: tuple[Point, ...]

    def to_bytes(self) -> bytes:
        return b''.join([
            encode_g1(self.alpha_g1), encode_g2(self.beta_g2),
            encode_g2(self.gamma_g2), encode_g2(self.delta_g2),
            encode_g1_list(self.ic),
        ])

    @classmethod
    def from_bytes(cls, data: bytes) -> 'VerifyingKey':
        reader = Reader(data, 'groth16 verifying key')
        key = cls(alpha_g1=reader.g1(), beta_g2=reader.g2(), gamma_g2=reader.g2(),
                  delta_g2=reader.g2(), ic=tuple(reader.g1_list()))
        reader.finish()
        if not key.ic:
            raise FormatError('groth16 verifying key: empty input commitment table')
        return key


@dataclass(frozen=True)
class Proof:
    a: Point
    b: Point
    c: Point

    def to_bytes(self) -> bytes:
        return encode_g1(self.a) + encode_g2(self.b) + encode_g1(self.c)

    @classmethod
    def from_bytes(cls, data: bytes) -> 'Proof':
        """Decode and validate; any malformed encoding raises FormatError."""
        if len(data) != PROOF_SIZE:
            raise FormatError(f'groth16 proof must be {PROOF_SIZE} bytes, got {len(data)}')
        return cls(
            a=decode_g1(data[:G1_SIZE]),
            b=decode_g2(data[G1_SIZE:G1_SIZE + G2_SIZE], check_subgroup=True),
            c=decode_g1(data[G1_SIZE + G2_SIZE:]),
        )


def _toxic_waste(seed: bytes | None, domain: EvaluationDomain) -> dict[str, int]:
    names = ('tau', 'alpha', 'beta', 'gamma', 'delta')
    scalars: dict[str, int] = {}
    for name in names:
        counter = 0
        while True:
            if seed is None:
                value = secrets.randbelow(R)
            else:
                digest = hashlib.sha512(seed + name.encode() + counter.to_bytes(4, 'big')).digest()
                value = int.from_bytes(digest, 'big') % R
            counter += 1
            if value == 0:
                continue
            if name == 'tau' and domain.vanishing_at(value) == 0:
                continue
            scalars[name] = value
            break
    return scalars


def setup(cs: ConstraintSystem, seed: bytes | None = None) -> tuple[ProvingKey, VerifyingKey]:
    """
    Generate keys for a constraint system.

    Args:
        cs: Constraint system (only its shape is used)
        seed: Deterministic toxic-waste seed, or None for OS entropy

    Returns:
        (proving key, verifying key)
    """
    rows = qap_rows(cs)
    domain = EvaluationDomain.for_rows(len(rows))
    n = domain.size
    toxic = _toxic_waste(seed, domain)
    tau, alpha, beta = toxic['tau'], toxic['alpha'], toxic['beta']
    gamma_inv = pow(toxic['gamma'], -1, R)
    delta_inv = pow(toxic['delta'], -1, R)

    lagrange = domain.lagrange_at(tau)
    m = cs.num_wires
    a_tau = [0] * m
    b_tau = [0] * m
    c_tau = [0] * m
    for l_i, row in zip(lagrange, rows):
        for wire, coeff in row.a.items():
            a_tau[wire] += l_i * coeff
        for wire, coeff in row.b.items():
            b_tau[wire] += l_i * coeff
        for wire, coeff in row.c.items():
            c_tau[wire] += l_i * coeff
    combined = [(beta * a + alpha * b + c) % R for a, b, c in zip(a_tau, b_tau, c_tau)]

    tau_powers = [1] * n
    for k in range(1, n):
        tau_powers[k] = tau_powers[k - 1] * tau % R
    z_over_delta = domain.vanishing_at(tau) * delta_inv % R

    log.verbose(f'groth16 setup: {len(rows)} rows, domain {n}, {m} wires')
    g1 = FixedBaseTable(bn.G1)
    g2 = FixedBaseTable(bn.G2)
    public_end = cs.num_public + 1
    pk = ProvingKey(
        domain_size=n,
        num_wires=m,
        num_public=cs.num_public,
        alpha_g1=g1.mul(alpha),
        beta_g1=g1.mul(beta),
        delta_g1=g1.mul(toxic['delta']),
        beta_g2=g2.mul(beta),
        delta_g2=g2.mul(toxic['delta']),
        tau_g1=tuple(g1.mul(t) for t in tau_powers),
        tau_g2=tuple(g2.mul(t) for t in tau_powers),
        k_g1=tuple(g1.mul(v * delta_inv) for v in combined[public_end:]),
        h_g1=tuple(g1.mul(t * z_over_delta) for t in tau_powers[:n - 1]),
    )
    vk = VerifyingKey(
        alpha_g1=pk.alpha_g1,
        beta_g2=pk.beta_g2,
        gamma_g2=g2.mul(toxic['gamma']),
        delta_g2=pk.delta_g2,
        ic=tuple(g1.mul(v * gamma_inv) for v in combined[:public_end]),
    )
    return pk, vk


def prove(pk: ProvingKey, cs: ConstraintSystem, allow_unsatisfied: bool = False) -> Proof:
    """
    Prove knowledge of the assignment carried by a synthesized constraint system.

    Args:
        pk: Proving key for the same constraint shape
        cs: Synthesized constraint system holding the full assignment
        allow_unsatisfied: Produce a (non-verifying) proof even if constraints fail

    Raises:
        UnsatisfiedWitnessError: If the assignment violates a constraint
    """
    if cs.num_wires != pk.num_wires or cs.num_public != pk.num_public:
        raise FormatError('proving key does not match the constraint system')
    rows = qap_rows(cs)
    w = cs.assignment
    a = [evaluate(row.a, w) for row in rows]
    b = [evaluate(row.b, w) for row in rows]
    c = [evaluate(row.c, w) for row in rows]
    failed = sorted({rows[i].group for i in range(len(rows)) if a[i] * b[i] % R != c[i]})
    if failed and not allow_unsatisfied:
        raise UnsatisfiedWitnessError(
            f'witness does not satisfy constraint groups: {", ".join(failed)}', failed)

    domain = EvaluationDomain(pk.domain_size)
    a_coeffs = domain.intt(a)
    b_coeffs = domain.intt(b)
    c_coeffs = domain.intt(c)
    a_coset = domain.coset_ntt(a_coeffs)
    b_coset = domain.coset_ntt(b_coeffs)
    c_coset = domain.coset_ntt(c_coeffs)
    z_inv = domain.vanishing_on_coset_inv
    h_evals = [(x * y - z) * z_inv % R for x, y, z in zip(a_coset, b_coset, c_coset)]
    h_coeffs = domain.coset_intt(h_evals)[:pk.domain_size - 1]

    r = secrets.randbelow(R)
    s = secrets.randbelow(R)
    proof_a = add_all(pk.alpha_g1, msm(pk.tau_g1, a_coeffs), scalar_mul(pk.delta_g1, r))
    proof_b = add_all(pk.beta_g2, msm(pk.tau_g2, b_coeffs), scalar_mul(pk.delta_g2, s))
    b_g1 = add_all(pk.beta_g1, msm(pk.tau_g1, b_coeffs), scalar_mul(pk.delta_g1, s))
    proof_c = add_all(
        msm(pk.k_g1, w[pk.num_public + 1:]),
        msm(pk.h_g1, h_coeffs),
        scalar_mul(proof_a, s) if proof_a is not None else None,
        scalar_mul(b_g1, r) if b_g1 is not None else None,
        scalar_mul(pk.delta_g1, (R - r * s % R) % R),
    )
    return Proof(
        a=proof_a if proof_a is not None else bn.Z1,
        b=proof_b if proof_b is not None else bn.Z2,
        c=proof_c if proof_c is not None else bn.Z1,
    )


def _input_commitment(vk: VerifyingKey, weights: Sequence[int]) -> Point:
    return msm_or_zero(vk.ic, weights, bn.Z1)


def verify(vk: VerifyingKey, proof: Proof, public_values: Sequence[int]) -> bool:
    """Check e(A, B) = e(alpha, beta) * e(IC, gamma) * e(C, delta)."""
    if len(public_values) != len(vk.ic) - 1:
        return False
    ic = _input_commitment(vk, [1, *public_values])
    acc = bn.pairing(proof.b, proof.a, final_exponentiate=False)
    acc = acc * bn.pairing(vk.beta_g2, bn.neg(vk.alpha_g1), final_exponentiate=False)
    acc = acc * bn.pairing(vk.gamma_g2, bn.neg(ic), final_exponentiate=False)
    acc = acc * bn.pairing(vk.delta_g2, bn.neg(proof.c), final_exponentiate=False)
    return bn.final_exponentiate(acc) == bn.FQ12.one()


def batch_verify(vk: VerifyingKey, items: Sequence[tuple[Proof, Sequence[int]]]) -> bool:
    """
    Verify many proofs with one randomized pairing-product check.

    Each equation is weighted by an independent 128-bit coefficient, so a
    batch containing an invalid proof passes with probability about 2^-128.
    """
    if not items:
        raise ValueError('batch must contain at least one proof')
    if any(len(values) != len(vk.ic) - 1 for _, values in items):
        return False
    weights = [secrets.randbits(BATCH_COEFFICIENT_BITS) | 1 for _ in items]
    acc = bn.FQ12.one()
    for (proof, _), rho in zip(items, weights):
        acc = acc * bn.pairing(proof.b, scalar_mul(proof.a, rho), final_exponentiate=False)

    total = sum(weights) % R
    ic_weights = [total] + [
        sum(rho * values[j] for (_, values), rho in zip(items, weights)) % R
        for j in range(len(vk.ic) - 1)
    ]
    c_sum = msm_or_zero([proof.c for proof, _ in items], weights, bn.Z1)
    acc = acc * bn.pairing(vk.beta_g2, bn.neg(scalar_mul(vk.alpha_g1, total)),
                           final_exponentiate=False)
    acc = acc * bn.pairing(vk.gamma_g2, bn.neg(_input_commitment(vk, ic_weights)),
                           final_exponentiate=False)
    acc = acc * bn.pairing(vk.delta_g2, bn.neg(c_sum), final_exponentiate=False)
    return bn.final_exponentiate(acc) == bn.FQ12.one()
