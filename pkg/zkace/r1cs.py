"""
Rank-1 constraint system.

Wire 0 is the constant 1, wires 1..n_public are the public inputs in their
fixed order, every later wire is private. A linear combination maps wire
indices to coefficients; a constraint states <A,w> * <B,w> = <C,w>.
Synthesis records values alongside the shape, so the same object serves
for counting, proving and witness tracing.
"""

import hashlib
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .field import MODULUS

P = MODULUS


class Lc:
    """A linear combination over the wires together with its current value."""

    __slots__ = ('terms', 'value')

    def __init__(self, terms: dict[int, int], value: int) -> None:
        self.terms = terms
        self.value = value

    @classmethod
    def constant(cls, c: int) -> 'Lc':
        c %= P
        return cls({0: c} if c else {}, c)

    @classmethod
    def wire(cls, index: int, value: int) -> 'Lc':
        return cls({index: 1}, value)

    def add_const(self, c: int) -> 'Lc':
        terms = dict(self.terms)
        coeff = (terms.get(0, 0) + c) % P
        if coeff:
            terms[0] = coeff
        else:
            terms.pop(0, None)
        return Lc(terms, (self.value + c) % P)

    def __add__(self, other: 'Lc') -> 'Lc':
        return combine([(1, self), (1, other)])

    def __sub__(self, other: 'Lc') -> 'Lc':
        return combine([(1, self), (P - 1, other)])

    def __repr__(self) -> str:
        return f'Lc({self.terms!r}, value={self.value})'


def combine(scaled: Iterable[tuple[int, Lc]]) -> Lc:
    """Sum of k * lc over the given pairs."""
    terms: dict[int, int] = {}
    value = 0
    for k, lc in scaled:
        value += k * lc.value
        for wire, coeff in lc.terms.items():
            terms[wire] = (terms.get(wire, 0) + k * coeff) % P
    return Lc({w: c for w, c in terms.items() if c}, value % P)


@dataclass(frozen=True)
class Constraint:
    a: dict[int, int]
    b: dict[int, int]
    c: dict[int, int]
    group: str


def evaluate(terms: dict[int, int], assignment: Sequence[int]) -> int:
    return sum(coeff * assignment[wire] for wire, coeff in terms.items()) % P


class ConstraintSystem:
    """Constraint list plus the wire assignment produced while synthesizing."""

    def __init__(self, num_public: int) -> None:
        self.num_public = num_public
        self.assignment: list[int] = [1] + [0] * num_public
        self.public_names: list[str] = []
        self.constraints: list[Constraint] = []
        self.trace: dict[str, int] = {}
        self._group = ''

    @property
    def num_wires(self) -> int:
        return len(self.assignment)

    def group(self, name: str) -> None:
        """Label constraints added from now on."""
        self._group = name

    def public(self, name: str, value: int) -> Lc:
        """Bind the next public input wire."""
        index = len(self.public_names) + 1
        if index > self.num_public:
            raise ValueError('all public input wires are already bound')
        self.public_names.append(name)
        self.assignment[index] = value % P
        return Lc.wire(index, value % P)

    def private(self, value: int) -> Lc:
        """Allocate a private wire."""
        self.assignment.append(value % P)
        return Lc.wire(len(self.assignment) - 1, value % P)

    def mul(self, x: Lc, y: Lc) -> Lc:
        """Allocate z = x * y and constrain it."""
        z = self.private(x.value * y.value)
        self.constraints.append(Constraint(x.terms, y.terms, z.terms, self._group))
        return z

    def enforce_equal(self, x: Lc, y: Lc) -> None:
        """Constrain (x - y) * 1 = 0."""
        diff = x - y
        self.constraints.append(Constraint(diff.terms, {0: 1}, {}, self._group))

    def counts(self) -> dict[str, int]:
        return dict(Counter(c.group for c in self.constraints))

    def unsatisfied(self, assignment: Sequence[int] | None = None) -> list[int]:
        """Indices of constraints violated by an assignment (default: our own)."""
        if assignment is None:
            assignment = self.assignment
        failed = []
        for i, con in enumerate(self.constraints):
            a = evaluate(con.a, assignment)
            b = evaluate(con.b, assignment)
            if a * b % P != evaluate(con.c, assignment):
                failed.append(i)
        return failed

    def unsatisfied_groups(self, assignment: Sequence[int] | None = None) -> list[str]:
        groups = {self.constraints[i].group for i in self.unsatisfied(assignment)}
        return sorted(groups)

    def is_satisfied(self, assignment: Sequence[int] | None = None) -> bool:
        return not self.unsatisfied(assignment)

    def with_public(self, values: Sequence[int]) -> list[int]:
        """Copy of the assignment with the public wires replaced."""
        if len(values) != self.num_public:
            raise ValueError(f'expected {self.num_public} public values, got {len(values)}')
        assignment = list(self.assignment)
        assignment[1:self.num_public + 1] = [v % P for v in values]
        return assignment

    def digest(self) -> bytes:
        """SHA-256 over a canonical serialization of the constraint matrices."""
        h = hashlib.sha256()
        h.update(f'r1cs:{self.num_public}:{self.num_wires}:{len(self.constraints)}'.encode())
        for con in self.constraints:
            for terms in (con.a, con.b, con.c):
                h.update(len(terms).to_bytes(4, 'little'))
                for wire in sorted(terms):
                    h.update(wire.to_bytes(4, 'little'))
                    h.update(terms[wire].to_bytes(32, 'little'))
        return h.digest()
