"""Finite abelian coefficient groups, their duals, and phases in Q/Z.

A coefficient group is a product of cyclic factors Z_{d_1} x ... x Z_{d_k}.
The dual group is identified with the same orders tuple, the i-th dual
residue c pairing with a group residue g as c*g/d_i mod 1.  All phases are
kept as exact reduced fractions; nothing here ever touches a float.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import gcd
from typing import Iterator, Sequence

from .errors import ArgumentError, StructuralError


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@dataclass(frozen=True)
class AbelianCoefficients:
    """Product of cyclic groups, given by the tuple of factor orders."""

    orders: tuple[int, ...]

    def __init__(self, orders: Sequence[int]):
        orders = tuple(int(d) for d in orders)
        if not orders or any(d < 2 for d in orders):
            raise ArgumentError(f"cyclic factor orders must all be >= 2, got {orders}")
        object.__setattr__(self, "orders", orders)

    @property
    def exponent(self) -> int:
        return reduce(_lcm, self.orders)

    @property
    def order(self) -> int:
        n = 1
        for d in self.orders:
            n *= d
        return n

    @property
    def dual(self) -> "AbelianCoefficients":
        # Self-dual factor by factor.
        return self

    def zero(self) -> "GroupElement":
        return GroupElement(self, (0,) * len(self.orders))

    def element(self, residues: Sequence[int]) -> "GroupElement":
        return GroupElement(self, residues)

    def generator(self, i: int) -> "GroupElement":
        res = [0] * len(self.orders)
        res[i] = 1
        return GroupElement(self, res)

    def iter_elements(self) -> Iterator["GroupElement"]:
        def rec(i, prefix):
            if i == len(self.orders):
                yield GroupElement(self, prefix)
                return
            for r in range(self.orders[i]):
                yield from rec(i + 1, prefix + (r,))

        yield from rec(0, ())

    def __str__(self):
        return " x ".join(f"Z{d}" for d in self.orders)


@dataclass(frozen=True)
class GroupElement:
    """Element of an AbelianCoefficients group, residues reduced mod orders."""

    group: AbelianCoefficients
    residues: tuple[int, ...]

    def __init__(self, group: AbelianCoefficients, residues: Sequence[int]):
        if len(residues) != len(group.orders):
            raise StructuralError(
                f"expected {len(group.orders)} residues, got {len(residues)}"
            )
        reduced = tuple(int(r) % d for r, d in zip(residues, group.orders))
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "residues", reduced)

    def _check(self, other: "GroupElement"):
        if self.group.orders != other.group.orders:
            raise StructuralError(
                f"group mismatch: {self.group.orders} vs {other.group.orders}"
            )

    def __add__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return GroupElement(
            self.group, [a + b for a, b in zip(self.residues, other.residues)]
        )

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return GroupElement(
            self.group, [a - b for a, b in zip(self.residues, other.residues)]
        )

    def __neg__(self) -> "GroupElement":
        return GroupElement(self.group, [-a for a in self.residues])

    def scaled(self, k: int) -> "GroupElement":
        return GroupElement(self.group, [k * a for a in self.residues])

    @property
    def is_zero(self) -> bool:
        return all(r == 0 for r in self.residues)


def element_add(a: GroupElement, b: GroupElement) -> GroupElement:
    return a + b


def element_neg(a: GroupElement) -> GroupElement:
    return -a


@dataclass(frozen=True)
class PhaseQZ:
    """Value in Q/Z stored as a reduced fraction in [0, 1)."""

    numerator: int
    denominator: int

    def __init__(self, numerator: int, denominator: int = 1):
        if denominator == 0:
            raise ArgumentError("phase denominator must be nonzero")
        numerator = int(numerator) % abs(int(denominator))
        denominator = abs(int(denominator))
        g = gcd(numerator, denominator)
        if numerator == 0:
            numerator, denominator = 0, 1
        else:
            numerator //= g
            denominator //= g
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "denominator", denominator)

    def __add__(self, other: "PhaseQZ") -> "PhaseQZ":
        return PhaseQZ(
            self.numerator * other.denominator + other.numerator * self.denominator,
            self.denominator * other.denominator,
        )

    def __sub__(self, other: "PhaseQZ") -> "PhaseQZ":
        return self + (-other)

    def __neg__(self) -> "PhaseQZ":
        return PhaseQZ(-self.numerator, self.denominator)

    def scaled(self, k: int) -> "PhaseQZ":
        return PhaseQZ(k * self.numerator, self.denominator)

    @property
    def is_zero(self) -> bool:
        return self.numerator == 0

    def __str__(self):
        return f"{self.numerator}/{self.denominator}"

    @classmethod
    def zero(cls) -> "PhaseQZ":
        return cls(0, 1)

    @classmethod
    def parse(cls, text: str) -> "PhaseQZ":
        num, _, den = text.partition("/")
        return cls(int(num), int(den or 1))


def phase_add(a: PhaseQZ, b: PhaseQZ) -> PhaseQZ:
    return a + b


def phase_neg(a: PhaseQZ) -> PhaseQZ:
    return -a


def character_pair(chi: GroupElement, g: GroupElement) -> PhaseQZ:
    """Pair a dual-group element against a group element, landing in Q/Z.

    The value is sum_i chi_i * g_i / d_i mod 1, which is the evaluation of
    the character labelled by chi on g once each Z_d factor is embedded in
    Q/Z by 1 -> 1/d.
    """
    if chi.group.orders != g.group.orders:
        raise StructuralError(
            f"dual pairing needs matching orders: {chi.group.orders} vs {g.group.orders}"
        )
    total = PhaseQZ(0, 1)
    for c, x, d in zip(chi.residues, g.residues, g.group.orders):
        total = total + PhaseQZ(c * x, d)
    return total


def coefficients(*orders: int) -> AbelianCoefficients:
    """Shorthand constructor: coefficients(4, 2) is Z4 x Z2."""
    return AbelianCoefficients(orders)
