"""(Co)chains with finite abelian coefficients, finite and locally finite.

Chains carry dual-group coefficients and have a boundary; cochains carry
group coefficients and have a coboundary.  The locally finite variants live
on an ended complex: a finite part supported on a truncation at depth m,
plus per-end tails that repeat verbatim on every collar layer beyond m.
An LF chain of dimension i stores per end

    level tail: an i-chain a on the cross-section, placed on sigma x {l}
    slab tail:  an (i-1)-chain b, placed on sigma x [l-1, l]

for every l > m.  Its boundary has finite support iff both tails are closed
in the cross-section; the boundary then picks up the junction term
(-1)^i * b at collar level m on top of the finite part's boundary.  The
mirrored statement holds for LF cochains and the coboundary.

Pairings land in Q/Z and are defined whenever at most one argument has
infinite support; pairing two infinite objects raises, except for the
explicit finite-overlap variant used by the braiding formulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .complexes import EndedComplex, FiniteComplex
from .errors import (
    ArgumentError,
    InfiniteBoundaryError,
    StructuralError,
    UndefinedPairingError,
)
from .groups import AbelianCoefficients, GroupElement, PhaseQZ, character_pair


def _normalize(coeffs: dict) -> dict:
    return {c: g for c, g in coeffs.items() if not g.is_zero}


class _CellVector:
    """Finitely supported assignment of group elements to same-dim cells."""

    def __init__(
        self,
        complex: FiniteComplex,
        dim: int,
        group: AbelianCoefficients,
        coeffs: dict[str, GroupElement] | None = None,
    ):
        self.complex = complex
        self.dim = dim
        self.group = group
        coeffs = _normalize(coeffs or {})
        for cell in coeffs:
            if cell not in complex.index or complex.dim_of(cell) != dim:
                raise StructuralError(f"cell {cell!r} is not a {dim}-cell of {complex.name}")
        self.coeffs = coeffs

    @property
    def support(self) -> set[str]:
        return set(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, cell: str) -> GroupElement:
        return self.coeffs.get(cell, self.group.zero())

    def _check(self, other):
        if type(self) is not type(other):
            raise StructuralError("cannot mix chains and cochains")
        if self.dim != other.dim or self.group.orders != other.group.orders:
            raise StructuralError("dimension or coefficient mismatch")
        if self.complex is not other.complex and self.complex.name != other.complex.name:
            raise StructuralError(
                f"complex mismatch: {self.complex.name} vs {other.complex.name}"
            )

    def _combine(self, other, sign: int):
        self._check(other)
        out = dict(self.coeffs)
        for c, g in other.coeffs.items():
            out[c] = out.get(c, self.group.zero()) + (g if sign > 0 else -g)
        return type(self)(self.complex, self.dim, self.group, out)

    def __add__(self, other):
        return self._combine(other, +1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return type(self)(
            self.complex, self.dim, self.group, {c: -g for c, g in self.coeffs.items()}
        )

    def scaled(self, k: int):
        return type(self)(
            self.complex, self.dim, self.group, {c: g.scaled(k) for c, g in self.coeffs.items()}
        )

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and self.dim == other.dim
            and self.group.orders == other.group.orders
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((type(self).__name__, self.dim, tuple(sorted(self.coeffs))))

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "coeffs": {c: list(g.residues) for c, g in sorted(self.coeffs.items())},
        }

    def __repr__(self):
        entries = ", ".join(
            f"{c}:{'+'.join(map(str, g.residues))}" for c, g in sorted(self.coeffs.items())
        )
        return f"{type(self).__name__}(dim={self.dim}, {{{entries}}})"


class Chain(_CellVector):
    """Finitely supported chain with dual-group coefficients."""

    def boundary(self) -> "Chain":
        acc: dict[str, GroupElement] = {}
        zero = self.group.zero()
        for cell, g in self.coeffs.items():
            for facet, deg in self.complex.facets(cell).items():
                acc[facet] = acc.get(facet, zero) + g.scaled(deg)
        return Chain(self.complex, self.dim - 1, self.group, acc)


class Cochain(_CellVector):
    """Finitely supported cochain with group coefficients."""

    def coboundary(self) -> "Cochain":
        acc: dict[str, GroupElement] = {}
        zero = self.group.zero()
        for cell, g in self.coeffs.items():
            for coface, deg in self.complex.cofaces(cell).items():
                acc[coface] = acc.get(coface, zero) + g.scaled(deg)
        return Cochain(self.complex, self.dim + 1, self.group, acc)


def boundary(c: Chain) -> Chain:
    if c.dim < 1:
        return Chain(c.complex, c.dim - 1, c.group, {})
    return c.boundary()


def coboundary(a: Cochain) -> Cochain:
    return a.coboundary()


@dataclass
class Tail:
    """Verbatim-repeating tail of an LF (co)chain on one end."""

    level: Chain | Cochain
    slab: Chain | Cochain

    @property
    def is_zero(self) -> bool:
        return self.level.is_zero and self.slab.is_zero


class _LFVector:
    """Shared machinery of LFChain and LFCochain."""

    _finite_cls: type
    _side = "chain"

    def __init__(
        self,
        ended: EndedComplex,
        dim: int,
        group: AbelianCoefficients,
        depth: int = 1,
        finite=None,
        tails: dict[int, Tail] | None = None,
    ):
        self.ended = ended
        self.dim = dim
        self.group = group
        self.depth = depth
        trunc = ended.truncate(depth).result
        if finite is None:
            finite = self._finite_cls(trunc, dim, group, {})
        if finite.complex is not trunc:
            raise StructuralError("finite part must live on the truncation at `depth`")
        self.finite = finite
        self.tails = {}
        for ei, tail in (tails or {}).items():
            cs = ended.ends[ei].cross_section
            if tail.level.complex is not cs or tail.slab.complex is not cs:
                raise StructuralError("tail parts must live on the end cross-section")
            if tail.level.dim != dim or tail.slab.dim != dim - 1:
                raise StructuralError("tail dimensions must be (dim, dim-1)")
            if not tail.is_zero:
                self.tails[ei] = tail

    # -- structure -------------------------------------------------------

    def tail(self, end_index: int) -> Tail:
        if end_index in self.tails:
            return self.tails[end_index]
        cs = self.ended.ends[end_index].cross_section
        return Tail(
            self._finite_cls(cs, self.dim, self.group, {}),
            self._finite_cls(cs, self.dim - 1, self.group, {}),
        )

    @property
    def has_infinite_support(self) -> bool:
        return bool(self.tails)

    def coefficient(self, cell: str) -> GroupElement:
        dec = self.ended.decode(cell)
        if dec[0] == "core" or dec[2] <= self.depth:
            return self.finite.coefficient(cell)
        ei, kind, j, sigma = dec
        tail = self.tail(ei)
        part = tail.level if kind == "lvl" else tail.slab
        return part.coefficient(sigma)

    def materialize(self, depth: int):
        """Finite (co)chain on the depth-`depth` truncation."""
        if depth < self.depth:
            raise ArgumentError("cannot materialize shallower than the finite part")
        trunc = self.ended.truncate(depth).result
        coeffs = dict(self.finite.coeffs)
        for ei, tail in self.tails.items():
            for j in range(self.depth + 1, depth + 1):
                for sigma, g in tail.level.coeffs.items():
                    coeffs[self.ended.level_cell(ei, j, sigma)] = g
                for sigma, g in tail.slab.coeffs.items():
                    coeffs[self.ended.slab_cell(ei, j, sigma)] = g
        return self._finite_cls(trunc, self.dim, self.group, coeffs)

    def rebase(self, depth: int):
        if depth == self.depth:
            return self
        return type(self)(
            self.ended, self.dim, self.group, depth, self.materialize(depth), self.tails
        )

    def _combine(self, other, sign: int):
        if type(self) is not type(other):
            raise StructuralError("cannot mix LF chains and cochains")
        if self.ended is not other.ended or self.dim != other.dim:
            raise StructuralError("LF vectors live on different complexes or dims")
        m = max(self.depth, other.depth)
        a, b = self.rebase(m), other.rebase(m)
        fin = a.finite + b.finite if sign > 0 else a.finite - b.finite
        tails = {}
        for ei in range(len(self.ended.ends)):
            ta, tb = a.tail(ei), b.tail(ei)
            lvl = ta.level + tb.level if sign > 0 else ta.level - tb.level
            slb = ta.slab + tb.slab if sign > 0 else ta.slab - tb.slab
            tails[ei] = Tail(lvl, slb)
        return type(self)(self.ended, self.dim, self.group, m, fin, tails)

    def __add__(self, other):
        return self._combine(other, +1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return type(self)(
            self.ended,
            self.dim,
            self.group,
            self.depth,
            -self.finite,
            {ei: Tail(-t.level, -t.slab) for ei, t in self.tails.items()},
        )

    def same_as(self, other) -> bool:
        m = max(self.depth, other.depth)
        a, b = self.rebase(m), other.rebase(m)
        if a.finite != b.finite:
            return False
        return all(
            a.tail(ei).level == b.tail(ei).level and a.tail(ei).slab == b.tail(ei).slab
            for ei in range(len(self.ended.ends))
        )

    def check_closed_tails(self, side: str):
        for ei, tail in self.tails.items():
            if side == "boundary":
                bad = not boundary(tail.level).is_zero or not boundary(tail.slab).is_zero
            else:
                bad = (
                    not tail.level.coboundary().is_zero
                    or not tail.slab.coboundary().is_zero
                )
            if bad:
                raise InfiniteBoundaryError(self.ended.ends[ei].name, side)

    def to_json(self) -> dict:
        blob = self.finite.to_json()
        blob["depth"] = self.depth
        blob["tails"] = {
            self.ended.ends[ei].name: {
                "level": {c: list(g.residues) for c, g in sorted(t.level.coeffs.items())},
                "slab": {c: list(g.residues) for c, g in sorted(t.slab.coeffs.items())},
            }
            for ei, t in sorted(self.tails.items())
        }
        return blob


class LFChain(_LFVector):
    """Locally finite chain: finite part plus verbatim-repeating tails."""

    _finite_cls = Chain

    def boundary(self) -> Chain:
        """Finite boundary; raises InfiniteBoundaryError on open tails."""
        self.check_closed_tails("boundary")
        out = boundary(self.finite)
        sign = (-1) ** self.dim
        zero = self.group.zero()
        coeffs = dict(out.coeffs)
        for ei, tail in self.tails.items():
            for sigma, g in tail.slab.coeffs.items():
                cell = self.ended.level_cell(ei, self.depth, sigma)
                coeffs[cell] = coeffs.get(cell, zero) + g.scaled(sign)
        return Chain(out.complex, self.dim - 1, self.group, coeffs)


class LFCochain(_LFVector):
    """Infinite-support cochain: finite part plus verbatim-repeating tails."""

    _finite_cls = Cochain
    _side = "cochain"

    def coboundary(self) -> Cochain:
        """Finite coboundary; raises InfiniteBoundaryError on open tails.

        On top of the finite part's coboundary, each end contributes
        (-1)^dim * (level_tail - finite_at_collar) on the first tail slab.
        """
        self.check_closed_tails("coboundary")
        out = self.finite.coboundary()
        trunc_next = self.ended.truncate(self.depth + 1).result
        sign = (-1) ** self.dim
        zero = self.group.zero()
        coeffs = dict(out.coeffs)
        for ei in range(len(self.ended.ends)):
            tail = self.tail(ei)
            cs = self.ended.ends[ei].cross_section
            for sigma in cs.cells.get(self.dim, ()):
                collar = self.ended.level_cell(ei, self.depth, sigma)
                delta = tail.level.coefficient(sigma) - self.finite.coefficient(collar)
                if delta.is_zero:
                    continue
                cell = self.ended.slab_cell(ei, self.depth + 1, sigma)
                coeffs[cell] = coeffs.get(cell, zero) + delta.scaled(sign)
        return Cochain(trunc_next, self.dim + 1, self.group, coeffs)


def lf_boundary(c: LFChain) -> Chain:
    return c.boundary()


def lf_coboundary(a: LFCochain) -> Cochain:
    return a.coboundary()


def _pair_finite(b, a) -> PhaseQZ:
    total = PhaseQZ.zero()
    for cell, chi in b.coeffs.items():
        g = a.coefficient(cell)
        if not g.is_zero:
            total = total + character_pair(chi, g)
    return total


def _check_pairable(b, a):
    if not isinstance(b, (Chain, LFChain)):
        raise StructuralError("first pairing argument must be a chain")
    if not isinstance(a, (Cochain, LFCochain)):
        raise StructuralError("second pairing argument must be a cochain")
    if b.dim != a.dim:
        raise StructuralError(f"pairing dimension mismatch: {b.dim} vs {a.dim}")
    if b.group.orders != a.group.orders:
        raise StructuralError("pairing needs dual coefficient groups of equal orders")


def pair(b, a) -> PhaseQZ:
    """Sum of character pairings over the common support.

    Defined when at most one argument has infinite support; two infinite
    arguments raise UndefinedPairingError.
    """
    _check_pairable(b, a)
    b_inf = isinstance(b, LFChain) and b.has_infinite_support
    a_inf = isinstance(a, LFCochain) and a.has_infinite_support
    if b_inf and a_inf:
        raise UndefinedPairingError(
            "both arguments have infinite support; the pairing is undefined"
        )
    if b_inf:
        total = PhaseQZ.zero()
        for cell, g in a.coeffs.items() if isinstance(a, Cochain) else a.finite.coeffs.items():
            chi = b.coefficient(cell)
            if not chi.is_zero:
                total = total + character_pair(chi, g)
        return total
    bfin = b.finite if isinstance(b, LFChain) else b
    return _pair_finite(bfin, a)


def pair_finite_overlap(b: LFChain, a: LFCochain) -> PhaseQZ:
    """Pairing of two infinite objects whose supports intersect finitely.

    Requires per-end disjointness of the tail supports; otherwise the
    overlap is infinite and UndefinedPairingError is raised.
    """
    _check_pairable(b, a)
    for ei in range(len(b.ended.ends)):
        tb, ta = b.tail(ei), a.tail(ei)
        if (tb.level.support & ta.level.support) or (tb.slab.support & ta.slab.support):
            raise UndefinedPairingError(
                f"tail supports overlap on end {b.ended.ends[ei].name}"
            )
    m = max(b.depth, a.depth)
    return _pair_finite(b.materialize(m), a.materialize(m))


def pair_at_infinity(d: LFChain, a: LFCochain) -> PhaseQZ:
    """Pairing of classes at infinity: <d, dT a> - <d d, a>.

    d must be an LF (k+1)-chain with finite boundary and a an LF k-cochain
    with finite coboundary; both certificates are checked.
    """
    if not isinstance(d, LFChain) or not isinstance(a, LFCochain):
        raise StructuralError("pair_at_infinity takes (LFChain, LFCochain)")
    if d.dim != a.dim + 1:
        raise StructuralError(
            f"need chain dim = cochain dim + 1, got {d.dim} vs {a.dim}"
        )
    return pair(d, a.coboundary()) - pair(d.boundary(), a)
