"""Homology of finite and ended complexes over finite abelian coefficients.

Groups computed here, all with explicit generator representatives, canonical
coset coordinates and boundary witnesses:

  * homology / cohomology of a finite complex (or a truncation);
  * relative (co)homology of a complex modulo a collar;
  * locally finite homology and finite-support cohomology of an ended
    complex, realized as relative groups of (truncation, collar);
  * (co)homology at infinity, realized on the disjoint union of the end
    cross-sections, with verbatim-tail realizations of every class.

Coefficients split into cyclic prime-power components; each component is
handled over Z/qZ with Howell bases for cycles and boundaries and a
diagonalized relation matrix for the quotient.  The component answers are
recombined into canonical invariant factors (each dividing the next) with
matching generators and a CRT coordinate map.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .chains import Chain, Cochain, LFChain, LFCochain, Tail, boundary
from .complexes import EndedComplex, FiniteComplex, disjoint_union
from .errors import (
    ArgumentError,
    StabilizationError,
    StructuralError,
    WitnessUnrepresentableError,
)
from .groups import AbelianCoefficients, GroupElement
from .zmod import HowellBasis, diagonalize, howell_form, kernel_basis

DEFAULT_DEPTH = 3
MAX_DEPTH = 8


def _prime_powers(d: int) -> list[int]:
    out = []
    n, p = d, 2
    while p * p <= n:
        if n % p == 0:
            q = 1
            while n % p == 0:
                n //= p
                q *= p
            out.append(q)
        p += 1
    if n > 1:
        out.append(n)
    return out


def _crt_pair(a1: int, m1: int, a2: int, m2: int) -> tuple[int, int]:
    g, s = gcd(m1, m2), pow(m1, -1, m2) if gcd(m1, m2) == 1 else None
    if g != 1:
        raise ArgumentError("CRT needs coprime moduli")
    m = m1 * m2
    x = (a1 + m1 * ((a2 - a1) * s % m2)) % m
    return x, m


@dataclass
class _Component:
    """Quotient presentation of one prime-power coefficient component."""

    factor_index: int
    q: int
    lift_unit: int
    cycles: HowellBasis
    bounds: HowellBasis
    Q: np.ndarray
    factors: np.ndarray
    kept: list[int]
    gen_vectors: list[np.ndarray]


class HomologyClass:
    """Element of a computed group, as canonical coset coordinates."""

    def __init__(self, presentation: "GroupPresentation", coordinates):
        self.presentation = presentation
        self.coordinates = tuple(
            int(c) % f for c, f in zip(coordinates, presentation.invariant_factors)
        )

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coordinates)

    def _check(self, other):
        if self.presentation is not other.presentation:
            raise StructuralError("classes live in different presentations")

    def __add__(self, other):
        self._check(other)
        return HomologyClass(
            self.presentation,
            [a + b for a, b in zip(self.coordinates, other.coordinates)],
        )

    def __sub__(self, other):
        self._check(other)
        return HomologyClass(
            self.presentation,
            [a - b for a, b in zip(self.coordinates, other.coordinates)],
        )

    def __neg__(self):
        return HomologyClass(self.presentation, [-a for a in self.coordinates])

    def __eq__(self, other):
        return (
            isinstance(other, HomologyClass)
            and self.presentation is other.presentation
            and self.coordinates == other.coordinates
        )

    def __hash__(self):
        return hash(self.coordinates)

    def representative(self):
        """Sum of generator representatives weighted by the coordinates."""
        rep = None
        for c, gen in zip(self.coordinates, self.presentation.generators):
            term = gen.scaled(c) if not isinstance(gen, (LFChain, LFCochain)) else _scale_lf(gen, c)
            rep = term if rep is None else rep + term
        if rep is None:
            rep = self.presentation._make_vector({})
        return rep

    def __repr__(self):
        return f"HomologyClass{self.coordinates} of {self.presentation.label}"


def _scale_lf(x, k: int):
    out = type(x)(
        x.ended,
        x.dim,
        x.group,
        x.depth,
        x.finite.scaled(k),
        {ei: Tail(t.level.scaled(k), t.slab.scaled(k)) for ei, t in x.tails.items()},
    )
    return out


class GroupPresentation:
    """Finitely presented group with generators and coordinate map.

    Invariant factors are canonical: each divides the next, units dropped.
    reduce() maps a (co)cycle to coordinates; is_boundary() decides the zero
    class and produces an exact bounding witness.
    """

    def __init__(self, label, complex, dim, coefficients, kind, cells, components, collar=()):
        self.label = label
        self.complex = complex
        self.dim = dim
        self.coefficients = coefficients
        self.kind = kind
        self.cells = list(cells)
        self._cell_pos = {c: i for i, c in enumerate(self.cells)}
        self._components = components
        self._collar = set(collar)
        self._vector_cls = Cochain if "cohomology" in kind else Chain
        self._build_merge()

    # -- canonical merge of prime-power pieces ---------------------------

    def _build_merge(self):
        pieces = []
        for ci, comp in enumerate(self._components):
            for jpos, j in enumerate(comp.kept):
                pieces.append((int(comp.factors[j]), ci, jpos))
        by_prime: dict[int, list] = {}
        for order, ci, jpos in sorted(pieces, key=lambda t: (-t[0], t[1], t[2])):
            p = _prime_of(order)
            by_prime.setdefault(p, []).append((order, ci, jpos))
        slots = max((len(v) for v in by_prime.values()), default=0)
        merged = []
        for k in range(slots):
            parts = [
                v[k] for v in by_prime.values() if k < len(v)
            ]
            f = 1
            for order, _, _ in parts:
                f *= order
            merged.append((f, parts))
        merged.reverse()  # ascending divisibility
        self._merged = merged
        self.invariant_factors = tuple(f for f, _ in merged)
        self.generators = [self._generator_chain(parts) for _, parts in merged]

    def _generator_chain(self, parts):
        total: dict[str, GroupElement] = {}
        zero = self.coefficients.zero()
        for _, ci, jpos in parts:
            comp = self._components[ci]
            vec = comp.gen_vectors[jpos]
            for pos in np.nonzero(vec)[0]:
                cell = self.cells[int(pos)]
                total[cell] = total.get(cell, zero) + self._lift(comp, int(vec[pos]))
        return self._make_vector(total)

    def _lift(self, comp: _Component, value: int) -> GroupElement:
        res = [0] * len(self.coefficients.orders)
        d_i = self.coefficients.orders[comp.factor_index]
        res[comp.factor_index] = (value * comp.lift_unit) % d_i
        return GroupElement(self.coefficients, res)

    def _make_vector(self, coeffs):
        return self._vector_cls(self.complex, self.dim, self.coefficients, coeffs)

    # -- queries ----------------------------------------------------------

    @property
    def order(self) -> int:
        n = 1
        for f in self.invariant_factors:
            n *= f
        return n

    @property
    def is_trivial(self) -> bool:
        return not self.invariant_factors

    @property
    def exponent(self) -> int:
        return self.invariant_factors[-1] if self.invariant_factors else 1

    def zero_class(self) -> HomologyClass:
        return HomologyClass(self, [0] * len(self.invariant_factors))

    def _vectorize(self, z, comp: _Component) -> np.ndarray:
        vec = np.zeros(len(self.cells), dtype=np.int64)
        for cell, g in z.coeffs.items():
            pos = self._cell_pos.get(cell)
            if pos is None:
                if cell in self._collar:
                    continue
                raise StructuralError(
                    f"{cell!r} is outside the chain basis of {self.label}"
                )
            vec[pos] = g.residues[comp.factor_index] % comp.q
        return vec

    def _check_input(self, z):
        if not isinstance(z, self._vector_cls):
            raise StructuralError(f"{self.label} expects {self._vector_cls.__name__} input")
        if z.dim != self.dim or z.group.orders != self.coefficients.orders:
            raise StructuralError("dimension or coefficient mismatch")

    def reduce(self, z) -> HomologyClass:
        """Canonical coordinates of a (co)cycle; raises if z is not one."""
        self._check_input(z)
        raw = []
        for comp in self._components:
            vec = self._vectorize(z, comp)
            t = comp.cycles.member(vec)
            if t is None:
                raise StructuralError(f"input is not a cycle for {self.label}")
            u = (t @ comp.Q) % comp.q if t.size else np.zeros(comp.Q.shape[0], dtype=np.int64)
            raw.append(u)
        coords = []
        for f, parts in self._merged:
            x, mod = 0, 1
            for order, ci, jpos in parts:
                comp = self._components[ci]
                j = comp.kept[jpos]
                c = int(raw[ci][j]) % order
                x, mod = _crt_pair(x, mod, c, order)
            coords.append(x)
        return HomologyClass(self, coords)

    coordinates_of = reduce

    def is_boundary(self, z):
        """Decide the zero class; on success return (True, witness) with the
        witness an exact bounding (co)chain over the presentation's witness
        cells."""
        self._check_input(z)
        total: dict[str, GroupElement] = {}
        zero = self.coefficients.zero()
        for comp in self._components:
            vec = self._vectorize(z, comp)
            s = comp.bounds.member(vec)
            if s is None:
                return False, None
            w = (s @ comp.bounds.transform) % comp.q if s.size else np.zeros(len(self.witness_cells), dtype=np.int64)
            for pos in np.nonzero(w)[0]:
                cell = self.witness_cells[int(pos)]
                total[cell] = total.get(cell, zero) + self._lift(comp, int(w[pos]))
        wit = self._make_witness(total)
        return True, wit

    def _make_witness(self, coeffs):
        raise NotImplementedError

    def to_json(self) -> dict:
        return {
            "group": list(self.invariant_factors),
            "order": self.order,
            "generators": [g.to_json() for g in self.generators],
        }

    def __repr__(self):
        return f"{self.label}: {list(self.invariant_factors) or 'trivial'}"


def _prime_of(q: int) -> int:
    p = 2
    while q % p:
        p += 1
    return p


class _FinitePresentation(GroupPresentation):
    """Presentation over a finite complex; absolute or relative to a collar."""

    def __init__(self, label, X, dim, A, kind, cells, comps, witness_cells, collar=()):
        self.witness_cells = list(witness_cells)
        super().__init__(label, X, dim, A, kind, cells, comps, collar)

    def _make_witness(self, coeffs):
        wd = self.dim + 1 if "co" not in self.kind else self.dim - 1
        cls = Chain if "co" not in self.kind else Cochain
        return cls(self.complex, wd, self.coefficients, coeffs)


def _restrict(M: np.ndarray, rows_keep, cols_keep) -> np.ndarray:
    if M.size == 0:
        return np.zeros((len(rows_keep), len(cols_keep)), dtype=np.int64)
    return M[np.ix_(rows_keep, cols_keep)]


def _build_components(cells, kercond, bgen, A: AbelianCoefficients):
    comps = []
    for fi, d_i in enumerate(A.orders):
        for q in _prime_powers(d_i):
            cyc = kernel_basis(kercond, q)
            hb = howell_form(bgen, q, track_transform=True)
            k = cyc.rows.shape[0]
            n = len(cells)
            if k:
                left = np.concatenate([cyc.rows, np.eye(k, dtype=np.int64)], axis=1)
                right = np.concatenate(
                    [hb.rows, np.zeros((hb.rows.shape[0], k), dtype=np.int64)], axis=1
                )
                rel_h = howell_form(np.concatenate([left, right], axis=0), q)
                zero_left = [
                    i
                    for i in range(rel_h.rows.shape[0])
                    if not rel_h.rows[i, :n].any()
                ]
                R = rel_h.rows[zero_left][:, n:]
            else:
                R = np.zeros((0, 0), dtype=np.int64)
            diag = diagonalize(R, q)
            kept = [j for j in range(len(diag.factors)) if int(diag.factors[j]) > 1]
            gen_vectors = [
                (diag.Qinv[j] @ cyc.rows) % q if k else np.zeros(n, dtype=np.int64)
                for j in kept
            ]
            rest = d_i // q
            lift = _crt_pair(1 % q, q, 0, rest)[0] if rest > 1 else 1
            comps.append(
                _Component(fi, q, lift, cyc, hb, diag.Q, diag.factors, kept, gen_vectors)
            )
    return comps


def _finite_presentation(X: FiniteComplex, i: int, A, kind: str, collar=()):
    collar = set(collar)
    keep = {
        d: [c for c in X.cells.get(d, ())] if not collar else [c for c in X.cells.get(d, ()) if c not in collar]
        for d in (i - 1, i, i + 1)
    }
    idx = {
        d: [k for k, c in enumerate(X.cells.get(d, ())) if c in set(keep[d])]
        for d in (i - 1, i, i + 1)
    }
    cells = keep[i]
    Bi = _restrict(X.boundary_matrix(i), idx[i], idx[i - 1]) if i >= 1 else np.zeros(
        (len(cells), 0), dtype=np.int64
    )
    Bi1 = _restrict(X.boundary_matrix(i + 1), idx[i + 1], idx[i])
    if "co" in kind:
        kercond, bgen = Bi1.T, Bi.T
        witness_cells = keep[i - 1]
    else:
        kercond, bgen = Bi, Bi1
        witness_cells = keep[i + 1]
    comps = _build_components(cells, kercond, bgen, A)
    label = f"{kind}_{i}({X.name}; {A})"
    return _FinitePresentation(label, X, i, A, kind, cells, comps, witness_cells, collar)


def _cache(obj, key, build):
    store = getattr(obj, "_presentation_cache", None)
    if store is None:
        store = {}
        obj._presentation_cache = store
    if key not in store:
        store[key] = build()
    return store[key]


def homology(cx, i: int, A: AbelianCoefficients, depth: int | None = None):
    """H_i with coefficients in the dual group; for an ended complex this is
    the homology of its (homotopy equivalent) truncation."""
    if isinstance(cx, EndedComplex):
        m = DEFAULT_DEPTH if depth is None else depth
        X = cx.truncate(m).result
    else:
        X = cx
    return _cache(X, ("homology", i, A.orders), lambda: _finite_presentation(X, i, A, "homology"))


def cohomology(cx, i: int, A: AbelianCoefficients, depth: int | None = None):
    """H^i with arbitrary-support cochains; on an ended complex computed on
    the truncation, with generators extendable to infinite cochains."""
    if isinstance(cx, EndedComplex):
        m = DEFAULT_DEPTH if depth is None else depth
        X = cx.truncate(m).result
    else:
        X = cx
    return _cache(X, ("cohomology", i, A.orders), lambda: _finite_presentation(X, i, A, "cohomology"))


def relative_homology(X: FiniteComplex, collar, i: int, A: AbelianCoefficients):
    return _cache(
        X,
        ("relative_homology", i, A.orders, tuple(sorted(collar))),
        lambda: _finite_presentation(X, i, A, "relative_homology", collar),
    )


def relative_cohomology(X: FiniteComplex, collar, i: int, A: AbelianCoefficients):
    return _cache(
        X,
        ("relative_cohomology", i, A.orders, tuple(sorted(collar))),
        lambda: _finite_presentation(X, i, A, "relative_cohomology", collar),
    )


# -- locally finite homology ------------------------------------------------


class LfHomology:
    """H^lf_i of an ended complex: relative homology of (truncation, collar),
    generators extended to locally finite cycles by verbatim tails."""

    def __init__(self, e: EndedComplex, i: int, A, depth: int, rel: _FinitePresentation):
        self.ended = e
        self.dim = i
        self.coefficients = A
        self.depth = depth
        self.rel = rel
        self.invariant_factors = rel.invariant_factors
        self.label = f"lf_homology_{i}({e.name}; {A})"
        self.generators = [self._extend(g) for g in rel.generators]

    def _extend(self, z: Chain) -> LFChain:
        e, i, m = self.ended, self.dim, self.depth
        bz = boundary(z)
        sign = (-1) ** (i + 1)
        tails = {}
        for ei, end in enumerate(e.ends):
            coeffs = {}
            for sigma in end.cross_section.cells.get(i - 1, ()):
                g = bz.coefficient(e.level_cell(ei, m, sigma))
                if not g.is_zero:
                    coeffs[sigma] = g.scaled(sign)
            tails[ei] = Tail(
                Chain(end.cross_section, i, self.coefficients, {}),
                Chain(end.cross_section, i - 1, self.coefficients, coeffs),
            )
        return LFChain(e, i, self.coefficients, m, z, tails)

    @property
    def order(self):
        return self.rel.order

    @property
    def is_trivial(self):
        return self.rel.is_trivial

    def zero_class(self):
        return HomologyClass(self, [0] * len(self.invariant_factors))

    def _make_vector(self, coeffs):
        return LFChain(self.ended, self.dim, self.coefficients, self.depth)

    def _restrict(self, z) -> Chain:
        trunc = self.ended.truncate(self.depth).result
        if isinstance(z, Chain):
            if getattr(z.complex, "ended_source", None) is not self.ended:
                raise StructuralError(
                    "finite input must live on a truncation of the same ended complex"
                )
            src = dict(z.coeffs)
        else:
            if z.ended is not self.ended or z.dim != self.dim:
                raise StructuralError("LF chain on a different complex or dimension")
            z.check_closed_tails("boundary")
            src = {
                c: z.coefficient(c)
                for c in trunc.cells.get(self.dim, ())
                if not z.coefficient(c).is_zero
            }
        coeffs = {c: g for c, g in src.items() if c in trunc.index}
        return Chain(trunc, self.dim, self.coefficients, coeffs)

    def reduce(self, z) -> HomologyClass:
        return HomologyClass(self, self.rel.reduce(self._restrict(z)).coordinates)

    coordinates_of = reduce

    def is_boundary(self, z):
        """Exact locally finite witness: (True, F) with boundary(F) == z.

        Fails with WitnessUnrepresentableError when the class is zero but
        every bounding chain needs non-verbatim tails (a tail level cycle
        with nonzero cross-section class).
        """
        if isinstance(z, Chain):
            z = LFChain(
                self.ended, self.dim, self.coefficients,
                getattr(z.complex, "truncation_depth", self.depth), z, {},
            )
        cls = self.reduce(z)
        if not cls.is_zero:
            return False, None
        e, i, A = self.ended, self.dim, self.coefficients
        m = max(self.depth, z.depth)
        tails = {}
        for ei, end in enumerate(e.ends):
            t = z.tail(ei)
            cs = end.cross_section
            ok_lvl, a_f = homology(cs, i, A).is_boundary(t.level)
            ok_slb, b_f = homology(cs, i - 1, A).is_boundary(t.slab)
            if not (ok_lvl and ok_slb):
                raise WitnessUnrepresentableError(
                    f"zero class on {self.label}, but the tail on {end.name} "
                    "is not bounded within the cross-section"
                )
            tails[ei] = Tail(a_f, b_f)
        f0 = LFChain(e, i + 1, A, m, None, tails)
        r = z.rebase(m) - boundary_as_lf(f0)
        assert not r.has_infinite_support
        rel_m = _cache(
            e.truncate(m).result,
            ("relative_homology", i, A.orders, tuple(sorted(e.truncate(m).collar))),
            lambda: _finite_presentation(
                e.truncate(m).result, i, A, "relative_homology", e.truncate(m).collar
            ),
        )
        ok, w = rel_m.is_boundary(
            Chain(e.truncate(m).result, i, A, {c: g for c, g in r.finite.coeffs.items() if c not in set(e.truncate(m).collar)})
        )
        assert ok, "relative class vanished but no relative witness found"
        junk = boundary(w) - r.finite
        sign = -((-1) ** (i + 1))
        ctails = {}
        for ei, end in enumerate(e.ends):
            coeffs = {}
            for sigma in end.cross_section.cells.get(i, ()):
                g = junk.coefficient(e.level_cell(ei, m, sigma))
                if not g.is_zero:
                    coeffs[sigma] = g.scaled(sign)
            ctails[ei] = Tail(
                Chain(end.cross_section, i + 1, A, {}),
                Chain(end.cross_section, i, A, coeffs),
            )
        fixed = LFChain(e, i + 1, A, m, w, ctails)
        F = f0 + fixed
        if not boundary_as_lf(F).same_as(z):
            raise WitnessUnrepresentableError(
                f"witness reconstruction failed on {self.label}"
            )
        return True, F

    def to_json(self):
        return {
            "group": list(self.invariant_factors),
            "order": self.order,
            "generators": [g.to_json() for g in self.generators],
        }

    def __repr__(self):
        return f"{self.label}: {list(self.invariant_factors) or 'trivial'}"


def boundary_as_lf(c: LFChain) -> LFChain:
    """Boundary of an LF chain as an LF chain (tails need not be closed)."""
    e, i, A, m = c.ended, c.dim, c.group, c.depth
    fin = boundary(c.finite)
    sign = (-1) ** i
    coeffs = dict(fin.coeffs)
    zero = A.zero()
    tails = {}
    for ei, end in enumerate(e.ends):
        t = c.tail(ei)
        for sigma, g in t.slab.coeffs.items():
            cell = e.level_cell(ei, m, sigma)
            coeffs[cell] = coeffs.get(cell, zero) + g.scaled(sign)
        tails[ei] = Tail(boundary(t.level), boundary(t.slab))
    return LFChain(e, i - 1, A, m, Chain(fin.complex, i - 1, A, coeffs), tails)


def coboundary_as_lf(a: LFCochain) -> LFCochain:
    """Coboundary of an LF cochain as an LF cochain at depth+1."""
    e, i, A, m = a.ended, a.dim, a.group, a.depth
    fin = a.finite.coboundary()
    trunc_next = e.truncate(m + 1).result
    sign = (-1) ** i
    zero = A.zero()
    coeffs = dict(fin.coeffs)
    tails = {}
    for ei, end in enumerate(e.ends):
        t = a.tail(ei)
        cs = end.cross_section
        for sigma in cs.cells.get(i, ()):
            delta = t.level.coefficient(sigma) - a.finite.coefficient(
                e.level_cell(ei, m, sigma)
            )
            if not delta.is_zero:
                cell = e.slab_cell(ei, m + 1, sigma)
                coeffs[cell] = coeffs.get(cell, zero) + delta.scaled(sign)
        tails[ei] = Tail(t.level.coboundary(), t.slab.coboundary())
    return LFCochain(e, i + 1, A, m + 1, Cochain(trunc_next, i + 1, A, coeffs), tails)


class LfCohomology:
    """H^i_lf of an ended complex: relative cohomology of (truncation, collar).

    Generators are finite cochains that are honest cocycles of the infinite
    complex; is_boundary solves for an exact finite cobounding cochain on a
    deep enough truncation.
    """

    def __init__(self, e, i, A, depth, rel: _FinitePresentation):
        self.ended = e
        self.dim = i
        self.coefficients = A
        self.depth = depth
        self.rel = rel
        self.invariant_factors = rel.invariant_factors
        self.label = f"lf_cohomology_{i}({e.name}; {A})"
        self.generators = list(rel.generators)

    @property
    def order(self):
        return self.rel.order

    @property
    def is_trivial(self):
        return self.rel.is_trivial

    def zero_class(self):
        return HomologyClass(self, [0] * len(self.invariant_factors))

    def _make_vector(self, coeffs):
        return Cochain(
            self.ended.truncate(self.depth).result, self.dim, self.coefficients, coeffs
        )

    def _restrict(self, z) -> Cochain:
        if isinstance(z, LFCochain):
            if z.has_infinite_support:
                raise StructuralError(f"{self.label} takes finite-support cochains")
            z = z.finite
        trunc = self.ended.truncate(self.depth).result
        collar = set(self.ended.truncate(self.depth).collar)
        for c in z.coeffs:
            if c not in trunc.index or c in collar:
                raise StructuralError(
                    f"support of the input reaches {c!r}; rebuild the "
                    f"presentation at a deeper truncation than {self.depth}"
                )
        return Cochain(trunc, self.dim, self.coefficients, dict(z.coeffs))

    def reduce(self, z) -> HomologyClass:
        return HomologyClass(self, self.rel.reduce(self._restrict(z)).coordinates)

    coordinates_of = reduce

    def is_boundary(self, z):
        """Exact finite witness: (True, w) with the infinite-complex
        coboundary of w equal to z."""
        zf = self._restrict(z)
        if not self.rel.reduce(zf).is_zero:
            return False, None
        e, i, A = self.ended, self.dim, self.coefficients
        for M in range(self.depth, MAX_DEPTH + 1):
            XM = e.truncate(M).result
            XM1 = e.truncate(M + 1).result
            rows = XM.cells.get(i - 1, [])
            cols = XM1.cells.get(i, [])
            col_pos = {c: k for k, c in enumerate(cols)}
            Mext = np.zeros((len(rows), len(cols)), dtype=np.int64)
            for r, cell in enumerate(rows):
                for cof, v in XM1.cofaces(cell).items():
                    Mext[r, col_pos[cof]] = v
            target = Cochain(XM1, i, A, dict(zf.coeffs))
            total: dict[str, GroupElement] = {}
            zero = A.zero()
            feasible = True
            for fi, d_i in enumerate(A.orders):
                for q in _prime_powers(d_i):
                    hb = howell_form(Mext, q, track_transform=True)
                    vec = np.zeros(len(cols), dtype=np.int64)
                    for cell, g in target.coeffs.items():
                        vec[col_pos[cell]] = g.residues[fi] % q
                    s = hb.member(vec)
                    if s is None:
                        feasible = False
                        break
                    w = (s @ hb.transform) % q if s.size else np.zeros(len(rows), dtype=np.int64)
                    rest = d_i // q
                    lift = _crt_pair(1 % q, q, 0, rest)[0] if rest > 1 else 1
                    for pos in np.nonzero(w)[0]:
                        cell = rows[int(pos)]
                        res = [0] * len(A.orders)
                        res[fi] = (int(w[pos]) * lift) % d_i
                        total[cell] = total.get(cell, zero) + GroupElement(A, res)
                if not feasible:
                    break
            if feasible:
                return True, Cochain(XM, i - 1, A, total)
        raise WitnessUnrepresentableError(
            f"zero class on {self.label} but no finite witness up to depth {MAX_DEPTH}"
        )

    def to_json(self):
        return {
            "group": list(self.invariant_factors),
            "order": self.order,
            "generators": [g.to_json() for g in self.generators],
        }

    def __repr__(self):
        return f"{self.label}: {list(self.invariant_factors) or 'trivial'}"


def _check_stabilization(build, e, i, A, depth, reducer):
    """Groups at depth and depth+1 must agree in factors and in the span of
    the transported generators."""
    p_m = build(depth)
    p_m1 = build(depth + 1)
    if p_m.invariant_factors != p_m1.invariant_factors:
        raise StabilizationError(
            f"{p_m.label}: factors differ between depths {depth} and {depth + 1}: "
            f"{p_m.invariant_factors} vs {p_m1.invariant_factors}",
            ends=e.end_names(),
        )
    if p_m.invariant_factors:
        images = [reducer(p_m1, g) for g in p_m.generators]
        if subgroup_order(p_m1, images) != p_m1.order:
            raise StabilizationError(
                f"{p_m.label}: generators do not span at depth {depth + 1}",
                ends=e.end_names(),
            )
    return p_m


def lf_homology(
    e: EndedComplex, i: int, A: AbelianCoefficients, depth: int = DEFAULT_DEPTH,
    stabilization: bool = True,
):
    """Locally finite homology via the (truncation, collar) relative group."""
    if depth < 1 or depth + 1 > MAX_DEPTH + 1:
        raise ArgumentError(f"depth must be in [1, {MAX_DEPTH}]")

    def build(m):
        tr = e.truncate(m)
        rel = relative_homology(tr.result, tr.collar, i, A)
        return _cache(e, ("lf_homology", i, A.orders, m), lambda: LfHomology(e, i, A, m, rel))

    if not stabilization:
        return build(depth)
    return _cache(
        e,
        ("lf_homology_checked", i, A.orders, depth),
        lambda: _check_stabilization(build, e, i, A, depth, lambda p, g: p.reduce(g)),
    )


def lf_cohomology(
    e: EndedComplex, i: int, A: AbelianCoefficients, depth: int = DEFAULT_DEPTH,
    stabilization: bool = True,
):
    """Finite-support cohomology via the (truncation, collar) relative group."""
    if depth < 1 or depth + 1 > MAX_DEPTH + 1:
        raise ArgumentError(f"depth must be in [1, {MAX_DEPTH}]")

    def build(m):
        tr = e.truncate(m)
        rel = relative_cohomology(tr.result, tr.collar, i, A)
        return _cache(e, ("lf_cohomology", i, A.orders, m), lambda: LfCohomology(e, i, A, m, rel))

    if not stabilization:
        return build(depth)

    def reducer(p_m1, g):
        return p_m1.reduce(g)

    return _cache(
        e,
        ("lf_cohomology_checked", i, A.orders, depth),
        lambda: _check_stabilization(build, e, i, A, depth, reducer),
    )


# -- (co)homology at infinity ----------------------------------------------


class InfinityPresentation:
    """(Co)homology at infinity on the disjoint union of cross-sections."""

    def __init__(self, e: EndedComplex, i: int, A, kind: str):
        self.ended = e
        self.dim = i
        self.coefficients = A
        self.kind = kind
        union = _cache(e, ("union",), lambda: disjoint_union(
            [end.cross_section for end in e.ends], name=f"{e.name}.ends"
        ))
        self.union = union
        if kind == "homology_at_infinity":
            self.inner = homology(union, i, A)
        else:
            self.inner = cohomology(union, i, A)
        self.invariant_factors = self.inner.invariant_factors
        self.label = f"{kind}_{i}({e.name}; {A})"
        self.generators = list(self.inner.generators)
        self.generator_realizations = [self.realize_vector(g) for g in self.generators]

    @property
    def order(self):
        return self.inner.order

    @property
    def is_trivial(self):
        return self.inner.is_trivial

    def zero_class(self):
        return HomologyClass(self, [0] * len(self.invariant_factors))

    def _make_vector(self, coeffs):
        return self.inner._make_vector(coeffs)

    def embed(self, end_index: int, v):
        """Cross-section (co)chain -> (co)chain on the disjoint union."""
        cls = type(v)
        return cls(
            self.union, v.dim, v.group,
            {f"p{end_index}:{c}": g for c, g in v.coeffs.items()},
        )

    def split(self, v, end_index: int, target: FiniteComplex):
        prefix = f"p{end_index}:"
        cls = type(v)
        return cls(
            target, v.dim, v.group,
            {c[len(prefix):]: g for c, g in v.coeffs.items() if c.startswith(prefix)},
        )

    def reduce(self, z) -> HomologyClass:
        if isinstance(z, (LFChain, LFCochain)):
            return self.class_at_infinity(z)
        return HomologyClass(self, self.inner.reduce(z).coordinates)

    coordinates_of = reduce

    def is_boundary(self, z):
        if isinstance(z, (LFChain, LFCochain)):
            return self.inner.is_boundary(self._union_vector(z))
        return self.inner.is_boundary(z)

    def _union_vector(self, z):
        e = self.ended
        if self.kind == "homology_at_infinity":
            if not isinstance(z, LFChain) or z.dim != self.dim + 1:
                raise StructuralError(
                    f"{self.label} reads LF chains of dimension {self.dim + 1}"
                )
            z.check_closed_tails("boundary")
            sign = (-1) ** (z.dim + 1)
            total = Chain(self.union, self.dim, self.coefficients, {})
            for ei in range(len(e.ends)):
                total = total + self.embed(ei, z.tail(ei).slab.scaled(sign))
            return total
        if not isinstance(z, LFCochain) or z.dim != self.dim:
            raise StructuralError(f"{self.label} reads LF cochains of dimension {self.dim}")
        z.check_closed_tails("coboundary")
        total = Cochain(self.union, self.dim, self.coefficients, {})
        for ei in range(len(e.ends)):
            total = total + self.embed(ei, z.tail(ei).level)
        return total

    def class_at_infinity(self, z) -> HomologyClass:
        """Class at infinity of an LF chain with finite boundary (read off
        the slab tails) or an LF cochain with finite coboundary (read off
        the level tails)."""
        return HomologyClass(self, self.inner.reduce(self._union_vector(z)).coordinates)

    def realize_vector(self, v):
        """Verbatim-tail realization of a (co)cycle on the cross-sections."""
        e, A = self.ended, self.coefficients
        if self.kind == "homology_at_infinity":
            sign = (-1) ** self.dim
            tails = {}
            for ei, end in enumerate(e.ends):
                part = self.split(v, ei, end.cross_section)
                tails[ei] = Tail(
                    Chain(end.cross_section, self.dim + 1, A, {}),
                    part.scaled(sign),
                )
            return LFChain(e, self.dim + 1, A, DEFAULT_DEPTH, None, tails)
        tails = {}
        for ei, end in enumerate(e.ends):
            part = self.split(v, ei, end.cross_section)
            tails[ei] = Tail(
                part, Cochain(end.cross_section, self.dim - 1, A, {})
            )
        return LFCochain(e, self.dim, A, DEFAULT_DEPTH, None, tails)

    def realize(self, cls: HomologyClass):
        out = None
        for c, real in zip(cls.coordinates, self.generator_realizations):
            term = _scale_lf(real, c)
            out = term if out is None else out + term
        if out is None:
            if self.kind == "homology_at_infinity":
                return LFChain(self.ended, self.dim + 1, self.coefficients, DEFAULT_DEPTH)
            return LFCochain(self.ended, self.dim, self.coefficients, DEFAULT_DEPTH)
        return out

    def to_json(self):
        return {
            "group": list(self.invariant_factors),
            "order": self.order,
            "generators": [g.to_json() for g in self.generators],
        }

    def __repr__(self):
        return f"{self.label}: {list(self.invariant_factors) or 'trivial'}"


def homology_at_infinity(e: EndedComplex, i: int, A: AbelianCoefficients):
    return _cache(
        e, ("h_inf", i, A.orders), lambda: InfinityPresentation(e, i, A, "homology_at_infinity")
    )


def cohomology_at_infinity(e: EndedComplex, i: int, A: AbelianCoefficients):
    return _cache(
        e, ("coh_inf", i, A.orders), lambda: InfinityPresentation(e, i, A, "cohomology_at_infinity")
    )


# -- subgroup orders and long exact sequence maps ----------------------------


def subgroup_order(presentation, classes) -> int:
    """Order of the subgroup generated by the given classes."""
    factors = presentation.invariant_factors
    if not factors:
        return 1
    L = factors[-1]
    rows = [
        [c * (L // f) for c, f in zip(cls.coordinates, factors)] for cls in classes
    ]
    if not rows:
        return 1
    return howell_form(np.array(rows, dtype=np.int64), L).span_order


_LES_MAPS = ("i_star", "r_star", "s_star", "i_upper_star", "restriction", "connecting")


def _les_context(pres):
    if isinstance(pres, (LfHomology, LfCohomology, InfinityPresentation)):
        return pres.ended, getattr(pres, "depth", DEFAULT_DEPTH)
    cx = getattr(pres, "complex", None)
    e = getattr(cx, "ended_source", None)
    if e is None:
        raise StructuralError("les_map needs classes over an ended complex")
    return e, getattr(cx, "truncation_depth", DEFAULT_DEPTH)


def les_map(which: str, cls: HomologyClass) -> HomologyClass:
    """Apply one long-exact-sequence map to a class.

    Homology sequence:   H_i --i_star--> lf H_i --r_star--> inf H_{i-1}
    --s_star--> H_{i-1}.  Cohomology sequence: lf H^i --i_upper_star-->
    H^i --restriction--> inf H^i --connecting--> lf H^{i+1}.
    """
    if which not in _LES_MAPS:
        raise ArgumentError(f"unknown map {which!r}; choose from {_LES_MAPS}")
    pres = cls.presentation
    e, depth = _les_context(pres)
    A = pres.coefficients
    i = pres.dim
    X = e.truncate(depth).result
    collar = set(e.truncate(depth).collar)

    def pull_collar(vec_cls, v):
        """Collar values of a (co)chain on X as a vector on the union."""
        target_dim = v.dim
        total = vec_cls(union, target_dim, A, {})
        for ei, end in enumerate(e.ends):
            part = {}
            for sigma in end.cross_section.cells.get(target_dim, ()):
                g = v.coefficient(e.level_cell(ei, depth, sigma))
                if not g.is_zero:
                    part[sigma] = g
            total = total + vec_cls(
                union, target_dim, A,
                {f"p{ei}:{c}": gg for c, gg in part.items()},
            )
        return total

    def push_collar(vec_cls, v):
        """Union (co)chain placed on the collar layer of X."""
        coeffs = {}
        for ei in range(len(e.ends)):
            prefix = f"p{ei}:"
            for c, g in v.coeffs.items():
                if c.startswith(prefix):
                    coeffs[e.level_cell(ei, depth, c[len(prefix):])] = g
        return vec_cls(X, v.dim, A, coeffs)

    if which == "i_star":
        target = lf_homology(e, i, A, depth)
        image = lambda gen: target.reduce(LFChain(e, i, A, depth, gen, {}))
    elif which == "r_star":
        target = homology_at_infinity(e, i - 1, A)
        union = target.union

        def image(gen):
            z = gen.finite if isinstance(gen, LFChain) else gen
            return target.reduce(pull_collar(Chain, boundary(z)))
    elif which == "s_star":
        target = homology(e, i, A, depth)
        image = lambda gen: target.reduce(push_collar(Chain, gen))
    elif which == "i_upper_star":
        target = cohomology(e, i, A, depth)
        image = lambda gen: target.reduce(Cochain(X, i, A, dict(gen.coeffs)))
    elif which == "restriction":
        target = cohomology_at_infinity(e, i, A)
        union = target.union
        image = lambda gen: target.reduce(pull_collar(Cochain, gen))
    else:  # connecting
        target = lf_cohomology(e, i + 1, A, depth)

        def image(gen):
            pushed = push_collar(Cochain, gen)
            rel_cocycle = Cochain(
                X, i + 1, A,
                {c: g for c, g in pushed.coboundary().coeffs.items() if c not in collar},
            )
            return target.reduce(rel_cocycle)

    total = target.zero_class()
    for c, gen in zip(cls.coordinates, pres.generators):
        img = image(gen)
        total = total + HomologyClass(target, [c * x for x in img.coordinates])
    return total
