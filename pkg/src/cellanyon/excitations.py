"""Excited states of the model: string/membrane data and their invariants.

An excitation is a pair (gamma, delta) of an LF n-chain and an LF n-cochain,
read relative to an implicit frustration-free reference state.  Its defects
are the supports of the boundary and coboundary; the energy is their total
size.  Finite-defect excitations carry classes at infinity which control
sector equivalence, transporters, polarization phases, and abelian braiding
and twist phases; all phases are exact values in Q/Z.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .chains import (
    Chain,
    Cochain,
    LFChain,
    LFCochain,
    Tail,
    boundary,
    pair,
    pair_at_infinity,
    pair_finite_overlap,
)
from .complexes import EndedComplex, FiniteComplex
from .errors import (
    ArgumentError,
    LogicalValueError,
    StructuralError,
    UndefinedPairingError,
    WitnessUnrepresentableError,
)
from .groups import AbelianCoefficients, GroupElement, PhaseQZ
from .homology import (
    boundary_as_lf,
    coboundary_as_lf,
    cohomology,
    cohomology_at_infinity,
    homology,
    homology_at_infinity,
    lf_cohomology,
    lf_homology,
)
from .zmod import howell_form


def _as_lf_chain(e, n, A, x):
    if x is None:
        return LFChain(e, n, A, 1)
    if isinstance(x, LFChain):
        return x
    depth = getattr(x.complex, "truncation_depth", None)
    if depth is None:
        raise StructuralError("finite chain must live on a truncation")
    return LFChain(e, n, A, depth, x, {})


def _as_lf_cochain(e, n, A, x):
    if x is None:
        return LFCochain(e, n, A, 1)
    if isinstance(x, LFCochain):
        return x
    depth = getattr(x.complex, "truncation_depth", None)
    if depth is None:
        raise StructuralError("finite cochain must live on a truncation")
    return LFCochain(e, n, A, depth, x, {})


class ExcitationData:
    """State descriptor omega_0 composed with the (gamma, delta) strings."""

    def __init__(self, ended: EndedComplex, n: int, coefficients, gamma=None, delta=None):
        self.ended = ended
        self.n = n
        self.coefficients = coefficients
        self.gamma = _as_lf_chain(ended, n, coefficients, gamma)
        self.delta = _as_lf_cochain(ended, n, coefficients, delta)
        self.planar: dict | None = None

    # Defect data is recomputed on every access, never cached.

    def boundary_chain(self) -> Chain:
        return self.gamma.boundary()

    def coboundary_cochain(self) -> Cochain:
        return self.delta.coboundary()

    @property
    def defects_z(self) -> set[str]:
        return self.boundary_chain().support

    @property
    def defects_x(self) -> set[str]:
        return self.coboundary_cochain().support

    def gamma_class(self):
        """Class at infinity of gamma in the (n-1)-st homology of the ends."""
        return homology_at_infinity(self.ended, self.n - 1, self.coefficients).class_at_infinity(self.gamma)

    def delta_class(self):
        """Class at infinity of delta in the n-th cohomology of the ends."""
        return cohomology_at_infinity(self.ended, self.n, self.coefficients).class_at_infinity(self.delta)

    def shifted(self, b=None, a=None) -> "ExcitationData":
        """The excitation (gamma + b, delta + a)."""
        g = self.gamma if b is None else self.gamma + _as_lf_chain(self.ended, self.n, self.coefficients, b)
        d = self.delta if a is None else self.delta + _as_lf_cochain(self.ended, self.n, self.coefficients, a)
        out = ExcitationData(self.ended, self.n, self.coefficients, g, d)
        out.planar = self.planar
        return out

    def to_json(self):
        return {
            "n": self.n,
            "coefficients": list(self.coefficients.orders),
            "gamma": self.gamma.to_json(),
            "delta": self.delta.to_json(),
        }


def energy(x: ExcitationData) -> int:
    """Number of violated checks: |supp d(gamma)| + |supp dT(delta)|."""
    return len(x.defects_z) + len(x.defects_x)


def is_frustration_free(x: ExcitationData) -> bool:
    """True iff gamma is closed and delta is coclosed."""
    return x.boundary_chain().is_zero and x.coboundary_cochain().is_zero


@dataclass
class GroundVerdict:
    status: str  # "yes" | "no" | "unknown"
    witness_chain: Chain | None = None
    witness_cochain: Cochain | None = None
    certificate: dict = field(default_factory=dict)

    def __bool__(self):
        return self.status == "yes"


def _bfs_candidates(seeds, via, back, budget: int) -> list[str]:
    """n-cells within `budget` hops of the seeds, stepping to neighbours
    through the shared cells given by via/back."""
    frontier = sorted(seeds)
    seen = set(frontier)
    for _ in range(budget - 1):
        nxt = []
        for c in frontier:
            for mid in via(c):
                for other in back(mid):
                    if other not in seen:
                        seen.add(other)
                        nxt.append(other)
        frontier = sorted(nxt)
        if not frontier:
            break
    return sorted(seen)


def _side_search(e, A, n, syndrome, side: str, budget: int, max_targets: int):
    """Search for a finite flip chain/cochain supported within `budget` hops
    of the defects that strictly lowers the defect count.

    Complete for flips confined to the candidate region: any such flip's
    syndrome lies in the enumerated target region, and solvability of
    `target - syndrome` over the region's incidence rows is decided exactly.
    """
    w0 = len(syndrome.coeffs)
    if w0 == 0:
        return "yes", None, {"radius": budget, "targets": 0}
    depth_needed = max([e.cell_depth(c) for c in syndrome.coeffs] + [1]) + budget + 2
    X = e.truncate(depth_needed).result

    if side == "z":
        seeds = {c for s in syndrome.coeffs for c in X.cofaces(s)}
        syn_of = X.facets
        cands = _bfs_candidates(seeds, X.facets, X.cofaces, budget)
    else:
        seeds = {c for s in syndrome.coeffs for c in X.facets(s)}
        syn_of = X.cofaces
        cands = _bfs_candidates(seeds, X.cofaces, X.facets, budget)
    region = sorted(set(syndrome.coeffs) | {s for c in cands for s in syn_of(c)})
    pos = {s: i for i, s in enumerate(region)}
    M = np.zeros((len(cands), len(region)), dtype=np.int64)
    for r, c in enumerate(cands):
        for s, v in syn_of(c).items():
            M[r, pos[s]] = v

    nonzero = [g for g in A.iter_elements() if not g.is_zero]
    total = sum(
        _ncr(len(region), w) * len(nonzero) ** w for w in range(w0)
    )
    if total > max_targets:
        return "unknown", None, {"radius": budget, "targets": total, "cap": max_targets}

    hbs = {d: howell_form(M % d, d, track_transform=True) for d in set(A.orders)}
    z0 = np.zeros((len(A.orders), len(region)), dtype=np.int64)
    for c, g in syndrome.coeffs.items():
        for fi in range(len(A.orders)):
            z0[fi, pos[c]] = g.residues[fi]

    for w in range(w0):
        for support in itertools.combinations(range(len(region)), w):
            for pattern in itertools.product(nonzero, repeat=w):
                target = np.zeros_like(z0)
                for p, g in zip(support, pattern):
                    for fi in range(len(A.orders)):
                        target[fi, p] = g.residues[fi]
                coeffs_total: dict[str, GroupElement] = {}
                ok = True
                for fi, d in enumerate(A.orders):
                    vec = (target[fi] - z0[fi]) % d
                    sol = hbs[d].member(vec)
                    if sol is None:
                        ok = False
                        break
                    wvec = (sol @ hbs[d].transform) % d if sol.size else np.zeros(len(cands), dtype=np.int64)
                    for p in np.nonzero(wvec)[0]:
                        res = [0] * len(A.orders)
                        res[fi] = int(wvec[p])
                        g = GroupElement(A, res)
                        cell = cands[int(p)]
                        coeffs_total[cell] = coeffs_total.get(cell, A.zero()) + g
                if ok:
                    flip_cls = Chain if side == "z" else Cochain
                    flip = flip_cls(X, n, A, coeffs_total)
                    return "no", flip, {"radius": budget, "new_weight": int(w)}
    return "yes", None, {"radius": budget, "targets": total}


def _ncr(n, r):
    out = 1
    for i in range(r):
        out = out * (n - i) // (i + 1)
    return out


def is_ground(x: ExcitationData, budget: int = 4, max_targets: int = 200_000) -> GroundVerdict:
    """Decide whether the excited state is a ground state.

    "no" comes with a verified weight-reducing flip; "yes" certifies that no
    flip with syndrome inside the radius-`budget` neighbourhood of the
    defects lowers the weight; "unknown" is returned when the target count
    exceeds `max_targets`, never a silent yes.
    """
    e, n, A = x.ended, x.n, x.coefficients
    bz = x.boundary_chain()
    cx = x.coboundary_cochain()
    cert = {"radius": budget}
    status_z, flip_z, cert_z = _side_search(e, A, n, bz, "z", budget, max_targets)
    if status_z == "no":
        new = (x.gamma + _as_lf_chain(e, n, A, flip_z)).boundary()
        if len(new.coeffs) >= len(bz.coeffs):
            raise StructuralError("search returned an unverified flip")
        return GroundVerdict("no", witness_chain=flip_z, certificate=cert_z)
    status_x, flip_x, cert_x = _side_search(e, A, n, cx, "x", budget, max_targets)
    if status_x == "no":
        new = (x.delta + _as_lf_cochain(e, n, A, flip_x)).coboundary()
        if len(new.coeffs) >= len(cx.coeffs):
            raise StructuralError("search returned an unverified flip")
        return GroundVerdict("no", witness_cochain=flip_x, certificate=cert_x)
    if "unknown" in (status_z, status_x):
        cert.update(cert_z if status_z == "unknown" else cert_x)
        return GroundVerdict("unknown", certificate=cert)
    cert["targets"] = cert_z.get("targets", 0) + cert_x.get("targets", 0)
    return GroundVerdict("yes", certificate=cert)


# -- state equality and sectors ----------------------------------------------


def _restrict_vec(v, cells, fi: int, d: int) -> np.ndarray:
    out = np.zeros(len(cells), dtype=np.int64)
    for i, c in enumerate(cells):
        g = v.coefficient(c)
        if not g.is_zero:
            out[i] = g.residues[fi] % d
    return out


def same_state(x1: ExcitationData, x2: ExcitationData) -> bool:
    """True iff the two excitations define the same state over every
    frustration-free reference.

    Tested as orthogonality of delta2-delta1 against all finite cycles and
    of gamma2-gamma1 against all finite cocycles, on two consecutive
    stabilized truncations.
    """
    if x1.ended is not x2.ended or x1.n != x2.n:
        raise StructuralError("excitations live on different models")
    e, n, A = x1.ended, x1.n, x1.coefficients
    d_gamma = x2.gamma - x1.gamma
    d_delta = x2.delta - x1.delta
    m_star = max(d_gamma.depth, d_delta.depth) + 1
    for M in (m_star, m_star + 1):
        X = e.truncate(M).result
        X1 = e.truncate(M + 1).result
        cells = X.cells.get(n, [])
        # (a) delta-difference must be a coboundary of an arbitrary cochain:
        # orthogonality against all finite cycles inside X.
        Bn = X.boundary_matrix(n)
        for fi, d in enumerate(A.orders):
            vec = _restrict_vec(d_delta, cells, fi, d)
            if howell_form(Bn.T % d, d).member(vec) is None:
                return False
        # (b) gamma-difference must be orthogonal to all finite cocycles:
        # membership in the span of boundaries of one-layer-deeper chains.
        up = X1.cells.get(n + 1, [])
        pos = {c: i for i, c in enumerate(cells)}
        C = np.zeros((len(up), len(cells)), dtype=np.int64)
        for r, y in enumerate(up):
            for f, v in X1.facets(y).items():
                if f in pos:
                    C[r, pos[f]] = v
        for fi, d in enumerate(A.orders):
            vec = _restrict_vec(d_gamma, cells, fi, d)
            if howell_form(C % d, d).member(vec) is None:
                return False
    return True


@dataclass
class SectorVerdict:
    """Outcome of the sector comparison.

    equivalent: equal classes at infinity (sufficient for unitary
    equivalence).  distinguishable_by_polarization: some polarization phase
    differs while the relevant at-infinity pairing is nondegenerate.
    undetermined: neither criterion applies.
    """

    verdict: str
    detail: dict = field(default_factory=dict)

    def __bool__(self):
        return self.verdict == "equivalent"


def _nondegenerate_at_infinity(e, A, hom_dim: int) -> bool:
    """Nondegeneracy of the pairing between homology at infinity in
    `hom_dim` and cohomology at infinity in the same degree."""
    H = homology_at_infinity(e, hom_dim, A)
    C = cohomology_at_infinity(e, hom_dim, A)
    if H.is_trivial and C.is_trivial:
        return True
    rows = []
    for dr in H.generator_realizations:
        rows.append([pair_at_infinity(dr, cr) for cr in C.generator_realizations])
    L = A.exponent
    if not rows or not rows[0]:
        return False
    M = np.array(
        [[(p.numerator * (L // p.denominator)) % L for p in row] for row in rows],
        dtype=np.int64,
    )
    span_rows = howell_form(M, L).span_order
    span_cols = howell_form(M.T.copy(), L).span_order
    return span_rows == H.order and span_cols == C.order


def polarization_phase(x: ExcitationData, d: LFChain | None, c: LFCochain | None) -> PhaseQZ:
    """Phase picked up by the polarization test classes (d, c):
    <[gamma], [c]> + <[d], [delta]>, via the pairing at infinity."""
    total = PhaseQZ.zero()
    if c is not None:
        total = total + pair_at_infinity(x.gamma, c)
    if d is not None:
        total = total + pair_at_infinity(d, x.delta)
    return total


def equivalent_sectors(x1: ExcitationData, x2: ExcitationData) -> SectorVerdict:
    """Compare the sectors of two finite-defect excitations.

    Equal classes at infinity certify equivalence.  Otherwise the verdict is
    distinguishable_by_polarization when some polarization phase differs and
    the relevant at-infinity pairings are nondegenerate, else undetermined.
    """
    if x1.ended is not x2.ended or x1.n != x2.n:
        raise StructuralError("excitations live on different models")
    e, n, A = x1.ended, x1.n, x1.coefficients
    if x1.gamma_class() == x2.gamma_class() and x1.delta_class() == x2.delta_class():
        return SectorVerdict("equivalent")
    tests_d = homology_at_infinity(e, n, A).generator_realizations
    tests_c = cohomology_at_infinity(e, n - 1, A).generator_realizations
    differs = None
    for d in [None] + tests_d:
        for c in [None] + tests_c:
            if d is None and c is None:
                continue
            p1 = polarization_phase(x1, d, c)
            p2 = polarization_phase(x2, d, c)
            if p1 != p2:
                differs = (p1, p2)
                break
        if differs:
            break
    if differs and _nondegenerate_at_infinity(e, A, n - 1) and _nondegenerate_at_infinity(e, A, n):
        return SectorVerdict(
            "distinguishable_by_polarization",
            {"phases": (str(differs[0]), str(differs[1]))},
        )
    return SectorVerdict("undetermined")


# -- transporters -------------------------------------------------------------


@dataclass
class TransportData:
    """Data (gamma_hat, delta_hat, p, q) linking two excitations:
    gamma' = gamma - gamma_hat + d(p) and delta' = delta - delta_hat + dT(q)."""

    gamma_hat: LFChain
    delta_hat: LFCochain
    p: LFChain
    q: LFCochain

    def verify(self, x1: ExcitationData, x2: ExcitationData) -> bool:
        lhs_g = x1.gamma - self.gamma_hat + boundary_as_lf(self.p)
        lhs_d = x1.delta - self.delta_hat + coboundary_as_lf(self.q)
        return lhs_g.same_as(x2.gamma) and lhs_d.same_as(x2.delta)

    def to_json(self):
        return {
            "gamma_hat": self.gamma_hat.to_json(),
            "delta_hat": self.delta_hat.to_json(),
            "p": self.p.to_json(),
            "q": self.q.to_json(),
        }


def zero_transport(e: EndedComplex, n: int, A) -> TransportData:
    return TransportData(
        LFChain(e, n, A, 1),
        LFCochain(e, n, A, 1),
        LFChain(e, n + 1, A, 1),
        LFCochain(e, n - 1, A, 1),
    )


def find_transporter(x1: ExcitationData, x2: ExcitationData) -> TransportData | None:
    """Construct transport data when the classes at infinity agree; None
    when they differ.

    Raises WitnessUnrepresentableError in the corner case where the classes
    agree but a tail level cycle has nonzero cross-section class, which no
    verbatim-tail p or q can bound.
    """
    if x1.gamma_class() != x2.gamma_class() or x1.delta_class() != x2.delta_class():
        return None
    e, n, A = x1.ended, x1.n, x1.coefficients
    d_gamma = x2.gamma - x1.gamma
    d_delta = x2.delta - x1.delta
    m = max(d_gamma.depth, d_delta.depth)

    p_tails, q_tails = {}, {}
    for ei, end in enumerate(e.ends):
        cs = end.cross_section
        tg = d_gamma.tail(ei)
        ok_lvl, a_p = homology(cs, n, A).is_boundary(tg.level)
        ok_slb, b_p = homology(cs, n - 1, A).is_boundary(tg.slab)
        if not ok_slb:
            raise StructuralError("slab tail class mismatch despite equal classes")
        if not ok_lvl:
            raise WitnessUnrepresentableError(
                f"gamma tails on {end.name} carry a nonzero level cycle class; "
                "no verbatim-tail transporter exists"
            )
        p_tails[ei] = Tail(a_p, b_p)
        td = d_delta.tail(ei)
        ok_lvl, a_q = cohomology(cs, n, A).is_boundary(td.level)
        ok_slb, b_q = cohomology(cs, n - 1, A).is_boundary(td.slab)
        if not ok_lvl:
            raise StructuralError("level tail class mismatch despite equal classes")
        if not ok_slb:
            raise WitnessUnrepresentableError(
                f"delta tails on {end.name} carry a nonzero slab cocycle class; "
                "no verbatim-tail transporter exists"
            )
        q_tails[ei] = Tail(a_q, b_q)

    p = LFChain(e, n + 1, A, m, None, p_tails)
    r = d_gamma.rebase(m) - boundary_as_lf(p).rebase(m)
    if r.has_infinite_support:
        raise StructuralError("transporter tails failed to cancel")
    gamma_hat = -r

    q = LFCochain(e, n - 1, A, m, None, q_tails)
    rd = d_delta.rebase(m + 1) - coboundary_as_lf(q)
    if rd.has_infinite_support:
        raise StructuralError("transporter cotails failed to cancel")
    delta_hat = -rd

    t = TransportData(gamma_hat, delta_hat, p, q)
    if not t.verify(x1, x2):
        raise StructuralError("transport data failed exact verification")
    return t


# -- braiding and twists ------------------------------------------------------


def _e_coboundary(x: LFCochain) -> Cochain:
    """Coboundary in the infinite complex; requires closed tails."""
    return x.coboundary()


def _one_side_exponent(x2: ExcitationData, x1: ExcitationData, t2: TransportData, t1: TransportData) -> PhaseQZ:
    gamma2, delta1 = x2.gamma, x1.delta
    gh2, dh1 = t2.gamma_hat, t1.delta_hat
    p2, q1 = t2.p, t1.q
    dh1_fin = dh1.finite if not dh1.has_infinite_support else None
    if dh1_fin is None:
        raise UndefinedPairingError("delta_hat must have finite support")
    gh2_fin = gh2.finite if not gh2.has_infinite_support else None
    if gh2_fin is None:
        raise UndefinedPairingError("gamma_hat must have finite support")
    total = pair(gamma2, dh1_fin)
    total = total + pair(gh2_fin, delta1)
    total = total - pair(gh2_fin, dh1_fin)
    total = total + pair(gh2.boundary(), q1)
    total = total - pair(gamma2.boundary(), q1)
    total = total + pair(p2, coboundary_as_lf(dh1).finite)
    total = total - pair(p2, delta1.coboundary())
    return total


def braiding_phase_general(
    x1: ExcitationData,
    x2: ExcitationData,
    t1: TransportData,
    t2: TransportData,
    cross_check: bool = True,
) -> PhaseQZ:
    """Braiding exponent of the two excitations for the given transports.

    Also evaluates the alternative transported-string formula whenever its
    finite-overlap side conditions hold, and requires agreement.
    """
    value = _one_side_exponent(x2, x1, t2, t1) - _one_side_exponent(x1, x2, t1, t2)
    if cross_check:
        alt = _alternative_exponent(x1, x2, t1, t2)
        if alt is not None and alt != value:
            raise StructuralError(
                f"braiding formulas disagree: {value} vs {alt}"
            )
    return value


def _alternative_exponent(x1, x2, t1, t2) -> PhaseQZ | None:
    """Transported-string form of the braiding exponent; None when a side
    condition (finite overlaps) fails."""

    def transported(x, t):
        return (
            x.gamma - t.gamma_hat + boundary_as_lf(t.p),
            x.delta - t.delta_hat + coboundary_as_lf(t.q),
        )

    g1p, d1p = transported(x1, t1)
    g2p, d2p = transported(x2, t2)

    def one_side(g2, d1, g2p, d1p, p2, q1):
        total = pair_finite_overlap(g2, d1)
        total = total - pair_finite_overlap(g2p, d1p)
        total = total + pair_finite_overlap(boundary_as_lf(p2), d1p)
        total = total - pair(p2, d1p.coboundary())
        total = total + pair_finite_overlap(g2p, coboundary_as_lf(q1))
        total = total - pair(g2p.boundary(), q1)
        return total

    try:
        return one_side(x2.gamma, x1.delta, g2p, d1p, t2.p, t1.q) - one_side(
            x1.gamma, x2.delta, g1p, d2p, t1.p, t2.q
        )
    except UndefinedPairingError:
        return None


def braiding_phase_at_infinity(
    x1: ExcitationData,
    x2: ExcitationData,
    p2_class=None,
    q2_class=None,
    p1_class=None,
    q1_class=None,
) -> PhaseQZ:
    """Braiding exponent from classes at infinity:
    -(<[p2],[delta1]> + <[gamma1],[q2]>), plus the mirrored terms when the
    symmetrizing classes (p1, q1) are supplied."""
    e, n, A = x1.ended, x1.n, x1.coefficients
    total = PhaseQZ.zero()
    if p2_class is not None:
        rep = homology_at_infinity(e, n, A).realize(p2_class)
        total = total + pair_at_infinity(rep, x1.delta)
    if q2_class is not None:
        rep = cohomology_at_infinity(e, n - 1, A).realize(q2_class)
        total = total + pair_at_infinity(x1.gamma, rep)
    total = -total
    if p1_class is not None:
        rep = homology_at_infinity(e, n, A).realize(p1_class)
        total = total + pair_at_infinity(rep, x2.delta)
    if q1_class is not None:
        rep = cohomology_at_infinity(e, n - 1, A).realize(q1_class)
        total = total + pair_at_infinity(x2.gamma, rep)
    return total


# -- canonical planar machinery on product-with-plane complexes ---------------


def _planar_info(e: EndedComplex):
    info = getattr(e, "planar_info", None)
    if info is None:
        raise ArgumentError(
            "canonical planar choices exist only on product_with_plane "
            "catalog complexes; supply explicit TransportData instead"
        )
    return info


def _tensor(f, plane_coeffs, fmt=lambda s, c: f"{s}*{c}"):
    out = {}
    for sigma, gf in f.coeffs.items():
        for c, v in plane_coeffs.items():
            out[fmt(sigma, c)] = gf.scaled(v)
    return out


def rotation_chain(e: EndedComplex, f: Chain) -> LFChain:
    """The LF chain f (x) P, with P the plane's full 2-cell sheet oriented
    so that the sheet is a cycle."""
    info = _planar_info(e)
    A = f.group
    n1 = f.dim + 2
    ring = info["ring_cycle"]
    for s in (1, -1):
        fin_coeffs = {}
        for sigma, gf in f.coeffs.items():
            fin_coeffs[f"{sigma}*{info['face']}"] = gf.scaled(s)
            for c, v in ring.items():
                fin_coeffs[e.slab_cell(0, 1, f"{sigma}*{c}")] = gf.scaled(v)
        cs = e.ends[0].cross_section
        tails = {
            0: Tail(
                Chain(cs, n1, A, {}),
                Chain(cs, n1 - 1, A, _tensor(f, ring)),
            )
        }
        out = LFChain(
            e, n1, A, 1,
            Chain(e.truncate(1).result, n1, A, fin_coeffs),
            tails,
        )
        if out.boundary().is_zero:
            return out
    raise StructuralError("no orientation makes the rotation sheet a cycle")


def rotation_cochain(e: EndedComplex, g: Cochain) -> LFCochain:
    """The LF cochain g (x) Q, with Q the sum of all plane vertices."""
    info = _planar_info(e)
    A = g.group
    n1 = g.dim
    verts = info["vertices"]
    ring_verts = info["ring_vertices"]
    fin_coeffs = {}
    for sigma, gg in g.coeffs.items():
        for v in verts:
            fin_coeffs[f"{sigma}*{v}"] = gg
        for v in ring_verts:
            fin_coeffs[e.level_cell(0, 1, f"{sigma}*{v}")] = gg
    cs = e.ends[0].cross_section
    tails = {
        0: Tail(
            Cochain(cs, n1, A, _tensor(g, {v: 1 for v in ring_verts})),
            Cochain(cs, n1 - 1, A, {}),
        )
    }
    out = LFCochain(
        e, n1, A, 1,
        Cochain(e.truncate(1).result, n1, A, fin_coeffs),
        tails,
    )
    if not out.coboundary().is_zero:
        raise StructuralError("vertex sheet is not a cocycle")
    return out


def product_charge(
    e: EndedComplex,
    f: Chain | None = None,
    g: Cochain | None = None,
    vertex: str | None = None,
    edge: str | None = None,
) -> ExcitationData:
    """Charge on a product-with-plane complex from an (n-1)-cycle f on the
    factor (string part, along a radial ray at `vertex`) and an (n-1)-cocycle
    g (dual part, along the level edges of `edge`)."""
    info = _planar_info(e)
    A = f.group if f is not None else g.group
    n = (f.dim if f is not None else g.dim) + 1
    trunc1 = e.truncate(1).result
    cs = e.ends[0].cross_section

    gamma = None
    if f is not None and not f.is_zero:
        v = vertex or info["ring_vertices"][0]
        fin = Chain(trunc1, n, A, _tensor(f, {v: 1}, lambda s, c: e.slab_cell(0, 1, f"{s}*{c}")))
        tails = {0: Tail(Chain(cs, n, A, {}), Chain(cs, n - 1, A, _tensor(f, {v: 1})))}
        gamma = LFChain(e, n, A, 1, fin, tails)
    delta = None
    if g is not None and not g.is_zero:
        ed = edge or info["ring_edges"][0]
        fin_coeffs = _tensor(g, {info["attach"][ed]: 1})
        fin_coeffs.update(
            _tensor(g, {ed: 1}, lambda s, c: e.level_cell(0, 1, f"{s}*{c}"))
        )
        fin = Cochain(trunc1, n, A, fin_coeffs)
        tails = {0: Tail(Cochain(cs, n, A, _tensor(g, {ed: 1})), Cochain(cs, n - 1, A, {}))}
        delta = LFCochain(e, n, A, 1, fin, tails)

    x = ExcitationData(e, n, A, gamma, delta)
    x.planar = {"f": f, "g": g}
    return x


def canonical_transport(x: ExcitationData) -> TransportData:
    """The counterclockwise rotation transport for a product-plane charge:
    p = (-1)^(n-1) f (x) P and q = (-1)^(n-1) g (x) Q."""
    if x.planar is None:
        raise ArgumentError("canonical transport needs a product_charge excitation")
    e, n, A = x.ended, x.n, x.coefficients
    sign = (-1) ** (n - 1)
    f, g = x.planar["f"], x.planar["g"]
    p = LFChain(e, n + 1, A, 1)
    q = LFCochain(e, n - 1, A, 1)
    if f is not None and not f.is_zero:
        p = rotation_chain(e, f.scaled(sign))
    if g is not None and not g.is_zero:
        q = rotation_cochain(e, g.scaled(sign))
    return TransportData(LFChain(e, n, A, 1), LFCochain(e, n, A, 1), p, q)


def twist_phase(x: ExcitationData, route: str = "p") -> PhaseQZ:
    """Self-braiding exponent of a product-plane charge.

    route="p" rotates the string part (p = (-1)^(n-1) f (x) P, q = 0);
    route="q" rotates the dual part (p = 0, q = (-1)^(n-1) g (x) Q).
    """
    if x.planar is None:
        raise ArgumentError("twist needs a product_charge excitation")
    e, n, A = x.ended, x.n, x.coefficients
    sign = (-1) ** (n - 1)
    f, g = x.planar["f"], x.planar["g"]
    if route == "p":
        if f is None or f.is_zero:
            return PhaseQZ.zero()
        rep = rotation_chain(e, f.scaled(sign))
        return -pair_at_infinity(rep, x.delta)
    if route == "q":
        if g is None or g.is_zero:
            return PhaseQZ.zero()
        rep = rotation_cochain(e, g.scaled(sign))
        return -pair_at_infinity(x.gamma, rep)
    raise ArgumentError(f"unknown twist route {route!r}")


# -- expectation values --------------------------------------------------------


def expected_value(x: ExcitationData, a: Cochain, b: Chain) -> complex:
    """Expectation of the observable X^a Z^b in the excited state.

    Non-closed observables give 0.  Closed observables whose classes are
    nonzero have logical-state-dependent values and are refused; otherwise
    the value is the exact phase e^{2 pi i(<gamma,a> - <b,delta>)}.
    """
    e, n, A = x.ended, x.n, x.coefficients
    a_lf = _as_lf_cochain(e, n, A, a)
    b_lf = _as_lf_chain(e, n, A, b)
    if not a_lf.coboundary().is_zero or not b_lf.boundary().is_zero:
        return 0j
    m = max(a_lf.depth, b_lf.depth, 3)
    if not lf_cohomology(e, n, A, m).reduce(a).is_zero:
        raise LogicalValueError("X-part class is nonzero; value is logical-state dependent")
    if not homology(e, n, A, m).reduce(b_lf.materialize(m)).is_zero:
        raise LogicalValueError("Z-part class is nonzero; value is logical-state dependent")
    ph = pair(x.gamma, a) - pair(b, x.delta)
    return complex(np.exp(2j * np.pi * ph.numerator / ph.denominator))
