"""Brute-force verifier on tiny finite complexes.

Builds the full |G|^N-dimensional state space of a model (complex, n, G),
with one qudit per n-cell.  Star operators average shift operators over the
group, plaquette operators are 0/1 diagonal projections; the Hamiltonian is
real symmetric.  Dimensions and energies are exact integers backed by
integer arithmetic (ranks, syndromes, commutation phases); floating point
appears only in the optional eigensolves which are cross-checks, never the
source of truth.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .chains import Chain, Cochain, pair
from .complexes import FiniteComplex
from .errors import ArgumentError, CapExceededError, StructuralError
from .groups import AbelianCoefficients, PhaseQZ, character_pair

DEFAULT_CAP = 2**14
DENSE_EIG_LIMIT = 2**12
ENERGY_TOL = 1e-9
CAP_ENV = "CELLANYON_ORACLE_CAP"


class DenseModel:
    """Exact dense model of the Hamiltonian on a finite complex."""

    def __init__(
        self,
        complex: FiniteComplex,
        n: int,
        coefficients: AbelianCoefficients,
        cap: int | None = None,
    ):
        if cap is None:
            cap = int(os.environ.get(CAP_ENV, DEFAULT_CAP))
        self.complex = complex
        self.n = n
        self.coefficients = coefficients
        self.cells = list(complex.cells.get(n, ()))
        self.N = len(self.cells)
        k = len(coefficients.orders)
        dim = coefficients.order**self.N
        if dim > cap:
            raise CapExceededError(
                f"state space {dim} exceeds cap {cap} "
                f"(override with {CAP_ENV} or cap=)"
            )
        self.dim = dim
        self.L = coefficients.exponent
        # Mixed-radix digit layout: (cell, factor) -> (weight, radix).
        self._weights = []
        w = 1
        for ci in range(self.N):
            for d in coefficients.orders:
                self._weights.append((ci, d, w))
                w *= d
        self._idx = np.arange(dim, dtype=np.int64)
        self._roots = np.exp(2j * np.pi * np.arange(self.L) / self.L)
        self._cell_pos = {c: i for i, c in enumerate(self.cells)}
        self.stars = list(complex.cells.get(n - 1, ()))
        self.plaquettes = list(complex.cells.get(n + 1, ()))
        self._H = None

    # -- digit helpers ---------------------------------------------------

    def _digits(self, cell_pos: int, factor: int) -> np.ndarray:
        ci, d, w = self._weights[cell_pos * len(self.coefficients.orders) + factor]
        return (self._idx // w) % d

    def _shift_perm(self, a: Cochain) -> np.ndarray:
        """Permutation idx(h) -> idx(h + a) of the basis."""
        out = self._idx.copy()
        for cell, g in a.coeffs.items():
            pos = self._cell_pos.get(cell)
            if pos is None:
                raise StructuralError(f"{cell!r} carries no qudit in this model")
            for j, (r, d) in enumerate(zip(g.residues, self.coefficients.orders)):
                if r % d == 0:
                    continue
                w = self._weights[pos * len(self.coefficients.orders) + j][2]
                digit = (out // w) % d
                out = out + ((digit + r) % d - digit) * w
        return out

    def _phase_num(self, b: Chain) -> np.ndarray:
        """Exponent numerators over L of <b, h> for every basis state h."""
        total = np.zeros(self.dim, dtype=np.int64)
        for cell, chi in b.coeffs.items():
            pos = self._cell_pos.get(cell)
            if pos is None:
                raise StructuralError(f"{cell!r} carries no qudit in this model")
            for j, (r, d) in enumerate(zip(chi.residues, self.coefficients.orders)):
                if r % d == 0:
                    continue
                digit = self._digits(pos, j)
                total = (total + digit * (r * (self.L // d))) % self.L
        return total

    # -- operator actions -------------------------------------------------

    def apply_x(self, a: Cochain, vec: np.ndarray) -> np.ndarray:
        out = np.zeros_like(vec)
        out[self._shift_perm(a)] = vec
        return out

    def apply_z(self, b: Chain, vec: np.ndarray) -> np.ndarray:
        return self._roots[self._phase_num(b)] * vec

    def apply_xz(self, a: Cochain, b: Chain, vec: np.ndarray) -> np.ndarray:
        return self.apply_x(a, self.apply_z(b, vec))

    def star_terms(self, alpha: str):
        """The |G| shift cochains building the star projection at alpha."""
        for g in self.coefficients.iter_elements():
            yield Cochain(
                self.complex, self.n - 1, self.coefficients, {alpha: g}
            ).coboundary()

    def apply_star(self, alpha: str, vec: np.ndarray) -> np.ndarray:
        out = np.zeros_like(vec)
        for a in self.star_terms(alpha):
            out += self.apply_x(a, vec)
        return out / self.coefficients.order

    def plaquette_diagonal(self, beta: str) -> np.ndarray:
        """0/1 diagonal of the plaquette projection at beta (exact)."""
        ok = np.ones(self.dim, dtype=bool)
        row = self.complex.facets(beta)
        for j, d in enumerate(self.coefficients.orders):
            syn = np.zeros(self.dim, dtype=np.int64)
            for cell, deg in row.items():
                pos = self._cell_pos.get(cell)
                if pos is None:
                    continue
                syn = (syn + deg * self._digits(pos, j)) % d
            ok &= syn == 0
        return ok

    # -- Hamiltonian -------------------------------------------------------

    def hamiltonian(self) -> sp.csr_matrix:
        """H = -sum(stars) - sum(plaquettes), real symmetric sparse."""
        if self._H is None:
            dim = self.dim
            diag = np.zeros(dim)
            for beta in self.plaquettes:
                diag -= self.plaquette_diagonal(beta).astype(float)
            H = sp.coo_matrix((dim, dim))
            rows, cols, vals = [], [], []
            for alpha in self.stars:
                for a in self.star_terms(alpha):
                    perm = self._shift_perm(a)
                    rows.append(perm)
                    cols.append(self._idx)
                    vals.append(np.full(dim, -1.0 / self.coefficients.order))
            if rows:
                H = sp.coo_matrix(
                    (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                    shape=(dim, dim),
                )
            self._H = (H + sp.diags(diag)).tocsr()
        return self._H

    @property
    def ground_energy(self) -> int:
        return -(len(self.stars) + len(self.plaquettes))

    def ground_vector(self) -> np.ndarray:
        """The frustration-free state built from |0...0> by star projection."""
        vec = np.zeros(self.dim)
        vec[0] = 1.0
        for alpha in self.stars:
            vec = self.apply_star(alpha, vec)
        norm = np.linalg.norm(vec)
        if norm < 1e-12:
            raise StructuralError("star projections annihilated the seed state")
        return vec / norm

    def excited_vector(self, gamma: Chain, delta: Cochain) -> np.ndarray:
        """State vector of the excitation (gamma, delta) over the built
        ground state: X^{-delta} Z^{-gamma} |ground>."""
        vec = self.ground_vector().astype(complex)
        vec = self.apply_z(-gamma, vec)
        vec = self.apply_x(-delta, vec)
        return vec


def check_commutation(m: DenseModel, float_check: bool = True) -> bool:
    """[A_alpha, B_beta] = 0 for every pair.

    Exact route: every cross phase <d(chi e_beta), dT(g e_alpha)> must vanish
    in Q/Z, which is the full commutator in monomial form.  For small models
    a float matrix commutator is also checked at 1e-12.
    """
    A = m.coefficients
    for beta in m.plaquettes:
        for chi in A.iter_elements():
            zb = Chain(m.complex, m.n + 1, A, {beta: chi}).boundary()
            for alpha in m.stars:
                for g in A.iter_elements():
                    xa = Cochain(m.complex, m.n - 1, A, {alpha: g}).coboundary()
                    if not pair(zb, xa).is_zero:
                        return False
    if float_check and m.dim <= 512 and m.stars and m.plaquettes:
        H = None
        v = np.random.default_rng(7).normal(size=m.dim) + 0j
        for alpha in m.stars[:4]:
            for beta in m.plaquettes[:4]:
                bv = m.plaquette_diagonal(beta).astype(float)
                lhs = m.apply_star(alpha, bv * v)
                rhs = bv * m.apply_star(alpha, v)
                if np.max(np.abs(lhs - rhs)) > 1e-12:
                    return False
    return True


def check_xz_commutator(m: DenseModel, a: Cochain, b: Chain) -> bool:
    """X^a Z^b = e^{-2 pi i <b,a>} Z^b X^a, compared exactly in monomial form."""
    # X^a Z^b |h> = e^{2 pi i <b,h>} |h+a>;  Z^b X^a |h> = e^{2 pi i <b,h+a>} |h+a>.
    phase = pair(b, a)
    lhs = m._phase_num(b)
    perm = m._shift_perm(a)
    rhs_shift = m._phase_num(b)[perm]
    offset = (phase.numerator * (m.L // phase.denominator)) % m.L
    return bool(np.all((rhs_shift - lhs - offset) % m.L == 0))


def check_projections(m: DenseModel) -> bool:
    """A^2 = A and B^2 = B, numerically at 1e-12 on a random vector."""
    v = np.random.default_rng(11).normal(size=m.dim)
    for alpha in m.stars:
        once = m.apply_star(alpha, v)
        if np.max(np.abs(m.apply_star(alpha, once) - once)) > 1e-12:
            return False
    for beta in m.plaquettes:
        d = m.plaquette_diagonal(beta).astype(float)
        if np.max(np.abs(d * d - d)) > 1e-12:
            return False
    return True


def ground_space_dimension(m: DenseModel, method: str = "rank") -> int:
    """Dimension of the minimal-eigenvalue eigenspace.

    method="rank": exact |G|^N / |S| from Howell spans of the check matrices.
    method="eigen": numeric eigenstructure of the Hamiltonian (dense below
    2^12 states, shift-free Lanczos above); the commuting-projector spectrum
    is integral with gap 1, so counting at half-integer threshold is safe.
    """
    if method == "rank":
        from .zmod import howell_form

        total = 1
        Bn = m.complex.boundary_matrix(m.n)
        Bn1 = m.complex.boundary_matrix(m.n + 1)
        for d in m.coefficients.orders:
            sx = howell_form(Bn.T % d, d).span_order if Bn.size else 1
            sz = howell_form(Bn1 % d, d).span_order if Bn1.size else 1
            total *= d**m.N // (sx * sz)
        return total
    if method != "eigen":
        raise ArgumentError(f"unknown method {method!r}")
    H = m.hamiltonian()
    e0 = m.ground_energy
    if m.dim <= DENSE_EIG_LIMIT:
        vals = np.linalg.eigvalsh(H.toarray())
    else:
        k = 32
        while True:
            k = min(k, m.dim - 2)
            vals = spla.eigsh(H, k=k, which="SA", return_eigenvectors=False)
            vals.sort()
            if vals[-1] > e0 + 0.5 or k >= m.dim - 2:
                break
            k *= 2
    if abs(vals[0] - e0) > 1e-6:
        raise StructuralError(
            f"minimal eigenvalue {vals[0]} differs from frustration-free energy {e0}"
        )
    return int(np.sum(vals < e0 + 0.5))


def excitation_energy(m: DenseModel, gamma: Chain, delta: Cochain) -> int:
    """<H> shift of the excited state, an exact integer from the syndrome
    diagonals; cross-checked against the float Rayleigh quotient."""
    vec = m.excited_vector(gamma, delta)
    H = m.hamiltonian()
    energy = float(np.real(np.vdot(vec, H @ vec)))
    shift = energy - m.ground_energy
    if abs(shift - round(shift)) > ENERGY_TOL:
        raise StructuralError(f"non-integer energy shift {shift}")
    return int(round(shift))


def expectation(m: DenseModel, state: tuple, observable: tuple) -> complex:
    """<X^a Z^b> in the excited state built from (gamma, delta)."""
    gamma, delta = state
    a, b = observable
    vec = m.excited_vector(gamma, delta)
    out = m.apply_xz(a, b, vec)
    return complex(np.vdot(vec, out))


def expectation_formula(m: DenseModel, state: tuple, observable: tuple) -> complex:
    """The phase formula e^{2 pi i(<gamma,a> - <b,delta>)} times the ground
    expectation, for comparison with the dense route."""
    gamma, delta = state
    a, b = observable
    g0 = m.ground_vector().astype(complex)
    base = complex(np.vdot(g0, m.apply_xz(a, b, g0)))
    ph = pair(gamma, a) - pair(b, delta)
    return np.exp(2j * np.pi * ph.numerator / ph.denominator) * base
