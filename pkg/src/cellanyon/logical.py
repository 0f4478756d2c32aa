"""Ground-state information content of a model (complex, n, G).

The frustration-free ground states form the state space of an algebra
determined by H_n (dual coefficients), the finite-support cohomology H^n_lf
(group coefficients), and the evaluation pairing between the two.  The
radical of the antisymmetrized pairing splits the algebra into a classical
part (c bits) and a quantum part (q qubits): the algebra is
C^(2^c) x B(C^(2^q)) with 2^(2q+c) = |H_n x H^n_lf| as an exact identity of
group orders.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import isqrt, log2

import numpy as np

from .chains import pair
from .complexes import EndedComplex, FiniteComplex
from .errors import StructuralError
from .groups import AbelianCoefficients, PhaseQZ
from .homology import DEFAULT_DEPTH, cohomology, homology, lf_cohomology
from .zmod import howell_form

EXHAUSTIVE_LIMIT = 2**16


def _group_pair(e, n: int, A: AbelianCoefficients, depth: int):
    h = homology(e, n, A, depth) if isinstance(e, EndedComplex) else homology(e, n, A)
    if isinstance(e, EndedComplex):
        hlf = lf_cohomology(e, n, A, depth)
    else:
        hlf = cohomology(e, n, A)
    return h, hlf


def pairing_matrix(e, n: int, A: AbelianCoefficients, depth: int = DEFAULT_DEPTH):
    """Matrix of the evaluation pairing on generators: entry (i, j) pairs the
    i-th H_n generator against the j-th H^n_lf generator."""
    h, hlf = _group_pair(e, n, A, depth)
    return [[pair(b, a) for a in hlf.generators] for b in h.generators]


def _phase_matrix_int(matrix, L: int) -> np.ndarray:
    out = np.zeros((len(matrix), len(matrix[0]) if matrix else 0), dtype=np.int64)
    for i, row in enumerate(matrix):
        for j, p in enumerate(row):
            if L % p.denominator:
                raise StructuralError(f"phase {p} does not divide the exponent {L}")
            out[i, j] = (p.numerator * (L // p.denominator)) % L
    return out


def _span_order(rows: np.ndarray, L: int) -> int:
    if rows.size == 0:
        return 1
    return howell_form(rows, L).span_order


def radical_order(
    h_factors, hlf_factors, matrix, exponent: int, exhaustive: bool | None = None
) -> int:
    """Order of the radical of the antisymmetrized form on H = H_n x H^n_lf.

    Exhaustive enumeration for |H| <= 2^16 (or when forced), a Howell-form
    rank computation otherwise; both agree.
    """
    orders = list(h_factors) + list(hlf_factors)
    total = 1
    for o in orders:
        total *= o
    nb, na = len(h_factors), len(hlf_factors)
    L = exponent
    P = _phase_matrix_int(matrix, L) if nb and na else np.zeros((nb, na), dtype=np.int64)
    # Bilinear form on H-generators: (b, a) pairs as P, everything else zero.
    F = np.zeros((nb + na, nb + na), dtype=np.int64)
    F[:nb, nb:] = P
    S = (F - F.T) % L
    if exhaustive is None:
        exhaustive = total <= EXHAUSTIVE_LIMIT
    if exhaustive and total <= EXHAUSTIVE_LIMIT:
        count = 0
        for x in itertools.product(*[range(o) for o in orders]):
            v = (np.array(x, dtype=np.int64) @ S) % L
            if not v.any():
                count += 1
        return count
    # Scale generator rows so each row's order matches its generator order.
    return total // _span_order(S, L)


def annihilator_orders(h_factors, hlf_factors, matrix, exponent: int) -> tuple[int, int]:
    """Orders of the two one-sided annihilators of the pairing."""
    nb, na = len(h_factors), len(hlf_factors)
    hb = 1
    for o in h_factors:
        hb *= o
    ha = 1
    for o in hlf_factors:
        ha *= o
    L = exponent
    if nb == 0 or na == 0:
        return hb, ha
    P = _phase_matrix_int(matrix, L)
    ann_b = hb // _span_order(P, L)
    ann_a = ha // _span_order(P.T.copy(), L)
    return ann_b, ann_a


@dataclass
class LogicalReport:
    """Summary of the logical content of one model."""

    complex_name: str
    n: int
    coefficients: AbelianCoefficients
    h_factors: tuple[int, ...]
    hlf_factors: tuple[int, ...]
    pairing: list[list[PhaseQZ]]
    radical_order: int
    classical_order: int
    quantum_order: int
    c_bits: float
    q_qubits: float
    structure: str

    def to_json(self) -> dict:
        return {
            "complex": self.complex_name,
            "n": self.n,
            "coefficients": list(self.coefficients.orders),
            "H_n": list(self.h_factors),
            "H_lf^n": list(self.hlf_factors),
            "pairing": [[str(p) for p in row] for row in self.pairing],
            "radical_order": self.radical_order,
            "classical_order": self.classical_order,
            "quantum_order": self.quantum_order,
            "c_bits": self.c_bits,
            "q_qubits": self.q_qubits,
            "structure": self.structure,
        }


def _fmt_exp(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:.4f}"


def logical_report(e, n: int, A: AbelianCoefficients, depth: int = DEFAULT_DEPTH) -> LogicalReport:
    """Full ground-state report: group orders, pairing, radical, (c, q).

    The classical order is computed twice, from the radical of the
    antisymmetrized form and from the product of the two annihilators, and
    the two must agree exactly.
    """
    h, hlf = _group_pair(e, n, A, depth)
    matrix = [[pair(b, a) for a in hlf.generators] for b in h.generators]
    L = A.exponent
    rad = radical_order(h.invariant_factors, hlf.invariant_factors, matrix, L)
    ann_b, ann_a = annihilator_orders(
        h.invariant_factors, hlf.invariant_factors, matrix, L
    )
    classical = ann_b * ann_a
    if classical != rad:
        raise StructuralError(
            f"radical order {rad} disagrees with annihilator product {classical}"
        )
    total = h.order * hlf.order
    quantum_sq, rem = divmod(total, rad)
    if rem:
        raise StructuralError("radical order does not divide the group order")
    quantum = isqrt(quantum_sq)
    if quantum * quantum != quantum_sq:
        raise StructuralError("nondegenerate part has non-square order")
    c = log2(rad) if rad > 1 else 0.0
    q = log2(quantum) if quantum > 1 else 0.0
    name = e.name if hasattr(e, "name") else str(e)
    structure = f"C^{{2^{_fmt_exp(c)}}} (x) B(C^{{2^{_fmt_exp(q)}}})"
    return LogicalReport(
        complex_name=name,
        n=n,
        coefficients=A,
        h_factors=h.invariant_factors,
        hlf_factors=hlf.invariant_factors,
        pairing=matrix,
        radical_order=rad,
        classical_order=rad,
        quantum_order=quantum,
        c_bits=c,
        q_qubits=q,
        structure=structure,
    )
