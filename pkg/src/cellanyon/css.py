"""CSS stabilizer data of a finite complex.

Qudits sit on n-cells.  Each (n-1)-cell alpha yields an X-type check whose
row is the coboundary of alpha read on n-cells; each (n+1)-cell beta yields
a Z-type check from its boundary.  The two check families are symplectically
orthogonal because the boundary squares to zero, and the code dimension
|G|^N / |S| always equals the order of H_n of the complex.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .complexes import EndedComplex, FiniteComplex
from .errors import ArgumentError, StructuralError
from .groups import AbelianCoefficients
from .homology import homology
from .zmod import howell_form


@dataclass
class StabilizerSet:
    """Parity-check matrices of the model, one pair per cyclic factor."""

    complex: FiniteComplex
    n: int
    coefficients: AbelianCoefficients
    qudit_cells: list[str]
    x_cells: list[str]
    z_cells: list[str]
    x_checks: dict[int, np.ndarray] = field(default_factory=dict)
    z_checks: dict[int, np.ndarray] = field(default_factory=dict)

    def pcm_text(self, d: int, kind: str) -> str:
        """Plain-text parity-check matrix: header `rows cols modulus`."""
        M = self.x_checks[d] if kind == "x" else self.z_checks[d]
        lines = [f"{M.shape[0]} {M.shape[1]} {d}"]
        lines += [" ".join(str(int(v)) for v in row) for row in M]
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "coefficients": list(self.coefficients.orders),
            "qudits": self.qudit_cells,
            "x_checks": {
                str(d): [[int(v) for v in row] for row in M]
                for d, M in self.x_checks.items()
            },
            "z_checks": {
                str(d): [[int(v) for v in row] for row in M]
                for d, M in self.z_checks.items()
            },
        }


def stabilizers(c: FiniteComplex, n: int, A: AbelianCoefficients) -> StabilizerSet:
    """Extract the check matrices; verifies x @ z^T = 0 over every factor."""
    if n < 0 or n > c.dims:
        raise ArgumentError(f"n={n} outside cell dimensions of {c.name}")
    Bn = c.boundary_matrix(n)
    Bn1 = c.boundary_matrix(n + 1)
    qudits = list(c.cells.get(n, ()))
    x_cells = list(c.cells.get(n - 1, ()))
    z_cells = list(c.cells.get(n + 1, ()))
    s = StabilizerSet(c, n, A, qudits, x_cells, z_cells)
    for d in sorted(set(A.orders)):
        X = (Bn.T % d).astype(np.int64)
        Z = (Bn1 % d).astype(np.int64)
        if X.size and Z.size and np.any((X @ Z.T) % d):
            raise StructuralError(f"checks not orthogonal mod {d} on {c.name}")
        s.x_checks[d] = X
        s.z_checks[d] = Z
    return s


def code_dimension(s: StabilizerSet) -> int:
    """|G|^N / |stabilizer group|, computed from exact ranks over each Z_d.

    Cross-checked against the order of H_n of the complex; a mismatch is an
    internal error.
    """
    total = 1
    N = len(s.qudit_cells)
    for d in s.coefficients.orders:
        span_x = howell_form(s.x_checks[d], d).span_order if s.x_checks[d].size else 1
        span_z = howell_form(s.z_checks[d], d).span_order if s.z_checks[d].size else 1
        total *= d**N // (span_x * span_z)
    expected = homology(s.complex, s.n, s.coefficients).order
    if total != expected:
        raise StructuralError(
            f"code dimension {total} != |H_{s.n}| = {expected} on {s.complex.name}"
        )
    return total


@dataclass
class DynamicsReport:
    """Boundedness certificate for the star and plaquette supports."""

    well_defined: bool
    max_star_weight: int
    max_plaquette_weight: int

    def to_json(self) -> dict:
        return {
            "well_defined": self.well_defined,
            "max_star_weight": self.max_star_weight,
            "max_plaquette_weight": self.max_plaquette_weight,
        }


def _weight_orbit(e: EndedComplex, n: int):
    """Star/plaquette weights over one representative of every cell orbit.

    Core cells and the first two collar layers cover all orbits: deeper
    layers repeat the layer-2 pattern verbatim.
    """
    X = e.truncate(3).result
    for cell in X.cells.get(n - 1, ()):
        if e.cell_depth(cell) <= 2:
            yield ("star", cell, len(X.cofaces(cell)))
    for cell in X.cells.get(n + 1, ()):
        if e.cell_depth(cell) <= 2:
            yield ("plaquette", cell, len(X.facets(cell)))


def dynamics_well_defined(e: EndedComplex, n: int) -> DynamicsReport:
    """True iff both interaction supports are bounded over all cells.

    Periodicity of the ends makes the supremum a finite maximum over cell
    orbits; any non-finite weight in the orbit table voids the certificate.
    """
    max_star = 0
    max_plaq = 0
    ok = True
    for kind, _, w in _weight_orbit(e, n):
        if w is None or (isinstance(w, float) and not np.isfinite(w)):
            ok = False
            continue
        if kind == "star":
            max_star = max(max_star, int(w))
        else:
            max_plaq = max(max_plaq, int(w))
    return DynamicsReport(ok, max_star, max_plaq)
