"""Finite CW complexes and ended complexes (compact core + product ends).

A finite complex is given purely combinatorially: ordered cell lists per
dimension and a sparse table of signed incidence degrees between a cell and
the cells one dimension down.  An ended complex models a non-compact space
as a finite core with finitely many ends, each the product of a finite
cross-section with a half-line.  Truncating an ended complex at depth m
materializes m collar layers:

    level cells   sigma x {j}      (dim |sigma|,   j = 1..m)
    slab cells    sigma x [j-1,j]  (dim |sigma|+1, j = 1..m)

with the product boundary rule
    d(sigma x [j-1,j]) = (d sigma) x [j-1,j]
                         + (-1)^dim(sigma) * (sigma x {j} - sigma x {j-1}),
where sigma x {0} is the attached core cell.  Level m is the collar.

Cell identifiers are strings; collar layers use "end<i>:lvl<j>:<cell>" and
"end<i>:slab<j>:<cell>" (slab j spans [j-1, j]), and product complexes use
"<cell>*<cell>".  All constructions are deterministic in cell order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError, StructuralError


class FiniteComplex:
    """CW complex encoded by cell lists and signed incidence degrees."""

    def __init__(
        self,
        cells: dict[int, Sequence[str]],
        incidence: dict[str, dict[str, int]],
        name: str = "complex",
    ):
        self.name = name
        top = max((d for d, cs in cells.items() if cs), default=0)
        self.dims = top
        self.cells: dict[int, list[str]] = {
            d: list(cells.get(d, ())) for d in range(top + 1)
        }
        self.index: dict[str, tuple[int, int]] = {}
        for d in range(top + 1):
            for pos, c in enumerate(self.cells[d]):
                if c in self.index:
                    raise StructuralError(f"duplicate cell id {c!r}")
                self.index[c] = (d, pos)
        self.incidence: dict[str, dict[str, int]] = {
            c: {f: int(v) for f, v in row.items() if int(v) != 0}
            for c, row in incidence.items()
            if c in self.index
        }
        self._boundary_matrices: dict[int, np.ndarray] = {}
        self._cofaces: dict[str, dict[str, int]] | None = None

    # -- basic queries -------------------------------------------------

    def dim_of(self, cell: str) -> int:
        return self.index[cell][0]

    def n_cells(self, dim: int) -> int:
        return len(self.cells.get(dim, ()))

    def all_cells(self) -> Iterable[str]:
        for d in range(self.dims + 1):
            yield from self.cells[d]

    def degree(self, cell: str, facet: str) -> int:
        return self.incidence.get(cell, {}).get(facet, 0)

    def facets(self, cell: str) -> dict[str, int]:
        return self.incidence.get(cell, {})

    def cofaces(self, cell: str) -> dict[str, int]:
        if self._cofaces is None:
            table: dict[str, dict[str, int]] = {c: {} for c in self.index}
            for c, row in self.incidence.items():
                for f, v in row.items():
                    table[f][c] = v
            self._cofaces = table
        return self._cofaces.get(cell, {})

    def boundary_matrix(self, i: int) -> np.ndarray:
        """Matrix of the boundary map on i-chains: rows are i-cells,
        columns (i-1)-cells, entries the incidence degrees."""
        if i not in self._boundary_matrices:
            rows = self.cells.get(i, [])
            cols = self.cells.get(i - 1, [])
            col_pos = {c: k for k, c in enumerate(cols)}
            M = np.zeros((len(rows), len(cols)), dtype=np.int64)
            for r, cell in enumerate(rows):
                for f, v in self.incidence.get(cell, {}).items():
                    M[r, col_pos[f]] = v
            M.flags.writeable = False
            self._boundary_matrices[i] = M
        return self._boundary_matrices[i]

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * self.n_cells(d) for d in range(self.dims + 1))

    # -- construction helpers -------------------------------------------

    def closure(self, cells: Iterable[str]) -> set[str]:
        out: set[str] = set()
        stack = list(cells)
        while stack:
            c = stack.pop()
            if c in out:
                continue
            out.add(c)
            stack.extend(self.incidence.get(c, {}))
        return out

    def subcomplex(self, keep: Iterable[str], name: str | None = None) -> "FiniteComplex":
        keep = set(keep)
        missing = keep - set(self.index)
        if missing:
            raise StructuralError(f"unknown cells {sorted(missing)[:3]}")
        cells = {
            d: [c for c in self.cells[d] if c in keep] for d in range(self.dims + 1)
        }
        incidence = {}
        for c in keep:
            row = {f: v for f, v in self.incidence.get(c, {}).items() if f in keep}
            if row:
                incidence[c] = row
        # A subcomplex must be closed under taking facets.
        for c in keep:
            for f in self.incidence.get(c, {}):
                if f not in keep:
                    raise StructuralError(
                        f"subcomplex not closed: {c!r} has facet {f!r} outside"
                    )
        return FiniteComplex(cells, incidence, name or f"{self.name}[sub]")

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        return {
            "dims": self.dims,
            "cells": {str(d): list(self.cells[d]) for d in range(self.dims + 1)},
            "incidence": sorted(
                [c, f, v] for c, row in self.incidence.items() for f, v in row.items()
            ),
        }

    @classmethod
    def from_json(cls, blob: dict, name: str = "complex") -> "FiniteComplex":
        cells = {int(d): list(cs) for d, cs in blob["cells"].items()}
        incidence: dict[str, dict[str, int]] = {}
        for c, f, v in blob["incidence"]:
            incidence.setdefault(c, {})[f] = int(v)
        return cls(cells, incidence, name)

    def __repr__(self):
        counts = ",".join(str(self.n_cells(d)) for d in range(self.dims + 1))
        return f"FiniteComplex({self.name}: {counts})"


@dataclass(frozen=True)
class End:
    """Product end: a cross-section complex embedded into the core."""

    cross_section: FiniteComplex
    attachment: dict[str, str]
    name: str


class EndedComplex:
    """Compact core with finitely many product ends."""

    def __init__(self, core: FiniteComplex, ends: Sequence[End], name: str = "ended"):
        self.core = core
        self.ends = list(ends)
        self.name = name
        self._truncations: dict[int, Truncation] = {}

    @property
    def dims(self) -> int:
        d = self.core.dims
        for e in self.ends:
            d = max(d, e.cross_section.dims + 1)
        return d

    def end_names(self) -> list[str]:
        return [e.name for e in self.ends]

    def level_cell(self, end_index: int, j: int, sigma: str) -> str:
        if j == 0:
            return self.ends[end_index].attachment[sigma]
        return f"{self.ends[end_index].name}:lvl{j}:{sigma}"

    def slab_cell(self, end_index: int, j: int, sigma: str) -> str:
        return f"{self.ends[end_index].name}:slab{j}:{sigma}"

    def decode(self, cell: str):
        """Return ('core', cell) or (end_index, 'lvl'|'slab', j, sigma)."""
        for i, e in enumerate(self.ends):
            prefix = e.name + ":"
            if cell.startswith(prefix):
                kind_j, _, sigma = cell[len(prefix) :].partition(":")
                kind = kind_j[:3] if kind_j.startswith("lvl") else kind_j[:4]
                j = int(kind_j[len(kind) :])
                return (i, kind, j, sigma)
        return ("core", cell)

    def cell_depth(self, cell: str) -> int:
        """Collar level of a cell; core cells have depth 0."""
        dec = self.decode(cell)
        return 0 if dec[0] == "core" else dec[2]

    def truncate(self, depth: int) -> "Truncation":
        if depth not in self._truncations:
            self._truncations[depth] = Truncation(self, depth)
        return self._truncations[depth]

    def to_json(self) -> dict:
        blob = self.core.to_json()
        blob["ends"] = [
            {
                "cross_section": e.cross_section.to_json(),
                "attachment": dict(sorted(e.attachment.items())),
            }
            for e in self.ends
        ]
        return blob

    @classmethod
    def from_json(cls, blob: dict, name: str = "ended") -> "EndedComplex":
        core = FiniteComplex.from_json(blob, name=f"{name}.core")
        ends = []
        for i, eb in enumerate(blob.get("ends", [])):
            ends.append(
                End(
                    FiniteComplex.from_json(eb["cross_section"], name=f"{name}.end{i}"),
                    dict(eb["attachment"]),
                    f"end{i}",
                )
            )
        return cls(core, ends, name)

    def __repr__(self):
        return f"EndedComplex({self.name}: core={self.core!r}, ends={len(self.ends)})"


class Truncation:
    """Finite complex made of the core plus m collar layers per end."""

    def __init__(self, source: EndedComplex, depth: int):
        if depth < 0:
            raise ArgumentError(f"truncation depth must be >= 0, got {depth}")
        self.source = source
        self.depth = depth
        core = source.core
        cells: dict[int, list[str]] = {
            d: list(core.cells.get(d, ())) for d in range(source.dims + 1)
        }
        incidence: dict[str, dict[str, int]] = {
            c: dict(row) for c, row in core.incidence.items()
        }
        for ei, end in enumerate(source.ends):
            cs = end.cross_section
            for j in range(1, depth + 1):
                for sd in range(cs.dims + 1):
                    for sigma in cs.cells[sd]:
                        lvl = source.level_cell(ei, j, sigma)
                        cells.setdefault(sd, []).append(lvl)
                        row = {
                            source.level_cell(ei, j, tau): v
                            for tau, v in cs.facets(sigma).items()
                        }
                        if row:
                            incidence[lvl] = row
                        slab = source.slab_cell(ei, j, sigma)
                        cells.setdefault(sd + 1, []).append(slab)
                        srow = {
                            source.slab_cell(ei, j, tau): v
                            for tau, v in cs.facets(sigma).items()
                        }
                        sign = (-1) ** sd
                        srow[lvl] = sign
                        srow[source.level_cell(ei, j - 1, sigma)] = -sign
                        incidence[slab] = srow
        self.result = FiniteComplex(
            cells, incidence, name=f"{source.name}@{depth}"
        )
        self.result.truncation_depth = depth
        self.result.ended_source = source
        self.collar: list[str] = [
            source.level_cell(ei, depth, sigma)
            for ei, end in enumerate(source.ends)
            for sd in range(end.cross_section.dims + 1)
            for sigma in end.cross_section.cells[sd]
        ] if depth >= 1 else []

    def __repr__(self):
        return f"Truncation({self.source.name}, depth={self.depth})"


@dataclass
class ValidationReport:
    """Outcome of validate(); collects every violation, never raises."""

    target: str
    violations: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, **detail):
        self.violations.append({"kind": kind, **detail})

    def to_json(self) -> dict:
        return {"target": self.target, "ok": self.ok, "violations": self.violations}


def _validate_finite(c: FiniteComplex, report: ValidationReport):
    for cell, row in c.incidence.items():
        d = c.dim_of(cell)
        for f, v in row.items():
            if f not in c.index:
                report.add("unknown_facet", cell=cell, facet=f)
            elif c.dim_of(f) != d - 1:
                report.add("facet_dimension", cell=cell, facet=f, expected=d - 1)
    # d^2 = 0 over the integers, checked per (cell, grandfacet) pair.
    for i in range(2, c.dims + 1):
        A = c.boundary_matrix(i)
        B = c.boundary_matrix(i - 1)
        if A.size == 0 or B.size == 0:
            continue
        P = A @ B
        for r, q in zip(*np.nonzero(P)):
            report.add(
                "boundary_squared",
                cell=c.cells[i][int(r)],
                grandfacet=c.cells[i - 2][int(q)],
                value=int(P[r, q]),
            )


def validate(obj) -> ValidationReport:
    """Structural validation of a finite or ended complex.

    Confirms d^2 = 0, and for ended complexes that each attachment is a
    subcomplex embedding and that the images of distinct ends are disjoint.
    Returns the full violation list rather than stopping at the first.
    """
    if isinstance(obj, Truncation):
        return validate(obj.result)
    if isinstance(obj, FiniteComplex):
        report = ValidationReport(obj.name)
        _validate_finite(obj, report)
        return report
    if not isinstance(obj, EndedComplex):
        raise ArgumentError(f"cannot validate {type(obj).__name__}")

    report = ValidationReport(obj.name)
    _validate_finite(obj.core, report)
    images: dict[str, str] = {}
    for ei, end in enumerate(obj.ends):
        cs = end.cross_section
        _validate_finite(cs, report)
        seen: set[str] = set()
        for sigma in cs.all_cells():
            target = end.attachment.get(sigma)
            if target is None:
                report.add("attachment_missing", end=end.name, cell=sigma)
                continue
            if target not in obj.core.index:
                report.add("attachment_target_unknown", end=end.name, cell=sigma, target=target)
                continue
            if obj.core.dim_of(target) != cs.dim_of(sigma):
                report.add("attachment_dimension", end=end.name, cell=sigma, target=target)
            if target in seen:
                report.add("attachment_not_injective", end=end.name, target=target)
            seen.add(target)
            if target in images:
                report.add(
                    "attachment_overlap", ends=[images[target], end.name], target=target
                )
            images[target] = end.name
        # Embedding: core incidence of an attached cell restricts exactly to
        # the cross-section incidence.
        for sigma in cs.all_cells():
            target = end.attachment.get(sigma)
            if target is None or target not in obj.core.index:
                continue
            core_row = obj.core.facets(target)
            cs_row = {end.attachment.get(t): v for t, v in cs.facets(sigma).items()}
            if core_row != {k: v for k, v in cs_row.items() if k is not None}:
                report.add(
                    "attachment_not_embedding", end=end.name, cell=sigma, target=target
                )
    if report.ok and obj.ends:
        _validate_finite(obj.truncate(2).result, report)
    return report


def product(a: FiniteComplex, b: FiniteComplex, name: str | None = None) -> FiniteComplex:
    """Cartesian product complex with the usual signed boundary rule:
    d(s x t) = (d s) x t + (-1)^dim(s) s x (d t)."""

    def pname(s, t):
        return f"{s}*{t}"

    cells: dict[int, list[str]] = {}
    for k in range(a.dims + b.dims + 1):
        out = []
        for i in range(k + 1):
            j = k - i
            for s in a.cells.get(i, ()):
                for t in b.cells.get(j, ()):
                    out.append(pname(s, t))
        cells[k] = out
    incidence: dict[str, dict[str, int]] = {}
    for i in range(a.dims + 1):
        for s in a.cells[i]:
            for j in range(b.dims + 1):
                for t in b.cells[j]:
                    row: dict[str, int] = {}
                    for f, v in a.facets(s).items():
                        row[pname(f, t)] = v
                    sign = (-1) ** i
                    for f, v in b.facets(t).items():
                        row[pname(s, f)] = sign * v
                    if row:
                        incidence[pname(s, t)] = row
    return FiniteComplex(cells, incidence, name or f"({a.name})x({b.name})")


def product_with_ended(f: FiniteComplex, e: EndedComplex, name: str | None = None) -> EndedComplex:
    """Product of a finite complex with an ended complex, end by end."""
    core = product(f, e.core, name=f"{f.name}x{e.core.name}")
    ends = []
    for ei, end in enumerate(e.ends):
        cs = product(f, end.cross_section, name=f"{f.name}x{end.cross_section.name}")
        attachment = {
            f"{s}*{t}": f"{s}*{end.attachment[t]}"
            for s in f.all_cells()
            for t in end.cross_section.all_cells()
        }
        ends.append(End(cs, attachment, f"end{ei}"))
    return EndedComplex(core, ends, name or f"({f.name})x({e.name})")


def disjoint_union(parts: Sequence[FiniteComplex], name: str = "union") -> FiniteComplex:
    """Disjoint union; cells are prefixed with their part index."""
    cells: dict[int, list[str]] = {}
    incidence: dict[str, dict[str, int]] = {}
    for i, part in enumerate(parts):
        for d in range(part.dims + 1):
            cells.setdefault(d, []).extend(f"p{i}:{c}" for c in part.cells[d])
        for c, row in part.incidence.items():
            incidence[f"p{i}:{c}"] = {f"p{i}:{f}": v for f, v in row.items()}
    return FiniteComplex(cells, incidence, name)
