"""Catalog of named complexes used across tests, the CLI and the docs.

Every builder is deterministic: cell identifiers and their order never
change between runs.  Ended complexes attach each end to its own disjoint
piece of the core, as the data model requires.
"""

from __future__ import annotations

from functools import lru_cache

from .complexes import (
    End,
    EndedComplex,
    FiniteComplex,
    disjoint_union,
    product,
    product_with_ended,
    validate,
)
from .errors import ArgumentError


def point(name: str = "point") -> FiniteComplex:
    return FiniteComplex({0: ["v"]}, {}, name)


def interval() -> FiniteComplex:
    return FiniteComplex(
        {0: ["v0", "v1"], 1: ["e"]}, {"e": {"v0": -1, "v1": 1}}, "interval"
    )


def path_graph(n_vertices: int) -> FiniteComplex:
    if n_vertices < 1:
        raise ArgumentError("path needs at least one vertex")
    verts = [f"v{i}" for i in range(n_vertices)]
    edges = [f"e{i}" for i in range(n_vertices - 1)]
    inc = {f"e{i}": {f"v{i}": -1, f"v{i+1}": 1} for i in range(n_vertices - 1)}
    return FiniteComplex({0: verts, 1: edges}, inc, f"path{n_vertices}")


def cycle_graph(n: int) -> FiniteComplex:
    if n < 1:
        raise ArgumentError("cycle needs at least one vertex")
    verts = [f"v{i}" for i in range(n)]
    edges = [f"e{i}" for i in range(n)]
    inc = {}
    for i in range(n):
        row = {}
        row[f"v{i}"] = row.get(f"v{i}", 0) - 1
        tgt = f"v{(i + 1) % n}"
        row[tgt] = row.get(tgt, 0) + 1
        row = {k: v for k, v in row.items() if v}
        if row:
            inc[f"e{i}"] = row
    return FiniteComplex({0: verts, 1: edges}, inc, f"cycle{n}")


def grid(a: int, b: int) -> FiniteComplex:
    return product(path_graph(a), path_graph(b), name=f"grid{a}x{b}")


def torus(a: int = 2, b: int | None = None) -> FiniteComplex:
    b = a if b is None else b
    return product(cycle_graph(a), cycle_graph(b), name=f"torus{a}x{b}")


def disk() -> FiniteComplex:
    return product(interval(), interval(), name="disk")


def sphere(subdiv: int = 1) -> FiniteComplex:
    """Surface of a subdivided solid cube."""
    solid = product(product(path_graph(subdiv + 1), path_graph(subdiv + 1)), path_graph(subdiv + 1))
    outer = [
        f
        for f in solid.cells[2]
        if sum(1 for c in solid.cofaces(f)) == 1
    ]
    return solid.subcomplex(solid.closure(outer), name=f"sphere[{subdiv}]")


def genus_surface(g: int) -> FiniteComplex:
    """Closed orientable genus-g surface as a one-vertex complex.

    The 4g-gon identification makes every incidence degree vanish, so the
    sparse incidence table is empty.
    """
    if g < 1:
        raise ArgumentError("genus must be >= 1")
    edges = [f"{s}{i}" for i in range(g) for s in ("a", "b")]
    return FiniteComplex({0: ["v"], 1: edges, 2: ["F"]}, {}, f"genus{g}")


def single_cell(dim: int) -> FiniteComplex:
    return FiniteComplex({dim: ["c"]}, {}, f"cell(dim={dim})")


def _boundary_ring(c: FiniteComplex, face: str) -> set[str]:
    return c.closure([face]) - {face}


def plane() -> EndedComplex:
    """The plane: a square disk with one product end over its boundary ring."""
    core = disk()
    ring = sorted(_boundary_ring(core, core.cells[2][0]))
    cs = core.subcomplex(ring, name="plane.ring")
    return EndedComplex(core, [End(cs, {c: c for c in ring}, "end0")], "plane")


def halfline() -> EndedComplex:
    core = point("halfline.core")
    cs = point("halfline.cs")
    return EndedComplex(core, [End(cs, {"v": "v"}, "end0")], "halfline")


def line() -> EndedComplex:
    """The line: a 3-vertex path with an end glued to each outer vertex."""
    core = path_graph(3)
    e0 = End(point("line.cs0"), {"v": "v0"}, "end0")
    e1 = End(point("line.cs1"), {"v": "v2"}, "end1")
    return EndedComplex(core, [e0, e1], "line")


def star_graph(k: int = 4) -> EndedComplex:
    """A central vertex with k spokes, one end hanging off each leaf."""
    if k < 1:
        raise ArgumentError("star needs at least one end")
    verts = ["c"] + [f"l{i}" for i in range(k)]
    edges = [f"s{i}" for i in range(k)]
    inc = {f"s{i}": {"c": -1, f"l{i}": 1} for i in range(k)}
    core = FiniteComplex({0: verts, 1: edges}, inc, f"star{k}.core")
    ends = [
        End(point(f"star{k}.cs{i}"), {"v": f"l{i}"}, f"end{i}") for i in range(k)
    ]
    return EndedComplex(core, ends, f"star{k}")


def ising_graph(ends: int = 4, finite_components: int = 1) -> EndedComplex:
    """Locally finite graph with `ends` infinite directions plus finite
    components: the k-spoke star together with isolated 2-vertex paths."""
    star = star_graph(ends)
    parts = [star.core] + [path_graph(2) for _ in range(finite_components)]
    core = disjoint_union(parts, name=f"ising{ends}+{finite_components}")
    new_ends = [
        End(e.cross_section, {s: f"p0:{t}" for s, t in e.attachment.items()}, e.name)
        for e in star.ends
    ]
    return EndedComplex(core, new_ends, f"ising{ends}+{finite_components}")


def sigma_surface(k: int) -> EndedComplex:
    """Sphere with k faces removed and a cylinder end glued along each hole."""
    if k < 1:
        raise ArgumentError("sigma needs k >= 1")
    for subdiv in (1, 2, 3, 4):
        surf = sphere(subdiv)
        chosen: list[str] = []
        used: set[str] = set()
        for f in surf.cells[2]:
            ring = surf.closure([f])
            if used & ring:
                continue
            chosen.append(f)
            used |= ring
            if len(chosen) == k:
                break
        if len(chosen) == k:
            break
    else:
        raise ArgumentError(f"no sphere subdivision found for k={k}")
    keep = set(surf.all_cells()) - set(chosen)
    core = surf.subcomplex(keep, name=f"sigma{k}.core")
    ends = []
    for i, f in enumerate(chosen):
        ring = sorted(_boundary_ring(surf, f))
        cs = core.subcomplex(ring, name=f"sigma{k}.cs{i}")
        ends.append(End(cs, {c: c for c in ring}, f"end{i}"))
    return EndedComplex(core, ends, f"sigma{k}")


def _ring_cycle(ring: FiniteComplex) -> dict[str, int]:
    """Integer coefficients turning the boundary ring into a cycle."""
    edges = list(ring.cells[1])
    coeff = {edges[0]: 1}
    frontier = [edges[0]]
    while frontier:
        e = frontier.pop()
        for v, dv in ring.facets(e).items():
            for e2, dv2 in ring.cofaces(v).items():
                if e2 not in coeff:
                    coeff[e2] = -coeff[e] * dv * dv2
                    frontier.append(e2)
    for v in ring.cells[0]:
        total = sum(coeff[e] * dv for e, dv in ring.cofaces(v).items())
        if total:
            raise ArgumentError("boundary ring does not close up")
    return coeff


def product_with_plane(f: FiniteComplex) -> EndedComplex:
    """The homological-product space: f crossed with the plane.

    Carries the plane-part structure (face sheet, vertex sheet, boundary
    ring) needed for the canonical rotation choices in braiding."""
    pl = plane()
    e = product_with_ended(f, pl, name=f"({f.name})xplane")
    ring = pl.ends[0].cross_section
    e.factor_complex = f
    e.planar_info = {
        "face": pl.core.cells[2][0],
        "ring_cycle": _ring_cycle(ring),
        "ring_edges": list(ring.cells[1]),
        "ring_vertices": list(ring.cells[0]),
        "vertices": list(pl.core.cells[0]),
        "attach": dict(pl.ends[0].attachment),
    }
    return e


_FINITE = {
    "point": lambda: point(),
    "interval": interval,
    "path": path_graph,
    "cycle": cycle_graph,
    "grid": grid,
    "torus": torus,
    "disk": disk,
    "sphere": sphere,
    "genus": genus_surface,
    "single_cell": single_cell,
}

_ENDED = {
    "plane": plane,
    "halfline": halfline,
    "line": line,
    "star": star_graph,
    "ising": ising_graph,
    "sigma_k": sigma_surface,
}


@lru_cache(maxsize=None)
def _build(name: str, params: tuple) -> FiniteComplex | EndedComplex:
    kwargs = dict(params)
    if name in _FINITE:
        built = _FINITE[name](**kwargs)
    elif name in _ENDED:
        built = _ENDED[name](**kwargs)
    elif name == "product_with_plane":
        inner = kwargs.pop("F", "cycle")
        built = product_with_plane(build_named(inner, **kwargs))
    else:
        raise ArgumentError(f"unknown catalog entry {name!r}")
    report = validate(built)
    if not report.ok:
        raise ArgumentError(f"catalog entry {name!r} failed validation: {report.violations[:3]}")
    return built


def build_named(name: str, **params) -> FiniteComplex | EndedComplex:
    """Build (and cache) a catalog complex by name.

    Unknown names raise ArgumentError.  Every built complex is validated
    before being returned.
    """
    return _build(name, tuple(sorted(params.items())))


def catalog_names() -> list[str]:
    return sorted([*_FINITE, *_ENDED, "product_with_plane"])
