"""
Projecting energy-graph structures back onto the base coloring.

pi_k sends a tuple vertex to its k-th coordinate and an energy edge (x, y)
to the base edge x_k y_k; pi is the union over all k. These helpers rebuild
the base subgraphs behind a witness, classify an ordering of witness edges
coordinate by coordinate, and grow a subgraph from a reservoir.
"""

import logging
from typing import Iterable, List, Sequence, Set, Tuple

from pydantic import BaseModel

from app.core import BaseSubgraph, Cell
from app.energy.graph import EnergyGraph, EnergyVertex, Vec
from app.errors import InputError, PreconditionError, RamseyToolError

logger = logging.getLogger(__name__)


class StructureReport(BaseModel):
    subgraph: BaseSubgraph
    repetitions: int
    witness_edges: int
    witness_a_vertices: int
    witness_b_vertices: int


class ReservoirLedger(BaseModel):
    """Per-step coordinate classes of an H-compatible ordering"""

    ordering: List[Tuple[EnergyVertex, EnergyVertex]]
    flags: List[List[str]]  # flags[i][k] in {"n", "s", "d"}
    n_counts: List[int]
    s_counts: List[int]
    d_counts: List[int]
    i_a: List[int]
    i_b: List[int]
    n_a: int
    s_a: int
    d_a: int
    n_b: int
    s_b: int
    d_b: int
    step_gains: List[int]
    step_bounds: List[int]
    final: BaseSubgraph

    @property
    def m_a(self) -> int:
        return len(self.i_a)

    @property
    def m_b(self) -> int:
        return len(self.i_b)


class ExtensionResult(BaseModel):
    subgraph: BaseSubgraph
    gain: int
    guaranteed: int
    used_a: List[Vec]
    used_b: List[Vec]


def _projections(left: Vec, right: Vec) -> List[Cell]:
    return [(a, b) for a, b in zip(left, right)]


def _orient(edge) -> Tuple[Vec, Vec]:
    """Accept (left, right) tuples or tagged ("A", x)/("B", y) endpoints in either order"""
    u, v = edge
    if u and isinstance(u[0], str):
        if {u[0], v[0]} != {"A", "B"}:
            raise InputError(f"energy edge {edge} does not join the two sides")
        return (tuple(u[1]), tuple(v[1])) if u[0] == "A" else (tuple(v[1]), tuple(u[1]))
    return tuple(u), tuple(v)


def corresponding_structure(energy: EnergyGraph, witness_edges: Iterable) -> StructureReport:
    """Union of all projections of the witness edges, with its repetition count"""
    oriented = []
    for edge in witness_edges:
        left, right = _orient(edge)
        if not energy.has_edge(left, right):
            raise InputError(f"{left}-{right} is not an edge of the energy graph")
        oriented.append((left, right))

    cells = {cell for left, right in oriented for cell in _projections(left, right)}
    subgraph = BaseSubgraph.from_edges(cells)
    lefts = {left for left, _ in oriented}
    rights = {right for _, right in oriented}
    r = energy.r
    if (len(subgraph.edges) > r * len(oriented) or len(subgraph.a_vertices) > r * len(lefts)
            or len(subgraph.b_vertices) > r * len(rights)):
        raise RamseyToolError("corresponding structure exceeds its projection bounds")
    return StructureReport(
        subgraph=subgraph,
        repetitions=subgraph.repetitions(energy.coloring),
        witness_edges=len(oriented),
        witness_a_vertices=len(lefts),
        witness_b_vertices=len(rights),
    )


def _contains(h: BaseSubgraph, vertex: EnergyVertex) -> bool:
    side, coords = vertex
    pool = h.a_vertices if side == "A" else h.b_vertices
    return all(x in pool for x in coords)


def classify_ordering(h: BaseSubgraph, energy: EnergyGraph,
                      ordering: Sequence[Tuple[EnergyVertex, EnergyVertex]]) -> ReservoirLedger:
    """Flag every coordinate of every step as new, seen or duplicate and tally the aggregates"""
    coloring = energy.coloring
    current = h
    flags: List[List[str]] = []
    n_counts, s_counts, d_counts = [], [], []
    i_a: List[int] = []
    i_b: List[int] = []
    gains: List[int] = []
    bounds: List[int] = []

    for idx, (u, v) in enumerate(ordering):
        if u[0] == v[0] or u[0] not in ("A", "B"):
            raise PreconditionError(f"step {idx}: {u} and {v} are on the same side")
        left, right = (u[1], v[1]) if u[0] == "A" else (v[1], u[1])
        if not energy.has_edge(left, right):
            raise PreconditionError(f"step {idx}: {left}-{right} is not an edge of the energy graph")
        if not _contains(current, u):
            raise PreconditionError(f"ordering is not H-compatible at step {idx}: {u} leaves V(H)")

        pool = current.a_vertices if v[0] == "A" else current.b_vertices
        step = []
        for k, cell in enumerate(_projections(left, right)):
            if v[1][k] not in pool:
                step.append("n")
            elif cell not in current.edges:
                step.append("s")
            else:
                step.append("d")
        flags.append(step)
        n_i, s_i, d_i = step.count("n"), step.count("s"), step.count("d")
        n_counts.append(n_i)
        s_counts.append(s_i)
        d_counts.append(d_i)
        (i_a if v[0] == "A" else i_b).append(idx)

        before = current.repetitions(coloring)
        current = current.with_parts(edges=_projections(left, right))
        gains.append(current.repetitions(coloring) - before)
        bounds.append(n_i + s_i - (1 if d_i == 0 else 0))

    def total(counts: List[int], idxs: List[int]) -> int:
        return sum(counts[i] for i in idxs)

    return ReservoirLedger(
        ordering=[(tuple(u), tuple(v)) for u, v in ordering],
        flags=flags,
        n_counts=n_counts,
        s_counts=s_counts,
        d_counts=d_counts,
        i_a=i_a,
        i_b=i_b,
        n_a=total(n_counts, i_a),
        s_a=total(s_counts, i_a),
        d_a=total(d_counts, i_a),
        n_b=total(n_counts, i_b),
        s_b=total(s_counts, i_b),
        d_b=total(d_counts, i_b),
        step_gains=gains,
        step_bounds=bounds,
        final=current,
    )


class Reservoir:
    """Tuple sets R_A, R_B attached to sources a (adjacent to R_B) and b (adjacent to R_A)."""

    def __init__(self, energy: EnergyGraph, reservoir_a: Iterable[Vec], reservoir_b: Iterable[Vec],
                 source_a: Vec, source_b: Vec):
        self.energy = energy
        self.reservoir_a = sorted(tuple(x) for x in reservoir_a)
        self.reservoir_b = sorted(tuple(x) for x in reservoir_b)
        self.source_a = tuple(source_a)
        self.source_b = tuple(source_b)

    def violations(self, f: BaseSubgraph) -> List[str]:
        issues = []
        r = self.energy.r
        for name, vec in (("source a", self.source_a), ("source b", self.source_b)):
            if len(vec) != r:
                issues.append(f"{name} {vec} is not an {r}-tuple")
        if not set(self.source_a) <= f.a_vertices:
            issues.append(f"source a {self.source_a} is not inside V(F)")
        if not set(self.source_b) <= f.b_vertices:
            issues.append(f"source b {self.source_b} is not inside V(F)")
        for x in self.reservoir_b:
            if not self.energy.has_edge(self.source_a, x):
                issues.append(f"{self.source_a}-{x} is not an energy edge")
        for y in self.reservoir_a:
            if not self.energy.has_edge(y, self.source_b):
                issues.append(f"{y}-{self.source_b} is not an energy edge")

        seen_a: Set[int] = set()
        seen_b: Set[int] = set()
        for side, vectors, taken, inside in (("A", self.reservoir_a, seen_a, f.a_vertices),
                                             ("B", self.reservoir_b, seen_b, f.b_vertices)):
            for vec in vectors:
                if len(vec) != r:
                    issues.append(f"reservoir vertex {vec} is not an {r}-tuple")
                if len(set(vec)) != len(vec) or not taken.isdisjoint(vec):
                    issues.append(f"reservoir vertex {vec} shares a coordinate on side {side}")
                if not inside.isdisjoint(vec):
                    issues.append(f"reservoir vertex {vec} meets V(F) on side {side}")
                taken.update(vec)
        return issues

    def validate(self, f: BaseSubgraph) -> None:
        issues = self.violations(f)
        if issues:
            raise PreconditionError("invalid reservoir: " + "; ".join(issues[:5]))


def _grow(edges: List[Cell], vectors: List[Vec], pair_edge, amount: int, r: int) -> List[Vec]:
    whole, partial = divmod(amount, r)
    used = vectors[: whole + (1 if partial else 0)]
    for ell, vec in enumerate(used):
        cells = pair_edge(vec)
        edges.extend(cells if ell < whole else cells[:partial])
    return used


def extend_with_reservoir(f: BaseSubgraph, reservoir: Reservoir, d1: int, d2: int) -> ExtensionResult:
    """Add d1 new A-vertices and d2 new B-vertices from the reservoir, gaining repetitions"""
    r = reservoir.energy.r
    if d1 < 0 or d2 < 0:
        raise InputError(f"extension sizes must be nonnegative, got d1={d1}, d2={d2}")
    if d1 > r * len(reservoir.reservoir_a) or d2 > r * len(reservoir.reservoir_b):
        raise InputError(
            f"reservoir holds {r * len(reservoir.reservoir_a)} A- and {r * len(reservoir.reservoir_b)} "
            f"B-coordinates, asked for d1={d1}, d2={d2}"
        )
    reservoir.validate(f)

    coloring = reservoir.energy.coloring
    edges: List[Cell] = []
    used_a = _grow(edges, reservoir.reservoir_a, lambda y: _projections(y, reservoir.source_b), d1, r)
    used_b = _grow(edges, reservoir.reservoir_b, lambda x: _projections(reservoir.source_a, x), d2, r)
    extended = f.with_parts(edges=edges)

    gain = extended.repetitions(coloring) - f.repetitions(coloring)
    guaranteed = d1 * (r - 1) // r + d2 * (r - 1) // r
    if gain < guaranteed:
        raise RamseyToolError(f"reservoir extension gained {gain} repetitions, expected at least {guaranteed}")
    logger.debug(f"extended F by ({d1}, {d2}) vertices, +{gain} repetitions")
    return ExtensionResult(subgraph=extended, gain=gain, guaranteed=guaranteed, used_a=used_a, used_b=used_b)
