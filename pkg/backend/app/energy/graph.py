"""
The r-th color energy graph of a coloring and its three pruning stages.

Left vertices are r-tuples of A-indices, right vertices r-tuples of B-indices.
(x, y) is an edge when c(x_1 y_1) = ... = c(x_r y_r); that common color labels
the edge. Edges are stored sparsely, adjacency is built on first use.
"""

import logging
import math
from enum import Enum
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel

from app.core import Coloring, max_monochromatic_star
from app.errors import PreconditionError, RamseyToolError, ResourceError
from config import (
    DEFAULT_SEED,
    ENERGY_EDGE_LIMIT,
    ENERGY_TUPLE_LIMIT,
    JOBS,
    PARTITION_RETRIES,
    RARE_COLOR_THRESHOLD,
)

logger = logging.getLogger(__name__)

Vec = Tuple[int, ...]
EnergyEdge = Tuple[Vec, Vec]
EnergyVertex = Tuple[str, Vec]


class Stage(str, Enum):
    RAW = "Raw"
    PARTITIONED = "Partitioned"
    RARE_PRUNED = "RarePruned"
    CONFLICT_PRUNED = "ConflictPruned"


class EnergyGraph:
    """A (possibly pruned) r-th color energy graph over a base coloring."""

    def __init__(self, coloring: Coloring, r: int, edges: List[EnergyEdge], stage: Stage = Stage.RAW,
                 partitions: Optional[Tuple[List[List[int]], List[List[int]]]] = None,
                 raw_edge_count: Optional[int] = None, flags: Optional[List[str]] = None,
                 threshold: Optional[int] = None):
        self.coloring = coloring
        self.r = r
        self.edges = edges
        self.stage = stage
        self.partitions = partitions
        self.raw_edge_count = len(edges) if raw_edge_count is None else raw_edge_count
        self.flags = list(flags or [])
        self.threshold = threshold

    def derive(self, edges: List[EnergyEdge], stage: Stage, **changes) -> "EnergyGraph":
        kwargs = dict(partitions=self.partitions, raw_edge_count=self.raw_edge_count,
                      flags=self.flags, threshold=self.threshold)
        kwargs.update(changes)
        return EnergyGraph(self.coloring, self.r, edges, stage, **kwargs)

    # -- derived queries --------------------------------------------------

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def edge_color(self, left: Vec, right: Vec) -> int:
        return self.coloring.rows[left[0]][right[0]]

    @cached_property
    def _edge_set(self) -> Set[EnergyEdge]:
        return set(self.edges)

    @cached_property
    def _adjacency(self) -> Dict[EnergyVertex, List[EnergyVertex]]:
        adj: Dict[EnergyVertex, List[EnergyVertex]] = {}
        for left, right in self.edges:
            adj.setdefault(("A", left), []).append(("B", right))
            adj.setdefault(("B", right), []).append(("A", left))
        for nbrs in adj.values():
            nbrs.sort()
        return adj

    @property
    def left_vertices(self) -> List[Vec]:
        return sorted(v for side, v in self._adjacency if side == "A")

    @property
    def right_vertices(self) -> List[Vec]:
        return sorted(v for side, v in self._adjacency if side == "B")

    def has_edge(self, left: Vec, right: Vec) -> bool:
        return (tuple(left), tuple(right)) in self._edge_set

    def neighbors(self, vertex: EnergyVertex) -> List[EnergyVertex]:
        return self._adjacency.get(vertex, [])

    def degree(self, vertex: EnergyVertex) -> int:
        return len(self.neighbors(vertex))

    def colors(self) -> Set[int]:
        """Colors carried by the current edge set"""
        return {self.edge_color(left, right) for left, right in self.edges}

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        for left, right in self.edges:
            graph.add_node(("A", left), bipartite=0)
            graph.add_node(("B", right), bipartite=1)
            graph.add_edge(("A", left), ("B", right), color=self.edge_color(left, right))
        return graph

    def to_document(self) -> dict:
        return {
            "r": self.r,
            "stage": self.stage.value,
            "partitions": self.partitions,
            "edges": [[list(left), list(right), self.edge_color(left, right)] for left, right in self.edges],
        }

    def __repr__(self) -> str:
        return f"EnergyGraph(r={self.r}, stage={self.stage.value}, edges={self.edge_count})"


class EnergyConfig(BaseModel):
    seed: int = DEFAULT_SEED
    retries: int = PARTITION_RETRIES
    threshold: Optional[int] = None
    ell_star: Optional[int] = None
    jobs: int = JOBS


class PruneValidation(BaseModel):
    partition_violations: List[str] = []
    multiplicity_violations: List[str] = []
    conflict_violations: List[str] = []
    retained_fraction: float
    flags: List[str] = []

    @property
    def ok(self) -> bool:
        return not (self.partition_violations or self.multiplicity_violations or self.conflict_violations)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def color_energy(coloring: Coloring, r: int) -> int:
    """Σ m_i^r over color multiplicities, without building the graph"""
    return sum(m ** r for m in coloring.classes.multiplicities)


def _class_tuples(cells: Sequence[Tuple[int, int]], r: int) -> List[EnergyEdge]:
    return [(tuple(a for a, _ in combo), tuple(b for _, b in combo)) for combo in product(cells, repeat=r)]


def build_energy(coloring: Coloring, r: int, jobs: int = JOBS) -> EnergyGraph:
    """Raw energy graph: every ordered r-tuple of edges inside one color class"""
    if r < 2:
        raise PreconditionError(f"energy order must be >= 2, got r={r}")
    n = coloring.n
    if n ** r > ENERGY_TUPLE_LIMIT:
        raise ResourceError(f"n^r = {n ** r} tuple vertices exceeds the limit {ENERGY_TUPLE_LIMIT}")
    total = color_energy(coloring, r)
    if total > ENERGY_EDGE_LIMIT:
        raise ResourceError(f"energy graph would hold {total} edges, limit is {ENERGY_EDGE_LIMIT}")

    classes = coloring.classes.classes
    if jobs > 1 and len(classes) > 1:
        chunks = Parallel(n_jobs=jobs)(delayed(_class_tuples)(cells, r) for cells in classes)
    else:
        chunks = [_class_tuples(cells, r) for cells in classes]
    edges = [edge for chunk in chunks for edge in chunk]
    logger.debug(f"built G^{r} with {len(edges)} edges over {len(classes)} color classes")
    return EnergyGraph(coloring, r, edges)


def energy_lower_bound_colors(edge_count: int, n: int, r: int) -> float:
    """(n^{2r} / |E|)^{1/(r-1)}, a lower bound on the palette of the source coloring"""
    if r < 2:
        raise PreconditionError(f"energy order must be >= 2, got r={r}")
    if edge_count < n * n:
        raise PreconditionError(f"edge count {edge_count} is below the floor n^2 = {n * n}")
    ratio = Fraction(n ** (2 * r), edge_count)
    if r == 2:
        return float(ratio)
    return float(ratio) ** (1.0 / (r - 1))


def energy_color_exponent(alpha, r: int) -> Fraction:
    """If the pruned graph has O(n^alpha) edges then |C(G)| = Ω(n^{alpha r/(r-1)})"""
    return Fraction(alpha) * r / (r - 1)


# ---------------------------------------------------------------------------
# Pruning stages
# ---------------------------------------------------------------------------

def _balanced_parts(order: np.ndarray, r: int) -> List[List[int]]:
    return [sorted(int(v) for v in part) for part in np.array_split(order, r)]


def prune_partition(energy: EnergyGraph, seed: int = DEFAULT_SEED, retries: int = PARTITION_RETRIES) -> EnergyGraph:
    """Keep edges whose k-th coordinates lie in A_k and B_k for random balanced partitions"""
    if energy.stage is not Stage.RAW:
        raise PreconditionError(f"partition pruning expects a Raw graph, got {energy.stage.value}")
    n, r = energy.coloring.n, energy.r
    if n < r:
        raise PreconditionError(f"cannot split {n} vertices into {r} nonempty parts")
    target = Fraction(energy.edge_count, 2 * r ** (2 * r))
    rng = np.random.default_rng(seed)

    best = None
    for attempt in range(1, max(1, retries) + 1):
        parts_a = _balanced_parts(rng.permutation(n), r)
        parts_b = _balanced_parts(rng.permutation(n), r)
        where_a = {v: k for k, part in enumerate(parts_a) for v in part}
        where_b = {v: k for k, part in enumerate(parts_b) for v in part}
        kept = [
            (left, right) for left, right in energy.edges
            if all(where_a[left[k]] == k and where_b[right[k]] == k for k in range(r))
        ]
        if best is None or len(kept) > len(best[0]):
            best = (kept, parts_a, parts_b, attempt)
        if len(kept) >= target:
            break

    kept, parts_a, parts_b, attempt = best
    flags = list(energy.flags)
    if len(kept) < target:
        flags.append("BelowTarget")
        logger.warning(f"⚠️ partition kept {len(kept)} edges, below target {float(target):.2f} after {retries} tries")
    else:
        logger.debug(f"partition attempt {attempt} kept {len(kept)} of {energy.edge_count} edges")
    return energy.derive(kept, Stage.PARTITIONED, partitions=(parts_a, parts_b), flags=flags)


def default_rare_threshold(n: int) -> int:
    if RARE_COLOR_THRESHOLD:
        return max(1, int(RARE_COLOR_THRESHOLD))
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


def prune_rare_colors(energy: EnergyGraph, threshold: Optional[int] = None) -> EnergyGraph:
    """Drop edges whose color has fewer than `threshold` edges in the base coloring"""
    if energy.stage is not Stage.PARTITIONED:
        raise PreconditionError(f"rare-color pruning expects a Partitioned graph, got {energy.stage.value}")
    if threshold is None:
        threshold = default_rare_threshold(energy.coloring.n)
    if threshold < 1:
        raise PreconditionError(f"rare-color threshold must be >= 1, got {threshold}")
    mult = energy.coloring.classes.multiplicities
    kept = [(left, right) for left, right in energy.edges if mult[energy.edge_color(left, right)] >= threshold]
    return energy.derive(kept, Stage.RARE_PRUNED, threshold=threshold)


def _thin(adj: Dict[Vec, Set[Vec]], reverse: Dict[Vec, Set[Vec]], r: int) -> None:
    """For each vertex, keep the least neighbor per value of each neighbor coordinate"""
    for vertex in sorted(adj):
        for k in range(r):
            keep: Dict[int, Vec] = {}
            for nbr in sorted(adj[vertex]):
                keep.setdefault(nbr[k], nbr)
            survivors = set(keep.values())
            for nbr in adj[vertex] - survivors:
                reverse[nbr].discard(vertex)
            adj[vertex] = survivors


def prune_coordinate_conflicts(energy: EnergyGraph, ell_star: int) -> EnergyGraph:
    """Thin the graph so that vertices with a common neighbor differ in every coordinate"""
    if energy.stage is not Stage.RARE_PRUNED:
        raise PreconditionError(f"conflict pruning expects a RarePruned graph, got {energy.stage.value}")
    star = max_monochromatic_star(energy.coloring)
    if star.size >= ell_star:
        raise PreconditionError(
            f"coloring has a monochromatic star of size {star.size} at {star.side}{star.center}, "
            f"need every star below {ell_star}"
        )
    r = energy.r
    left_adj: Dict[Vec, Set[Vec]] = {}
    right_adj: Dict[Vec, Set[Vec]] = {}
    for left, right in energy.edges:
        left_adj.setdefault(left, set()).add(right)
        right_adj.setdefault(right, set()).add(left)

    _thin(left_adj, right_adj, r)
    _thin(right_adj, left_adj, r)

    kept = sorted((left, right) for left, rights in left_adj.items() for right in rights)
    flags = list(energy.flags)
    floor = Fraction(energy.edge_count, (ell_star - 1) ** (2 * r * (r - 1)))
    if len(kept) < floor:
        flags.append("BelowRetentionBound")
        logger.warning(f"⚠️ conflict pruning kept {len(kept)} edges, below {float(floor):.2f}")
    return energy.derive(kept, Stage.CONFLICT_PRUNED, flags=flags)


# ---------------------------------------------------------------------------
# Validation and the full pipeline
# ---------------------------------------------------------------------------

def validate_pruned(energy: EnergyGraph) -> PruneValidation:
    """Exhaustive post-hoc check of the partition, multiplicity and coordinate-disjointness properties"""
    n, r = energy.coloring.n, energy.r
    partition_issues: List[str] = []
    if energy.partitions is None:
        partition_issues.append("no partitions recorded")
    else:
        sizes = {n // r, -(-n // r)}
        for side, parts in zip("AB", energy.partitions):
            if len(parts) != r:
                partition_issues.append(f"{side} has {len(parts)} parts, expected {r}")
            if sorted(v for part in parts for v in part) != list(range(n)):
                partition_issues.append(f"{side} parts do not partition the vertex set")
            partition_issues.extend(
                f"{side}_{k} has size {len(part)}" for k, part in enumerate(parts) if len(part) not in sizes
            )
        if not partition_issues:
            parts_a = [set(p) for p in energy.partitions[0]]
            parts_b = [set(p) for p in energy.partitions[1]]
            for left, right in energy.edges:
                if not all(left[k] in parts_a[k] and right[k] in parts_b[k] for k in range(r)):
                    partition_issues.append(f"edge {left}-{right} leaves its parts")

    multiplicity_issues: List[str] = []
    if energy.threshold is not None:
        mult = energy.coloring.classes.multiplicities
        for color in sorted(energy.colors()):
            if mult[color] < energy.threshold:
                multiplicity_issues.append(f"color {color} has multiplicity {mult[color]} < {energy.threshold}")

    conflict_issues: List[str] = []
    for vertex, nbrs in energy._adjacency.items():
        for k in range(r):
            values = [nbr[1][k] for nbr in nbrs]
            if len(values) != len(set(values)):
                conflict_issues.append(f"neighbors of {vertex} repeat coordinate {k}")

    fraction = energy.edge_count / energy.raw_edge_count if energy.raw_edge_count else 0.0
    return PruneValidation(
        partition_violations=partition_issues,
        multiplicity_violations=multiplicity_issues,
        conflict_violations=conflict_issues,
        retained_fraction=fraction,
        flags=list(energy.flags),
    )


def pruned_energy(coloring: Coloring, r: int, config: Optional[EnergyConfig] = None) -> EnergyGraph:
    """Raw -> Partitioned -> RarePruned -> ConflictPruned, then validated"""
    config = config or EnergyConfig()
    ell_star = config.ell_star
    if ell_star is None:
        ell_star = max_monochromatic_star(coloring).size + 1
    raw = build_energy(coloring, r, jobs=config.jobs)
    graph = prune_partition(raw, seed=config.seed, retries=config.retries)
    graph = prune_rare_colors(graph, config.threshold)
    graph = prune_coordinate_conflicts(graph, ell_star)
    report = validate_pruned(graph)
    if not report.ok:
        raise RamseyToolError(
            "pruned energy graph failed validation: "
            + "; ".join((report.partition_violations + report.multiplicity_violations + report.conflict_violations)[:5])
        )
    logger.info(f"pruned G^{r}: {graph.edge_count}/{graph.raw_edge_count} edges retained, flags={graph.flags}")
    return graph
