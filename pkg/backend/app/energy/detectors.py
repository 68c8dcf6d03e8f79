"""
Backtracking detectors for forbidden bipartite subgraphs.

All detectors walk vertices and neighbors in sorted order, so the first
witness found is reproducible. Each DFS extension counts against a step
budget; running out yields status "unknown".
"""

import logging
from itertools import combinations
from typing import Any, Dict, Hashable, List, Optional, Tuple

import networkx as nx
from pydantic import BaseModel

from app.errors import InputError
from config import DETECTOR_BUDGET

logger = logging.getLogger(__name__)


class DetectionResult(BaseModel):
    status: str  # "found" | "none" | "unknown"
    witness_vertices: List[Any] = []
    witness_edges: List[Tuple[Any, Any]] = []
    steps: int = 0


class _BudgetExhausted(Exception):
    pass


class _Walker:
    """Sorted adjacency plus a shared step counter"""

    def __init__(self, graph: nx.Graph, budget: int):
        self.order = sorted(graph.nodes)
        self.rank: Dict[Hashable, int] = {v: k for k, v in enumerate(self.order)}
        self.adj: Dict[Hashable, List[Hashable]] = {
            v: sorted(graph.neighbors(v), key=self.rank.__getitem__) for v in self.order
        }
        self.budget = budget
        self.steps = 0

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.budget:
            raise _BudgetExhausted()


def _cycle_edges(cycle: List[Hashable]) -> List[Tuple[Hashable, Hashable]]:
    return [(cycle[k], cycle[(k + 1) % len(cycle)]) for k in range(len(cycle))]


def find_even_cycle(graph: nx.Graph, length: int, budget: Optional[int] = None) -> DetectionResult:
    """Find a cycle on exactly `length` vertices; the cycle's smallest vertex is its start"""
    if length < 4 or length % 2:
        raise InputError(f"even cycle length must be even and >= 4, got {length}")
    walker = _Walker(graph, budget or DETECTOR_BUDGET)
    rank = walker.rank

    def extend(path: List[Hashable], on_path: set) -> Optional[List[Hashable]]:
        walker.tick()
        last = path[-1]
        if len(path) == length:
            return path if path[0] in walker.adj[last] else None
        for nxt in walker.adj[last]:
            if rank[nxt] <= rank[path[0]] or nxt in on_path:
                continue
            path.append(nxt)
            on_path.add(nxt)
            found = extend(path, on_path)
            if found:
                return found
            path.pop()
            on_path.discard(nxt)
        return None

    try:
        for start in walker.order:
            if len(walker.adj[start]) < 2:
                continue
            cycle = extend([start], {start})
            if cycle:
                return DetectionResult(status="found", witness_vertices=list(cycle),
                                       witness_edges=_cycle_edges(cycle), steps=walker.steps)
    except _BudgetExhausted:
        logger.warning(f"C_{length} search stopped after {walker.steps} steps")
        return DetectionResult(status="unknown", steps=walker.steps)
    return DetectionResult(status="none", steps=walker.steps)


def _paths_between(walker: _Walker, u: Hashable, v: Hashable, length: int) -> List[List[Hashable]]:
    """All simple u-v paths with exactly `length` edges, in lexicographic DFS order"""
    found: List[List[Hashable]] = []

    def extend(path: List[Hashable]) -> None:
        walker.tick()
        last = path[-1]
        if len(path) == length:
            if v in walker.adj[last]:
                found.append(path + [v])
            return
        for nxt in walker.adj[last]:
            if nxt == v or nxt in path:
                continue
            path.append(nxt)
            extend(path)
            path.pop()

    extend([u])
    return found


def _disjoint_paths(paths: List[List[Hashable]], count: int) -> Optional[List[List[Hashable]]]:
    chosen: List[List[Hashable]] = []
    used: set = set()

    def pick(start: int) -> bool:
        if len(chosen) == count:
            return True
        for k in range(start, len(paths)):
            if len(paths) - k < count - len(chosen):
                return False
            inner = paths[k][1:-1]
            if used.isdisjoint(inner):
                chosen.append(paths[k])
                used.update(inner)
                if pick(k + 1):
                    return True
                chosen.pop()
                used.difference_update(inner)
        return False

    return chosen if pick(0) else None


def find_theta(graph: nx.Graph, a: int, b: int, budget: Optional[int] = None) -> DetectionResult:
    """Find Θ(a, b): two vertices joined by b internally disjoint paths of length a"""
    if a < 2 or b < 2:
        raise InputError(f"theta parameters must be >= 2, got a={a}, b={b}")
    walker = _Walker(graph, budget or DETECTOR_BUDGET)
    try:
        for u, v in combinations(walker.order, 2):
            if len(walker.adj[u]) < b or len(walker.adj[v]) < b:
                continue
            paths = _paths_between(walker, u, v, a)
            if len(paths) < b:
                continue
            chosen = _disjoint_paths(paths, b)
            if chosen:
                vertices = [u, v] + [x for path in chosen for x in path[1:-1]]
                edges = [(path[k], path[k + 1]) for path in chosen for k in range(a)]
                return DetectionResult(status="found", witness_vertices=vertices,
                                       witness_edges=edges, steps=walker.steps)
    except _BudgetExhausted:
        logger.warning(f"theta({a},{b}) search stopped after {walker.steps} steps")
        return DetectionResult(status="unknown", steps=walker.steps)
    return DetectionResult(status="none", steps=walker.steps)


def find_subdivision_Kt(graph: nx.Graph, t: int, budget: Optional[int] = None) -> DetectionResult:
    """Find K¹_t: t branch vertices with pairwise distinct private common neighbors"""
    if t < 3:
        raise InputError(f"subdivision order must be >= 3, got {t}")
    walker = _Walker(graph, budget or DETECTOR_BUDGET)
    nbr_sets = {v: set(walker.adj[v]) for v in walker.order}
    candidates = [v for v in walker.order if len(walker.adj[v]) >= t - 1]

    def assign(branch: List[Hashable]) -> Optional[Dict[Tuple[int, int], Hashable]]:
        # bipartite matching between branch pairs and subdividing vertices
        helper = nx.Graph()
        pairs = list(combinations(range(len(branch)), 2))
        helper.add_nodes_from((("pair", p) for p in pairs), bipartite=0)
        forbidden = set(branch)
        for p in pairs:
            common = (nbr_sets[branch[p[0]]] & nbr_sets[branch[p[1]]]) - forbidden
            helper.add_edges_from((("pair", p), ("via", w)) for w in common)
        matching = nx.bipartite.hopcroft_karp_matching(helper, top_nodes=[("pair", p) for p in pairs])
        chosen = {p: matching[("pair", p)][1] for p in pairs if ("pair", p) in matching}
        return chosen if len(chosen) == len(pairs) else None

    def grow(branch: List[Hashable], start: int) -> Optional[Tuple[List[Hashable], Dict]]:
        walker.tick()
        if len(branch) == t:
            routes = assign(branch)
            return (list(branch), routes) if routes else None
        for k in range(start, len(candidates)):
            v = candidates[k]
            if all((nbr_sets[v] & nbr_sets[w]) - {v, w} for w in branch):
                branch.append(v)
                found = grow(branch, k + 1)
                if found:
                    return found
                branch.pop()
        return None

    try:
        found = grow([], 0)
    except _BudgetExhausted:
        logger.warning(f"K1_{t} search stopped after {walker.steps} steps")
        return DetectionResult(status="unknown", steps=walker.steps)
    if not found:
        return DetectionResult(status="none", steps=walker.steps)
    branch, routes = found
    vertices = list(branch) + [routes[p] for p in sorted(routes)]
    edges = []
    for (x, y), w in sorted(routes.items()):
        edges.append((branch[x], w))
        edges.append((branch[y], w))
    return DetectionResult(status="found", witness_vertices=vertices, witness_edges=edges, steps=walker.steps)
