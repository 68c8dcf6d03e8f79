"""
Random sparse 4-uniform hypergraphs and the pairing colorings they induce.

Vertices 0..2n-1 are later split into an A half and a B half. A hyperedge
with two vertices on each side {a1 < a2, b1 < b2} forces c(a1 b1) = c(a2 b2).
"""

import logging
import math
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from app.errors import BudgetError, InputError
from config import SPARSITY_BUDGET, SPLIT_RETRIES

logger = logging.getLogger(__name__)

Quad = Tuple[int, int, int, int]


class Hypergraph4:
    """A 4-uniform hypergraph on vertices 0..order-1, hyperedges kept as sorted 4-tuples."""

    def __init__(self, order: int, edges: Sequence[Sequence[int]]):
        quads = []
        for edge in edges:
            quad = tuple(sorted(int(v) for v in edge))
            if len(quad) != 4 or len(set(quad)) != 4 or quad[0] < 0 or quad[-1] >= order:
                raise InputError(f"{edge} is not a 4-subset of 0..{order - 1}")
            quads.append(quad)
        self.order = order
        self.edges: List[Quad] = quads

    def __len__(self) -> int:
        return len(self.edges)

    def is_linear(self) -> bool:
        """Every vertex pair lies in at most one hyperedge"""
        covered = set()
        for edge in self.edges:
            for pair in combinations(edge, 2):
                if pair in covered:
                    return False
                covered.add(pair)
        return True

    def max_span(self, k: int) -> int:
        """Most hyperedges inside any k-subset of vertices, by exhaustive scan"""
        best = 0
        for subset in combinations(range(self.order), min(k, self.order)):
            chosen = set(subset)
            best = max(best, sum(1 for edge in self.edges if chosen.issuperset(edge)))
        return best

    def is_sparse(self, k: int, ell: int) -> bool:
        """No k vertices span more than ell hyperedges"""
        if len(self.edges) <= ell:
            return True
        for group in combinations(self.edges, ell + 1):
            if len(set().union(*group)) <= k:
                return False
        return True

    def split_edges(self, side_a: Sequence[int]) -> List[Quad]:
        """Hyperedges with exactly two vertices in side_a"""
        a = set(side_a)
        return [edge for edge in self.edges if sum(1 for v in edge if v in a) == 2]


class SplitHypergraph(BaseModel):
    n: int
    sampled: int
    surviving: List[Quad]
    linear: List[Quad]
    side_a: List[int]
    split: List[Quad]
    attempts: int
    flags: List[str] = []


def default_ell(s: int, t: int) -> int:
    return (s + t - 1) // 3


def default_density_target(n: int, s: int, t: int, ell: int) -> int:
    """ceil(n^{4-(s+t-4)/ell}) hyperedges, capped by C(2n, 4)"""
    target = math.ceil(n ** (4 - (s + t - 4) / ell))
    return max(0, min(target, math.comb(2 * n, 4)))


def sample_hyperedges(order: int, count: int, rng: np.random.Generator) -> List[Quad]:
    pool = list(combinations(range(order), 4))
    count = min(count, len(pool))
    if count <= 0:
        return []
    picks = rng.choice(len(pool), size=count, replace=False)
    return [pool[int(k)] for k in sorted(picks)]


def enforce_sparsity(edges: List[Quad], k: int, ell: int) -> List[Quad]:
    """One pass over (ell+1)-groups; a group spanning at most k vertices loses its last member"""
    if len(edges) <= ell:
        return list(edges)
    groups = math.comb(len(edges), ell + 1)
    if groups > SPARSITY_BUDGET:
        raise BudgetError(f"{groups} hyperedge groups to check, budget is {SPARSITY_BUDGET}")
    alive = [True] * len(edges)
    for combo in combinations(range(len(edges)), ell + 1):
        if not all(alive[i] for i in combo):
            continue
        if len(set().union(*(edges[i] for i in combo))) <= k:
            alive[combo[-1]] = False
    return [edge for edge, keep in zip(edges, alive) if keep]


def greedy_linear(edges: Sequence[Quad]) -> List[Quad]:
    """Maximal linear sub-hypergraph, scanning hyperedges in order"""
    covered = set()
    kept = []
    for edge in edges:
        pairs = list(combinations(edge, 2))
        if covered.isdisjoint(pairs):
            kept.append(edge)
            covered.update(pairs)
    return kept


def balanced_split(hypergraph: Hypergraph4, n: int, rng: np.random.Generator,
                   retries: int = SPLIT_RETRIES) -> Tuple[List[int], List[Quad], int, bool]:
    """Random n/n split of the vertices until a quarter of the hyperedges split 2+2"""
    best: Optional[Tuple[List[int], List[Quad]]] = None
    attempts = 0
    for attempts in range(1, max(1, retries) + 1):
        side_a = sorted(int(v) for v in rng.permutation(2 * n)[:n])
        split = hypergraph.split_edges(side_a)
        if best is None or len(split) > len(best[1]):
            best = (side_a, split)
        if 4 * len(split) >= len(hypergraph):
            return side_a, split, attempts, True
    return best[0], best[1], attempts, False


def build_split_hypergraph(n: int, s: int, t: int, ell: Optional[int] = None,
                           density_target: Optional[int] = None, seed: int = 0,
                           retries: int = SPLIT_RETRIES) -> SplitHypergraph:
    """Sample, sparsify, linearize and split a 4-uniform hypergraph on 2n vertices"""
    if s + t < 8:
        raise InputError(f"hypergraph construction needs s+t >= 8, got {s + t}")
    if s > t:
        raise InputError(f"need s <= t, got s={s}, t={t}")
    if 2 * n < s + t:
        raise InputError(f"2n = {2 * n} vertices cannot hold an (s+t)-subset")
    ell = default_ell(s, t) if ell is None else ell
    if ell < 1:
        raise InputError(f"ell must be positive, got {ell}")
    if density_target is None:
        density_target = default_density_target(n, s, t, ell)

    rng = np.random.default_rng(seed)
    sampled = sample_hyperedges(2 * n, density_target, rng)
    surviving = enforce_sparsity(sampled, s + t, ell)
    linear = greedy_linear(surviving)
    side_a, split, attempts, reached = balanced_split(Hypergraph4(2 * n, linear), n, rng, retries)

    flags = []
    if not reached:
        flags.append("SplitBelowTarget")
        logger.warning(f"⚠️ best split kept {len(split)} of {len(linear)} linear hyperedges after {attempts} tries")
    logger.debug(f"hypergraph: sampled {len(sampled)}, sparse {len(surviving)}, linear {len(linear)}, split {len(split)}")
    return SplitHypergraph(n=n, sampled=len(sampled), surviving=surviving, linear=linear,
                           side_a=side_a, split=split, attempts=attempts, flags=flags)


def pairing_cells(result: SplitHypergraph) -> List[Tuple[Tuple[int, int], Tuple[int, int]]]:
    """Map each split hyperedge to the two K_{n,n} cells it forces to share a color"""
    side_a = set(result.side_a)
    row: Dict[int, int] = {v: k for k, v in enumerate(result.side_a)}
    col: Dict[int, int] = {v: k for k, v in enumerate(sorted(set(range(2 * result.n)) - side_a))}
    pairs = []
    for edge in result.split:
        a1, a2 = sorted(row[v] for v in edge if v in side_a)
        b1, b2 = sorted(col[v] for v in edge if v not in side_a)
        pairs.append(((a1, b1), (a2, b2)))
    return pairs
