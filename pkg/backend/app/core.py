"""
Core data model for edge-colored complete bipartite graphs K_{n,n}.

Edge (i, j) always means a_i b_j: row i is the A-vertex, column j the B-vertex.
Colors are dense integers 0..k-1.
"""

import json
import logging
from collections import Counter, defaultdict
from functools import cached_property
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, Iterator, List, Literal, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from app.errors import InputError

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]
Side = Literal["A", "B"]


# ---------------------------------------------------------------------------
# Wire models
# ---------------------------------------------------------------------------

class ColoringDocument(BaseModel):
    """Canonical JSON form of a coloring: {"n": ..., "matrix": [[...], ...]}"""

    n: int
    matrix: List[List[int]]

    @model_validator(mode="after")
    def _check_shape(self) -> "ColoringDocument":
        if self.n < 1:
            raise ValueError("n must be positive")
        if len(self.matrix) != self.n or any(len(row) != self.n for row in self.matrix):
            raise ValueError(f"matrix must be {self.n}x{self.n}")
        return self


class PatternSpec(BaseModel):
    """The requirement (s, t, q): every copy of K_{s,t} spans at least q colors."""

    model_config = ConfigDict(frozen=True)

    s: int
    t: int
    q: int

    @model_validator(mode="after")
    def _check_ranges(self) -> "PatternSpec":
        if not 1 <= self.s <= self.t:
            raise ValueError(f"need 1 <= s <= t, got s={self.s}, t={self.t}")
        if not 2 <= self.q <= self.s * self.t:
            raise ValueError(f"need 2 <= q <= st={self.s * self.t}, got q={self.q}")
        return self

    @property
    def edges(self) -> int:
        return self.s * self.t

    @property
    def allowed_repetitions(self) -> int:
        return self.s * self.t - self.q


def make_spec(s: int, t: int, q: int) -> PatternSpec:
    """Build a PatternSpec, reporting bad triples as InputError"""
    try:
        return PatternSpec(s=s, t=t, q=q)
    except ValidationError as e:
        raise InputError(f"invalid pattern (s={s}, t={t}, q={q}): {e.errors()[0]['msg']}") from e


class Subcopy(BaseModel):
    """One copy of K_{s,t}: its A-side rows, B-side columns and which side holds the s vertices."""

    model_config = ConfigDict(frozen=True)

    side_a: Tuple[int, ...]
    side_b: Tuple[int, ...]
    s_side: Side = "A"

    @field_validator("side_a", "side_b")
    @classmethod
    def _sorted_unique(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if list(value) != sorted(set(value)):
            raise ValueError("copy sides must be sorted and duplicate-free")
        if value and value[0] < 0:
            raise ValueError("negative vertex index")
        return value

    def sort_key(self) -> Tuple:
        """Scan order: orientation, then the s-side, then the t-side"""
        if self.s_side == "A":
            return (0, self.side_a, self.side_b)
        return (1, self.side_b, self.side_a)

    def cells(self) -> List[Cell]:
        return [(i, j) for i in self.side_a for j in self.side_b]


class StarWitness(BaseModel):
    size: int
    side: Side
    center: int
    leaves: List[int]
    color: int


class Pattern(BaseModel):
    """A monochromatic pattern searched inside a single color class."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["star", "matching", "double_star", "biclique", "even_cycle"]
    params: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_params(self) -> "Pattern":
        arity = {"star": 1, "matching": 1, "double_star": 2, "biclique": 2, "even_cycle": 1}[self.kind]
        if len(self.params) != arity or any(p < 1 for p in self.params):
            raise ValueError(f"{self.kind} takes {arity} positive parameter(s)")
        if self.kind == "even_cycle" and (self.params[0] < 4 or self.params[0] % 2):
            raise ValueError("even_cycle length must be even and at least 4")
        return self

    @classmethod
    def star(cls, k: int) -> "Pattern":
        return cls(kind="star", params=(k,))

    @classmethod
    def matching(cls, k: int) -> "Pattern":
        return cls(kind="matching", params=(k,))

    @classmethod
    def double_star(cls, k1: int, k2: int) -> "Pattern":
        return cls(kind="double_star", params=(k1, k2))

    @classmethod
    def biclique(cls, a: int, b: int) -> "Pattern":
        return cls(kind="biclique", params=(a, b))

    @classmethod
    def even_cycle(cls, length: int) -> "Pattern":
        return cls(kind="even_cycle", params=(length,))


class PatternWitness(BaseModel):
    pattern: Pattern
    color: int
    edges: List[Cell]


# ---------------------------------------------------------------------------
# Runtime objects
# ---------------------------------------------------------------------------

class ColorClassIndex:
    """Per-color edge lists and multiplicities, edges listed in row-major order."""

    def __init__(self, matrix: np.ndarray, palette_size: int):
        classes: List[List[Cell]] = [[] for _ in range(palette_size)]
        n = matrix.shape[0]
        for i in range(n):
            for j in range(n):
                classes[int(matrix[i, j])].append((i, j))
        self.classes = classes
        self.multiplicities = [len(c) for c in classes]

    def __len__(self) -> int:
        return len(self.classes)


class Coloring:
    """An edge-colored K_{n,n} with a dense palette. Immutable once built."""

    def __init__(self, matrix):
        arr = np.array(matrix, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise InputError(f"coloring matrix must be a non-empty square array, got shape {arr.shape}")
        present = np.unique(arr)
        if present[0] != 0 or present[-1] != len(present) - 1:
            raise InputError("palette is not dense: colors must be exactly 0..k-1")
        arr.setflags(write=False)
        self.matrix = arr
        self.n = int(arr.shape[0])
        self.palette_size = int(len(present))

    @classmethod
    def from_matrix(cls, raw) -> "Coloring":
        """Compact an arbitrary integer matrix, numbering colors by first row-major occurrence"""
        arr = np.asarray(raw, dtype=np.int64)
        if arr.ndim != 2:
            raise InputError("coloring matrix must be two-dimensional")
        flat = arr.ravel()
        _, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
        rank = np.argsort(np.argsort(first))
        return cls(rank[inverse].reshape(arr.shape))

    # -- queries ----------------------------------------------------------

    @cached_property
    def classes(self) -> ColorClassIndex:
        return ColorClassIndex(self.matrix, self.palette_size)

    @cached_property
    def rows(self) -> List[List[int]]:
        """Plain nested lists for the hot loops"""
        return self.matrix.tolist()

    def color(self, i: int, j: int) -> int:
        return int(self.matrix[i, j])

    def check_copy(self, copy: Subcopy) -> None:
        for side in (copy.side_a, copy.side_b):
            if side and side[-1] >= self.n:
                raise InputError(f"copy index {side[-1]} out of range for n={self.n}")

    def copy_colors(self, copy: Subcopy) -> Set[int]:
        self.check_copy(copy)
        rows = self.rows
        return {rows[i][j] for i in copy.side_a for j in copy.side_b}

    def canonical_key(self) -> Tuple[int, ...]:
        """Row-major matrix relabeled in first-occurrence order"""
        seen: Dict[int, int] = {}
        return tuple(seen.setdefault(c, len(seen)) for c in self.matrix.ravel().tolist())

    def permuted(self, rows: Sequence[int], cols: Sequence[int]) -> "Coloring":
        return Coloring.from_matrix(self.matrix[np.ix_(list(rows), list(cols))])

    def transpose(self) -> "Coloring":
        return Coloring.from_matrix(self.matrix.T)

    def is_pairing(self) -> bool:
        return all(m <= 2 for m in self.classes.multiplicities)

    # -- serialization ------------------------------------------------------

    def to_document(self) -> ColoringDocument:
        return ColoringDocument(n=self.n, matrix=self.rows)

    def to_json(self) -> str:
        return json.dumps(self.to_document().model_dump(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_document(cls, doc: ColoringDocument) -> "Coloring":
        return cls(doc.matrix)

    @classmethod
    def from_json(cls, text: str) -> "Coloring":
        try:
            doc = ColoringDocument.model_validate_json(text)
        except ValidationError as e:
            raise InputError(f"malformed coloring document: {e.errors()[0]['msg']}") from e
        return cls.from_document(doc)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Coloring) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self) -> int:
        return hash((self.n, self.matrix.tobytes()))

    def __repr__(self) -> str:
        return f"Coloring(n={self.n}, palette={self.palette_size})"


class BaseSubgraph(BaseModel):
    """A (not necessarily induced) subgraph of K_{n,n}: vertex sets on both sides plus edges."""

    model_config = ConfigDict(frozen=True)

    a_vertices: FrozenSet[int] = frozenset()
    b_vertices: FrozenSet[int] = frozenset()
    edges: FrozenSet[Cell] = frozenset()

    @model_validator(mode="after")
    def _edges_inside(self) -> "BaseSubgraph":
        for i, j in self.edges:
            if i not in self.a_vertices or j not in self.b_vertices:
                raise ValueError(f"edge ({i}, {j}) has an endpoint outside the vertex sets")
        return self

    @classmethod
    def from_edges(cls, edges: Iterable[Cell]) -> "BaseSubgraph":
        edge_set = frozenset((int(i), int(j)) for i, j in edges)
        return cls(
            a_vertices=frozenset(i for i, _ in edge_set),
            b_vertices=frozenset(j for _, j in edge_set),
            edges=edge_set,
        )

    def with_parts(self, a_vertices: Iterable[int] = (), b_vertices: Iterable[int] = (),
                   edges: Iterable[Cell] = ()) -> "BaseSubgraph":
        edge_set = frozenset(edges)
        return BaseSubgraph(
            a_vertices=self.a_vertices | frozenset(a_vertices) | {i for i, _ in edge_set},
            b_vertices=self.b_vertices | frozenset(b_vertices) | {j for _, j in edge_set},
            edges=self.edges | edge_set,
        )

    def union(self, other: "BaseSubgraph") -> "BaseSubgraph":
        return self.with_parts(other.a_vertices, other.b_vertices, other.edges)

    def colors(self, coloring: Coloring) -> Set[int]:
        rows = coloring.rows
        return {rows[i][j] for i, j in self.edges}

    def repetitions(self, coloring: Coloring) -> int:
        return len(self.edges) - len(self.colors(coloring))


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def iter_copies(n: int, s: int, t: int) -> Iterator[Subcopy]:
    """All copies of K_{s,t} in lexicographic order, s-side in A first"""
    for side_a in combinations(range(n), s):
        for side_b in combinations(range(n), t):
            yield Subcopy(side_a=side_a, side_b=side_b, s_side="A")
    if s != t:
        for side_b in combinations(range(n), s):
            for side_a in combinations(range(n), t):
                yield Subcopy(side_a=side_a, side_b=side_b, s_side="B")


def color_repetitions(coloring: Coloring, copy: Subcopy) -> int:
    """|E(F)| minus the number of distinct colors on the induced copy F"""
    colors = coloring.copy_colors(copy)
    return len(copy.side_a) * len(copy.side_b) - len(colors)


def max_monochromatic_star(coloring: Coloring) -> StarWitness:
    """Largest number of equal-colored edges at one vertex, A-side rows scanned first"""
    rows = coloring.rows
    n = coloring.n
    best: Optional[StarWitness] = None
    for side in ("A", "B"):
        for v in range(n):
            line = rows[v] if side == "A" else [rows[i][v] for i in range(n)]
            color, size = Counter(line).most_common(1)[0]
            if best is None or size > best.size:
                leaves = [u for u, c in enumerate(line) if c == color]
                best = StarWitness(size=size, side=side, center=v, leaves=leaves, color=color)
    return best


def color_class_graph(coloring: Coloring, color: int) -> nx.Graph:
    """The spanning subgraph of one color class, nodes tagged ("A", i) / ("B", j)"""
    if not 0 <= color < coloring.palette_size:
        raise InputError(f"unknown color {color} (palette size {coloring.palette_size})")
    graph = nx.Graph()
    for i, j in coloring.classes.classes[color]:
        graph.add_node(("A", i), bipartite=0)
        graph.add_node(("B", j), bipartite=1)
        graph.add_edge(("A", i), ("B", j))
    return graph


def _class_adjacency(cells: List[Cell]) -> Tuple[Dict[int, List[int]], Dict[int, List[int]]]:
    a_nbrs: Dict[int, List[int]] = defaultdict(list)
    b_nbrs: Dict[int, List[int]] = defaultdict(list)
    for i, j in cells:
        a_nbrs[i].append(j)
        b_nbrs[j].append(i)
    return a_nbrs, b_nbrs


def _max_matching(graph: nx.Graph) -> List[Cell]:
    top = [v for v in graph if v[0] == "A"]
    matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=top)
    return sorted((u[1], v[1]) for u, v in matching.items() if u[0] == "A")


def _scan_class(coloring: Coloring, color: int, pattern: Pattern) -> Optional[List[Cell]]:
    cells = coloring.classes.classes[color]
    a_nbrs, b_nbrs = _class_adjacency(cells)
    kind, params = pattern.kind, pattern.params

    if kind == "star":
        k = params[0]
        for i in sorted(a_nbrs):
            if len(a_nbrs[i]) >= k:
                return [(i, j) for j in a_nbrs[i][:k]]
        for j in sorted(b_nbrs):
            if len(b_nbrs[j]) >= k:
                return [(i, j) for i in b_nbrs[j][:k]]
        return None

    if kind == "matching":
        if len(cells) < params[0]:
            return None
        matching = _max_matching(color_class_graph(coloring, color))
        return matching[:params[0]] if len(matching) >= params[0] else None

    if kind == "double_star":
        k1, k2 = params
        for i, j in cells:
            for ka, kb in ((k1, k2), (k2, k1)):
                if len(a_nbrs[i]) - 1 >= ka and len(b_nbrs[j]) - 1 >= kb:
                    leaves_b = [x for x in a_nbrs[i] if x != j][:ka]
                    leaves_a = [x for x in b_nbrs[j] if x != i][:kb]
                    return [(i, j)] + [(i, x) for x in leaves_b] + [(x, j) for x in leaves_a]
        return None

    if kind == "biclique":
        a, b = params
        # a vertices on one side sharing b neighbors on the other
        for swapped in (False, True):
            nbrs = b_nbrs if swapped else a_nbrs
            candidates = sorted(v for v in nbrs if len(nbrs[v]) >= b)
            for group in combinations(candidates, a):
                common = set(nbrs[group[0]]).intersection(*(nbrs[v] for v in group[1:]))
                if len(common) >= b:
                    other = sorted(common)[:b]
                    if swapped:
                        return sorted((x, v) for v in group for x in other)
                    return sorted((v, x) for v in group for x in other)
            if a == b:
                break
        return None

    # even_cycle
    from app.energy.detectors import find_even_cycle

    result = find_even_cycle(color_class_graph(coloring, color), params[0])
    if result.status == "unknown":
        logger.warning(f"even cycle search on color {color} ran out of budget")
    if result.status != "found":
        return None
    return sorted((u[1], v[1]) if u[0] == "A" else (v[1], u[1]) for u, v in result.witness_edges)


def mono_pattern_scan(coloring: Coloring, pattern: Pattern) -> Optional[PatternWitness]:
    """First monochromatic occurrence of the pattern, scanning color classes in id order"""
    for color in range(coloring.palette_size):
        edges = _scan_class(coloring, color, pattern)
        if edges is not None:
            return PatternWitness(pattern=pattern, color=color, edges=edges)
    return None


def color_class_cover_number(coloring: Coloring, color: int) -> int:
    """Minimum vertex cover of a color class, via maximum matching (König)"""
    return len(_max_matching(color_class_graph(coloring, color)))


def color_incidence_graph(coloring: Coloring, side: Side) -> nx.Graph:
    """Bipartite graph joining each vertex of one side to every color it touches"""
    if side not in ("A", "B"):
        raise InputError(f"side must be 'A' or 'B', got {side!r}")
    rows = coloring.rows
    n = coloring.n
    graph = nx.Graph()
    graph.add_nodes_from(((side, u) for u in range(n)), bipartite=0)
    graph.add_nodes_from((("C", c) for c in range(coloring.palette_size)), bipartite=1)
    for u in range(n):
        line = rows[u] if side == "A" else [rows[i][u] for i in range(n)]
        graph.add_edges_from(((side, u), ("C", c)) for c in set(line))
    return graph
