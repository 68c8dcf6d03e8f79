"""
Exact values of r(K_{n,n}, K_{s,t}, q) for tiny n by backtracking.

Cells are colored in row-major order. A color id is introduced only as
(current max) + 1, and a branch dies as soon as some copy already holds more
than st - q repetitions among its colored cells.
"""

import logging
import time
from itertools import permutations
from math import comb
from typing import Dict, List, Literal, Optional, Set, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, model_validator

from app.core import Coloring, ColoringDocument, PatternSpec, iter_copies
from app.errors import InputError, ResourceError
from config import COPY_LIMIT, JOBS, NODE_LIMIT, TIME_LIMIT

logger = logging.getLogger(__name__)

CANONICAL_MAX_N = 4


class SearchBudget(BaseModel):
    node_limit: int = NODE_LIMIT
    time_limit: float = TIME_LIMIT
    mode: Literal["decide", "minimize"] = "decide"

    @model_validator(mode="after")
    def _positive(self) -> "SearchBudget":
        if self.node_limit <= 0 or self.time_limit <= 0:
            raise ValueError("search limits must be positive")
        return self


class Feasibility(BaseModel):
    status: Literal["yes", "no", "unknown"]
    colors: int
    witness: Optional[ColoringDocument] = None
    nodes: int = 0
    cache_hits: int = 0
    elapsed: float = 0.0


class SearchStats(BaseModel):
    nodes: int = 0
    elapsed: float = 0.0
    cache_hits: int = 0
    feasible_calls: int = 0

    def absorb(self, result: Feasibility) -> None:
        self.nodes += result.nodes
        self.elapsed += result.elapsed
        self.cache_hits += result.cache_hits
        self.feasible_calls += 1


class ExactResult(BaseModel):
    n: int
    spec: PatternSpec
    status: Literal["Exact", "LowerBoundOnly", "UpperBoundOnly", "Bracket"]
    value: Optional[int] = None
    lo: int
    hi: int
    witness: Optional[ColoringDocument] = None
    stats: SearchStats = SearchStats()

    @model_validator(mode="after")
    def _consistent(self) -> "ExactResult":
        if self.lo > self.hi:
            raise ValueError(f"lower bound {self.lo} exceeds upper bound {self.hi}")
        if self.status == "Exact" and (self.lo != self.hi or self.value != self.lo or self.witness is None):
            raise ValueError("an exact result needs lo == hi == value and a witness")
        return self

    def witness_coloring(self) -> Optional[Coloring]:
        return Coloring.from_document(self.witness) if self.witness else None


class _Exhausted(Exception):
    pass


def _copy_cells(n: int, spec: PatternSpec) -> List[Tuple[int, ...]]:
    s, t = spec.s, spec.t
    total = comb(n, s) * comb(n, t) * (1 if s == t else 2)
    if total > COPY_LIMIT:
        raise ResourceError(f"{total} copies of K_{{{s},{t}}} exceed the limit {COPY_LIMIT}")
    return [tuple(sorted(i * n + j for i, j in copy.cells())) for copy in iter_copies(n, s, t)]


def _checks_by_cell(n: int, spec: PatternSpec) -> List[List[Tuple[int, ...]]]:
    """checks[k]: distinct prefixes (cells <= k) of copies through k that could already overflow"""
    need = spec.allowed_repetitions + 2
    checks: List[Set[Tuple[int, ...]]] = [set() for _ in range(n * n)]
    for cells in _copy_cells(n, spec):
        for pos, k in enumerate(cells):
            if pos + 1 >= need:
                checks[k].add(cells[: pos + 1])
    return [sorted(group) for group in checks]


def _canonical_rows(assigned: List[List[int]], n: int) -> Tuple[int, ...]:
    """Least first-occurrence relabeling over row and column permutations"""
    best = None
    for row_order in permutations(range(len(assigned))):
        for col_order in permutations(range(n)):
            seen: Dict[int, int] = {}
            key = tuple(seen.setdefault(assigned[i][j], len(seen)) for i in row_order for j in col_order)
            if best is None or key < best:
                best = key
    return best


def feasible(n: int, spec: PatternSpec, c: int, budget: Optional[SearchBudget] = None) -> Feasibility:
    """Is there a coloring of K_{n,n} with at most c colors where every copy sees q colors?"""
    budget = budget or SearchBudget()
    if n < 1:
        raise InputError(f"n must be positive, got {n}")
    if not 1 <= c <= n * n:
        raise InputError(f"palette size must lie in [1, n^2 = {n * n}], got {c}")

    allowed = spec.allowed_repetitions
    checks = _checks_by_cell(n, spec) if n >= spec.t else [[] for _ in range(n * n)]
    cells = [0] * (n * n)
    seen_keys: Set[Tuple[int, ...]] = set()
    use_canonical = n <= CANONICAL_MAX_N
    state = {"nodes": 0, "hits": 0}
    start = time.monotonic()

    def tick() -> None:
        state["nodes"] += 1
        if state["nodes"] > budget.node_limit:
            raise _Exhausted()
        if state["nodes"] % 4096 == 0 and time.monotonic() - start > budget.time_limit:
            raise _Exhausted()

    def overflows(k: int) -> bool:
        for prefix in checks[k]:
            if len(prefix) - len({cells[x] for x in prefix}) > allowed:
                return True
        return False

    def place(k: int, used: int) -> bool:
        if k == n * n:
            return True
        if use_canonical and k % n == 0 and 0 < k < n * (n - 1) + 1:
            rows_done = k // n
            key = _canonical_rows([cells[i * n:(i + 1) * n] for i in range(rows_done)], n)
            if key in seen_keys:
                state["hits"] += 1
                return False
            seen_keys.add(key)
        for color in range(min(used + 1, c)):
            tick()
            cells[k] = color
            if overflows(k):
                continue
            if place(k + 1, max(used, color + 1)):
                return True
        return False

    try:
        found = place(0, 0)
    except _Exhausted:
        elapsed = time.monotonic() - start
        logger.warning(f"feasible(n={n}, {spec}, c={c}) ran out of budget after {state['nodes']} nodes")
        return Feasibility(status="unknown", colors=c, nodes=state["nodes"], cache_hits=state["hits"],
                           elapsed=elapsed)

    elapsed = time.monotonic() - start
    witness = None
    if found:
        witness = Coloring.from_matrix(np.array(cells).reshape(n, n)).to_document()
    return Feasibility(status="yes" if found else "no", colors=c, witness=witness, nodes=state["nodes"],
                       cache_hits=state["hits"], elapsed=elapsed)


def _seed(n: int, spec: PatternSpec) -> int:
    """Largest closed-form value that applies, used only as the scan's first candidate"""
    from app.bounds import exact_formulas, star_lower_bound

    values = [spec.q] + list(exact_formulas(n, spec.s, spec.t, spec.q).values())
    if spec.s == 1 and 2 * spec.q <= spec.t + 1:
        values.append(star_lower_bound(n, spec.t, spec.q))
    return max(spec.q, min(max(values), n * n))


def _check_window(n: int, spec: PatternSpec, candidates: List[int], budget: SearchBudget,
           jobs: int) -> List[Feasibility]:
    if jobs > 1 and len(candidates) > 1:
        return Parallel(n_jobs=jobs)(delayed(feasible)(n, spec, c, budget) for c in candidates)
    return [feasible(n, spec, c, budget) for c in candidates]


def exact_r(n: int, spec: PatternSpec, budget: Optional[SearchBudget] = None, jobs: int = JOBS) -> ExactResult:
    """Scan up from the closed-form seed to the first feasible palette, then down to the first infeasible one.

    With ``budget.mode == "decide"`` the downward scan is skipped, so the result is
    Exact only when the upward scan already closed the bracket.
    """
    budget = budget or SearchBudget(mode="minimize")
    if n < 1:
        raise InputError(f"n must be positive, got {n}")
    stats = SearchStats()
    if n < spec.t:
        witness = Coloring(np.zeros((n, n), dtype=np.int64)).to_document()
        return ExactResult(n=n, spec=spec, status="Exact", value=1, lo=1, hi=1, witness=witness, stats=stats)

    # any copy needs q colors; the rainbow coloring meets every q <= st
    lo = spec.q
    hi = n * n
    witness = Coloring(np.arange(n * n).reshape(n, n)).to_document()
    step = max(1, jobs)

    c = _seed(n, spec)
    while c < hi:
        window = list(range(c, min(c + step, hi)))
        for result in _check_window(n, spec, window, budget, jobs):
            stats.absorb(result)
            if result.status == "yes":
                hi, witness = result.colors, result.witness
                break
            if result.status == "no":
                lo = max(lo, result.colors + 1)
        else:
            c = window[-1] + 1
            continue
        break

    # decide mode stops at the first feasible palette of the upward scan
    c = hi - 1
    descending = budget.mode == "minimize"
    while descending and c >= lo:
        window = list(range(c, max(lo, c - step + 1) - 1, -1))
        for result in _check_window(n, spec, window, budget, jobs):
            stats.absorb(result)
            if result.status == "yes":
                hi, witness = result.colors, result.witness
            elif result.status == "no":
                lo = max(lo, result.colors + 1)
                descending = False
                break
            else:
                descending = False
                break
        c = window[-1] - 1

    if lo == hi:
        status, value = "Exact", lo
    elif lo > spec.q and hi < n * n:
        status, value = "Bracket", None
    elif hi < n * n:
        status, value = "UpperBoundOnly", None
    elif lo > spec.q:
        status, value = "LowerBoundOnly", None
    else:
        status, value = "Bracket", None
    logger.info(f"r({n}, {spec.s}, {spec.t}, {spec.q}): {status} [{lo}, {hi}] after {stats.feasible_calls} calls")
    return ExactResult(n=n, spec=spec, status=status, value=value, lo=lo, hi=hi, witness=witness, stats=stats)
