"""
Checking (K_{s,t}, q)-colorings.

Copies are scanned s-side first: for each s-subset S the columns are folded
into color bitmasks, then t-subsets are grown in lexicographic order and a
branch is dropped as soon as it already shows too many colors.
"""

import logging
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel

from app.core import Coloring, PatternSpec, Subcopy
from app.errors import InputError, PreconditionError
from config import JOBS

logger = logging.getLogger(__name__)

VALID = "Valid"
VIOLATION = "Violation"
VACUOUSLY_VALID = "VacuouslyValid"


class VerificationReport(BaseModel):
    status: str
    spec: PatternSpec
    witness: Optional[Subcopy] = None
    observed: Optional[int] = None
    copies_checked: int = 0

    @property
    def ok(self) -> bool:
        return self.status != VIOLATION


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


def _scan_chunk(rows: List[List[int]], s_side: str, subsets: Sequence[Tuple[int, ...]], t: int,
                bound: int) -> Tuple[int, Optional[Subcopy], int]:
    """Fewest colors below `bound` over copies whose s-side is one of `subsets`"""
    n = len(rows)
    best = bound
    witness: Optional[Subcopy] = None
    leaves = 0

    for s_set in subsets:
        col_mask = [0] * n
        for i in s_set:
            row = rows[i]
            for j in range(n):
                col_mask[j] |= 1 << row[j]
        chosen: List[int] = []

        def grow(start: int, mask: int) -> None:
            nonlocal best, witness, leaves
            if len(chosen) == t:
                leaves += 1
                count = _popcount(mask)
                if count < best:
                    best = count
                    if s_side == "A":
                        witness = Subcopy(side_a=s_set, side_b=tuple(chosen), s_side="A")
                    else:
                        witness = Subcopy(side_a=tuple(chosen), side_b=s_set, s_side="B")
                return
            for j in range(start, n - (t - len(chosen)) + 1):
                merged = mask | col_mask[j]
                if _popcount(merged) >= best:
                    continue
                chosen.append(j)
                grow(j + 1, merged)
                chosen.pop()

        grow(0, 0)
    return best, witness, leaves


def _orientations(coloring: Coloring, s: int, t: int) -> List[Tuple[List[List[int]], str]]:
    orient = [(coloring.rows, "A")]
    if s != t:
        orient.append((coloring.matrix.T.tolist(), "B"))
    return orient


def _min_colors(coloring: Coloring, s: int, t: int, bound: int, jobs: int) -> Tuple[int, Optional[Subcopy], int]:
    subsets = list(combinations(range(coloring.n), s))
    # contiguous chunks keep the scan order, so ties resolve to the earliest chunk
    chunks = [subsets]
    if jobs > 1 and len(subsets) > 1:
        chunks = [[subsets[k] for k in part] for part in np.array_split(np.arange(len(subsets)), jobs) if len(part)]
    tasks = [(rows, side, chunk) for rows, side in _orientations(coloring, s, t) for chunk in chunks]

    if jobs > 1 and len(tasks) > 1:
        results = Parallel(n_jobs=jobs)(delayed(_scan_chunk)(rows, side, chunk, t, bound) for rows, side, chunk in tasks)
    else:
        results = [_scan_chunk(rows, side, chunk, t, bound) for rows, side, chunk in tasks]

    best, witness, leaves = bound, None, 0
    for count, found, checked in results:
        leaves += checked
        if found is not None and count < best:
            best, witness = count, found
    return best, witness, leaves


def verify(coloring: Coloring, spec: PatternSpec, jobs: int = JOBS) -> VerificationReport:
    """Valid iff every copy of K_{s,t}, in both orientations, spans at least q colors"""
    s, t, q = spec.s, spec.t, spec.q
    if coloring.n < t:
        return VerificationReport(status=VACUOUSLY_VALID, spec=spec)
    count, witness, leaves = _min_colors(coloring, s, t, q, jobs)
    if witness is None:
        return VerificationReport(status=VALID, spec=spec, copies_checked=leaves)
    logger.debug(f"violation of {spec} at {witness}: {count} colors")
    return VerificationReport(status=VIOLATION, spec=spec, witness=witness, observed=count, copies_checked=leaves)


def min_colors_over_copies(coloring: Coloring, s: int, t: int, jobs: int = JOBS) -> Tuple[int, Subcopy]:
    """Minimum distinct-color count over all copies, with the first copy attaining it"""
    if not 1 <= s <= t:
        raise InputError(f"need 1 <= s <= t, got s={s}, t={t}")
    if t > coloring.n:
        raise InputError(f"t={t} exceeds n={coloring.n}")
    count, witness, _ = _min_colors(coloring, s, t, s * t + 1, jobs)
    return count, witness


def pairing_max_repetitions(coloring: Coloring, s: int, t: int) -> int:
    """Most color pairs that fit together in one copy of K_{s,t} of a pairing coloring"""
    if not coloring.is_pairing():
        worst = max(coloring.classes.multiplicities)
        raise PreconditionError(f"not a pairing coloring: a color class has {worst} edges")
    if not 1 <= s <= t:
        raise InputError(f"need 1 <= s <= t, got s={s}, t={t}")
    if t > coloring.n:
        raise InputError(f"t={t} exceeds n={coloring.n}")

    pairs = []
    for cells in coloring.classes.classes:
        if len(cells) == 2:
            (i1, j1), (i2, j2) = cells
            pairs.append(((1 << i1) | (1 << i2), (1 << j1) | (1 << j2)))

    best = 0
    for row_cap, col_cap in {(s, t), (t, s)}:
        def search(k: int, rows: int, cols: int, count: int) -> None:
            nonlocal best
            if count + len(pairs) - k <= best:
                return
            if k == len(pairs):
                best = count
                return
            row_mask, col_mask = pairs[k]
            merged_rows, merged_cols = rows | row_mask, cols | col_mask
            if _popcount(merged_rows) <= row_cap and _popcount(merged_cols) <= col_cap:
                search(k + 1, merged_rows, merged_cols, count + 1)
            search(k + 1, rows, cols, count)

        search(0, 0, 0, 0)
    return best
