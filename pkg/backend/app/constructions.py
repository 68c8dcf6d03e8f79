"""
Explicit colorings of K_{n,n}, each tagged with the (s, t, q) guarantee it claims.

Fresh-color constructions start from a rainbow matrix, merge the cells that
must share a color and let Coloring.from_matrix compact the palette.
"""

import logging
import math
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from app.core import Cell, Coloring, PatternSpec, make_spec
from app.errors import InputError
from app.hypergraph import build_split_hypergraph, default_ell, pairing_cells
from config import DEFAULT_SEED

logger = logging.getLogger(__name__)


class Provenance(BaseModel):
    name: str
    params: Dict[str, Any]
    seed: Optional[int] = None


class ConstructionResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    coloring: Coloring
    claimed_spec: Optional[PatternSpec] = None
    claimed_palette: int
    provenance: Provenance
    details: Dict[str, Any] = {}
    flags: List[str] = []

    @model_validator(mode="after")
    def _palette_matches(self) -> "ConstructionResult":
        if self.coloring.palette_size != self.claimed_palette:
            raise ValueError(
                f"{self.provenance.name}: palette {self.coloring.palette_size} != claimed {self.claimed_palette}"
            )
        return self

    def to_document(self) -> dict:
        claim = None
        if self.claimed_spec is not None:
            claim = {**self.claimed_spec.model_dump(), "palette": self.claimed_palette}
        return {
            "coloring": self.coloring.to_document().model_dump(),
            "claim": claim,
            "provenance": self.provenance.model_dump(),
            "details": self.details,
            "flags": self.flags,
        }


def _result(name: str, coloring: Coloring, spec: Optional[PatternSpec], palette: int,
            params: Dict[str, Any], seed: Optional[int] = None, **extra) -> ConstructionResult:
    return ConstructionResult(coloring=coloring, claimed_spec=spec, claimed_palette=palette,
                              provenance=Provenance(name=name, params=params, seed=seed), **extra)


def _merge_pairs(n: int, pairs: Sequence[Tuple[Cell, Cell]]) -> Coloring:
    raw = np.arange(n * n, dtype=np.int64).reshape(n, n)
    for first, second in pairs:
        raw[second] = raw[first]
    return Coloring.from_matrix(raw)


def _check_n(n: int, minimum: int = 1) -> None:
    if n < minimum:
        raise InputError(f"n must be at least {minimum}, got {n}")


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------

def rainbow(n: int) -> Coloring:
    _check_n(n)
    return Coloring(np.arange(n * n).reshape(n, n))


def monochromatic(n: int) -> Coloring:
    _check_n(n)
    return Coloring(np.zeros((n, n), dtype=np.int64))


# ---------------------------------------------------------------------------
# Block-cyclic constructions for stars
# ---------------------------------------------------------------------------

def block_cyclic(n: int, part_sizes_a: Sequence[int], part_sizes_b: Sequence[int]) -> Coloring:
    """Edges between the i-th A part and the j-th B part get color (i + j + 1) mod k"""
    k = len(part_sizes_a)
    if k == 0 or k != len(part_sizes_b):
        raise InputError(f"need equally many nonempty part lists, got {len(part_sizes_a)} and {len(part_sizes_b)}")
    if any(p < 1 for p in part_sizes_a) or any(p < 1 for p in part_sizes_b):
        raise InputError("part sizes must be positive")
    if sum(part_sizes_a) != n or sum(part_sizes_b) != n:
        raise InputError(f"part sizes must sum to n={n}, got {sum(part_sizes_a)} and {sum(part_sizes_b)}")
    row_part = np.repeat(np.arange(k), part_sizes_a)
    col_part = np.repeat(np.arange(k), part_sizes_b)
    return Coloring((row_part[:, None] + col_part[None, :] + 1) % k)


def _star_result(name: str, n: int, t: int, q: int, parts: List[int]) -> ConstructionResult:
    coloring = block_cyclic(n, parts, parts)
    return _result(name, coloring, make_spec(1, t, q), len(parts), {"n": n, "t": t, "q": q},
                   details={"part_sizes": parts})


def star_upper_i(n: int, t: int, q: int) -> ConstructionResult:
    """ceil(n / floor((t-1)/(q-1))) colors, every K_{1,t} sees q of them"""
    _check_n(n)
    if not (q >= 2 and 2 * q <= t + 1):
        raise InputError(f"need 2 <= q <= (t+1)/2, got t={t}, q={q}")
    ell = (t - 1) // (q - 1)
    if ell >= n:
        parts = [n]
    else:
        k = math.ceil(n / ell)
        parts = [ell] * (k - 1) + [n - (k - 1) * ell]
    return _star_result("star_upper_i", n, t, q, parts)


def star_upper_ii(n: int, t: int, q: int) -> ConstructionResult:
    """n - t + q colors: t - q doubled parts, then singletons"""
    _check_n(n)
    if not (2 * q >= t + 2 and q <= t):
        raise InputError(f"need (t+2)/2 <= q <= t, got t={t}, q={q}")
    if n < 2 * (t - q):
        raise InputError(f"need n >= 2(t-q) = {2 * (t - q)}, got n={n}")
    parts = [2] * (t - q) + [1] * (n - 2 * (t - q))
    return _star_result("star_upper_ii", n, t, q, parts)


def star_upper_refined(n: int, t: int, q: int) -> ConstructionResult:
    """ceil((n-t+1)/floor((t-1)/(q-1))) + q - 1 colors when (q-1) does not divide (t-1)"""
    if not 2 <= q <= t:
        raise InputError(f"need 2 <= q <= t, got t={t}, q={q}")
    if (t - 1) % (q - 1) == 0:
        raise InputError(f"(q-1) divides (t-1) for t={t}, q={q}; use star_upper_i")
    if n < t:
        raise InputError(f"need n >= t, got n={n}, t={t}")
    ell = (t - 1) // (q - 1)
    m = (t - 1) % (q - 1)
    k = math.ceil((n - t + 1) / ell) + q - 1
    last = n - (k - 1) * ell - m
    parts = [ell + 1] * m + [ell] * (k - 1 - m) + [last]
    return _star_result("star_upper_refined", n, t, q, parts)


# ---------------------------------------------------------------------------
# Near-rainbow constructions
# ---------------------------------------------------------------------------

def _check_pair_shape(s: int, t: int) -> None:
    if not 2 <= s <= t:
        raise InputError(f"need 2 <= s <= t, got s={s}, t={t}")


def near_rainbow_pairs(n: int, s: int = 2, t: int = 2) -> ConstructionResult:
    """Diagonal cells (2i, 2i) and (2i+1, 2i+1) share a color, every other cell is fresh"""
    _check_n(n, 2)
    _check_pair_shape(s, t)
    pairs = [((2 * i, 2 * i), (2 * i + 1, 2 * i + 1)) for i in range(n // 2)]
    return _result("near_rainbow_pairs", _merge_pairs(n, pairs), make_spec(s, t, s * t - s // 2),
                   n * n - n // 2, {"n": n, "s": s, "t": t}, details={"pairs": len(pairs)})


def near_rainbow_pairs_odd(n: int, s: int = 2, t: int = 2) -> ConstructionResult:
    """Odd n: the diagonal pairs plus the crossed pair (0, n-1) ~ (n-1, 0)"""
    if n < 3 or n % 2 == 0:
        raise InputError(f"n must be odd and at least 3, got {n}")
    _check_pair_shape(s, t)
    pairs = [((2 * i, 2 * i), (2 * i + 1, 2 * i + 1)) for i in range(n // 2)]
    pairs.append(((0, n - 1), (n - 1, 0)))
    # the crossed pair shares row 0 and column 0 with the first diagonal pair
    q = s * t - math.ceil(s / 2)
    return _result("near_rainbow_pairs_odd", _merge_pairs(n, pairs), make_spec(s, t, q),
                   n * n - math.ceil(n / 2), {"n": n, "s": s, "t": t}, details={"pairs": len(pairs)})


K89_OFFSETS: List[Tuple[Cell, Cell]] = [
    ((0, 0), (1, 2)),
    ((0, 1), (2, 3)),
    ((3, 4), (5, 5)),
    ((4, 4), (6, 6)),
]


def k89_block(n: int) -> ConstructionResult:
    """Four merged color pairs per complete 7-block; trailing vertices stay rainbow"""
    _check_n(n, 7)
    blocks = n // 7
    pairs = [
        ((o + a[0], o + a[1]), (o + b[0], o + b[1]))
        for o in range(0, 7 * blocks, 7)
        for a, b in K89_OFFSETS
    ]
    return _result("k89_block", _merge_pairs(n, pairs), make_spec(8, 9, 68), n * n - 4 * blocks,
                   {"n": n}, details={"blocks": blocks})


# ---------------------------------------------------------------------------
# Hypergraph pairing construction
# ---------------------------------------------------------------------------

def hypergraph_coloring(n: int, s: int, t: int, ell: Optional[int] = None,
                        density_target: Optional[int] = None, seed: int = DEFAULT_SEED) -> ConstructionResult:
    """Pairing coloring from a sparse linear 4-uniform hypergraph split 2+2 across the sides"""
    ell = default_ell(s, t) if ell is None else ell
    split = build_split_hypergraph(n, s, t, ell, density_target, seed)
    pairs = pairing_cells(split)
    flags = list(split.flags)
    if not pairs:
        flags.append("degenerate")
        logger.warning(f"⚠️ no hyperedge survived for n={n}, s={s}, t={t}; emitting rainbow")
    details = {
        "sampled": split.sampled,
        "surviving": len(split.surviving),
        "linear": len(split.linear),
        "split": len(split.split),
        "attempts": split.attempts,
        "hyperedges": [list(edge) for edge in split.split],
        "side_a": split.side_a,
    }
    params = {"n": n, "s": s, "t": t, "ell": ell, "density_target": density_target}
    return _result("hypergraph_coloring", _merge_pairs(n, pairs), make_spec(s, t, s * t - ell),
                   n * n - len(pairs), params, seed=seed, details=details, flags=flags)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

def _baseline(name: str, build: Callable[[int], Coloring]) -> Callable[..., ConstructionResult]:
    def wrapped(n: int, **_: Any) -> ConstructionResult:
        coloring = build(n)
        return _result(name, coloring, None, coloring.palette_size, {"n": n})
    return wrapped


def _block_cyclic_result(n: int, parts_a: Sequence[int], parts_b: Optional[Sequence[int]] = None,
                         **_: Any) -> ConstructionResult:
    parts_b = list(parts_a) if parts_b is None else list(parts_b)
    coloring = block_cyclic(n, parts_a, parts_b)
    return _result("block_cyclic", coloring, None, coloring.palette_size,
                   {"n": n, "parts_a": list(parts_a), "parts_b": parts_b})


CONSTRUCTIONS: Dict[str, Callable[..., ConstructionResult]] = {
    "rainbow": _baseline("rainbow", rainbow),
    "monochromatic": _baseline("monochromatic", monochromatic),
    "block_cyclic": _block_cyclic_result,
    "star_upper_i": lambda n, t, q, **_: star_upper_i(n, t, q),
    "star_upper_ii": lambda n, t, q, **_: star_upper_ii(n, t, q),
    "star_upper_refined": lambda n, t, q, **_: star_upper_refined(n, t, q),
    "near_rainbow_pairs": lambda n, s=2, t=2, **_: near_rainbow_pairs(n, s, t),
    "near_rainbow_pairs_odd": lambda n, s=2, t=2, **_: near_rainbow_pairs_odd(n, s, t),
    "k89_block": lambda n, **_: k89_block(n),
    "hypergraph_coloring": lambda n, s, t, ell=None, density_target=None, seed=DEFAULT_SEED, **_:
        hypergraph_coloring(n, s, t, ell, density_target, seed),
}


def construct(name: str, **params: Any) -> ConstructionResult:
    if name not in CONSTRUCTIONS:
        raise InputError(f"unknown construction {name!r}; choose from {', '.join(sorted(CONSTRUCTIONS))}")
    try:
        return CONSTRUCTIONS[name](**params)
    except TypeError as e:
        raise InputError(f"{name}: {e}") from e
