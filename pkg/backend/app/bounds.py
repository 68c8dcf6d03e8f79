"""
Closed-form bounds on r(K_{n,n}, K_{s,t}, q) and the set-family lemmas behind them.

Everything is evaluated with Fraction / big-integer arithmetic; floats appear
only where a real root is taken.
"""

import logging
import math
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, Iterator, List, Optional, Set, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, model_validator

from app.errors import InputError
from config import JOBS

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

class SetFamilyInstance(BaseModel):
    universe: int
    sets: List[List[int]]
    a: int
    ell: int
    r: int = 2

    @model_validator(mode="after")
    def _check_arity(self) -> "SetFamilyInstance":
        if not 2 <= self.r <= len(self.sets):
            raise ValueError(f"need 2 <= r <= m = {len(self.sets)}, got r={self.r}")
        if self.a < 1 or self.ell < 0:
            raise ValueError("need a >= 1 and ell >= 0")
        return self


class CorradiReport(BaseModel):
    hypotheses_ok: bool
    sizes_ok: bool
    intersections_ok: bool
    max_intersection: int
    bound: float
    union_size: int
    satisfied: Optional[bool] = None
    identity_ok: bool


class BoundEntry(BaseModel):
    name: str
    kind: str  # "lower" | "upper" | "exact" | "threshold"
    exponent: Optional[float] = None
    exact_exponent: Optional[str] = None
    formula: str
    source: str


class BoundReport(BaseModel):
    s: int
    t: int
    q: int
    regions: List[str] = []
    entries: List[BoundEntry] = []


def _entry(name: str, kind: str, exponent, formula: str, source: str) -> BoundEntry:
    if exponent is None:
        return BoundEntry(name=name, kind=kind, formula=formula, source=source)
    exponent = Fraction(exponent)
    return BoundEntry(name=name, kind=kind, exponent=float(exponent), exact_exponent=str(exponent),
                      formula=formula, source=source)


# ---------------------------------------------------------------------------
# Elementary formulas
# ---------------------------------------------------------------------------

def _binom(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


def general_upper_exponent(s: int, t: int, q: int) -> Fraction:
    """Exponent of the general upper bound O(n^{(s+t-2)/(st-q+1)})"""
    if s < 1 or t < 1 or not 2 <= q <= s * t:
        raise InputError(f"need 2 <= q <= st, got s={s}, t={t}, q={q}")
    return Fraction(s + t - 2, s * t - q + 1)


def corradi_bound(a: int, m: int, ell: int) -> Fraction:
    """a^2 m / (a + (m-1) ell): union size of m sets of size >= a, pairwise meeting in <= ell"""
    if a < 1 or m < 1 or ell < 0:
        raise InputError(f"need a, m >= 1 and ell >= 0, got a={a}, m={m}, ell={ell}")
    return Fraction(a * a * m, a + (m - 1) * ell)


def _gen_corradi_ratio(a: int, m: int, ell: int, r: int) -> Fraction:
    if a < 1 or ell < 0:
        raise InputError(f"need a >= 1 and ell >= 0, got a={a}, ell={ell}")
    if not 2 <= r <= m:
        raise InputError(f"need 2 <= r <= m, got r={r}, m={m}")
    falling = math.perm(m - 1, r - 1)
    return Fraction(a ** r * m ** (r - 1), a * (m ** (r - 1) - falling) + falling * ell)


def gen_corradi_bound(a: int, m: int, ell: int, r: int) -> float:
    """Union lower bound when every r of the m sets meet in at most ell elements"""
    ratio = _gen_corradi_ratio(a, m, ell, r)
    if r == 2:
        return float(ratio)
    return float(ratio) ** (1.0 / (r - 1))


def zarankiewicz_upper(m: int, n: int, a: int, b: int) -> float:
    """(b-1)^{1/a} (m-a+1) n^{1-1/a} + (a-1) n"""
    if min(m, n, a, b) < 1:
        raise InputError("Zarankiewicz parameters must be positive")
    return (b - 1) ** (1.0 / a) * (m - a + 1) * n ** (1.0 - 1.0 / a) + (a - 1) * n


def zarankiewicz_exact(m: int, n: int, a: int, b: int) -> int:
    """Most 1s in an m x n 0/1 matrix with no a x b all-ones submatrix, by branch and bound"""
    if min(m, n, a, b) < 1:
        raise InputError("Zarankiewicz parameters must be positive")
    if a > m or b > n:
        return m * n
    full = (1 << n) - 1
    masks = sorted(range(full + 1), key=lambda x: (-bin(x).count("1"), x))
    best = 0
    rows: List[int] = []

    def admissible(mask: int) -> bool:
        if bin(mask).count("1") < b:
            return True
        for group in combinations(rows, a - 1):
            joint = mask
            for other in group:
                joint &= other
            if bin(joint).count("1") >= b:
                return False
        return True

    def place(weight: int, start: int) -> None:
        nonlocal best
        if len(rows) == m:
            best = max(best, weight)
            return
        # rows are taken in masks order, so later rows never carry more ones
        for k in range(start, len(masks)):
            mask = masks[k]
            pop = bin(mask).count("1")
            if weight + pop * (m - len(rows)) <= best:
                break
            if admissible(mask):
                rows.append(mask)
                place(weight + pop, k)
                rows.pop()

    place(0, 0)
    return best


def turan_exponent(kind: str, *params: int) -> Fraction:
    """Exponent of the known Turán bound for a subdivided clique, a theta graph or an even cycle"""
    if kind == "subdivision" and len(params) == 1 and params[0] >= 3:
        return Fraction(3, 2) - Fraction(1, 4 * params[0] - 6)
    if kind == "theta" and len(params) == 2 and min(params) >= 2:
        return 1 + Fraction(1, params[0])
    if kind == "even_cycle" and len(params) == 1 and params[0] >= 2:
        return 1 + Fraction(1, params[0])
    raise InputError(f"no Turán exponent for {kind}{params}")


def linear_lower_bound(n: int, s: int, t: int) -> Fraction:
    """n / (s+t-2), from forbidding a monochromatic spanning tree of K_{s,t}"""
    if s + t <= 2:
        raise InputError(f"need s + t > 2, got s={s}, t={t}")
    return Fraction(n, s + t - 2)


def kab_refined_lower(n: int, a: int, b: int) -> float:
    if min(a, b) < 2:
        raise InputError(f"need a, b >= 2, got a={a}, b={b}")
    return (n / (max(a, b) - 1)) ** (1.0 / min(a, b))


def induction_refined_lower(n: int, t: int, a: int) -> float:
    if a < 1 or t < 2:
        raise InputError(f"need a >= 1 and t >= 2, got t={t}, a={a}")
    return (n / (t - 1)) ** (1.0 / a)


def zarankiewicz_color_lower(n: int, a: int, b: int) -> float:
    """Each color class is K_{a,b}-free, so n^2 / z(n, n; a, b) colors are needed"""
    return n * n / zarankiewicz_upper(n, n, a, b)


# ---------------------------------------------------------------------------
# Star bounds and closed forms at a concrete n
# ---------------------------------------------------------------------------

def _check_star_low(t: int, q: int) -> None:
    if not (q >= 2 and 2 * q <= t + 1):
        raise InputError(f"need 2 <= q <= (t+1)/2, got t={t}, q={q}")


def star_lower_bound(n: int, t: int, q: int) -> int:
    """ceil(n (q-1) / (t-1))"""
    _check_star_low(t, q)
    return -(-n * (q - 1) // (t - 1))


def refined_r(n: int, t: int, q: int) -> int:
    """Least r >= q with n C(r-1, q-2) <= C(r-q+2, q-1)(q-1)l + (C(r, q-1) - C(r-q+2, q-1))(t-1).

    The scan starts at q: a palette with fewer than q colors cannot give any star q colors.
    """
    if not 2 <= q <= t:
        raise InputError(f"need 2 <= q <= t, got t={t}, q={q}")
    ell = (t - 1) // (q - 1)
    r = q
    while True:
        lhs = n * _binom(r - 1, q - 2)
        inner = _binom(r - q + 2, q - 1)
        rhs = inner * (q - 1) * ell + (_binom(r, q - 1) - inner) * (t - 1)
        if lhs <= rhs:
            return r
        r += 1


def exact_formulas(n: int, s: int, t: int, q: int) -> Dict[str, int]:
    """Closed forms claimed to equal r(K_{n,n}, K_{s,t}, q) that apply to these parameters"""
    if t > n:
        return {}
    found: Dict[str, int] = {}
    if s == 1:
        if 2 * q >= t + 2 and q <= t:
            found["star-dense"] = n - t + q
        if q >= 2 and 2 * q <= t + 1:
            if (t - 1) % (q - 1) == 0:
                found["star-divisible"] = -(-n * (q - 1) // (t - 1))
            elif q == 3 and t % 2 == 0:
                found["star-q3-even-t"] = -(-2 * (n - 1) // (t - 2))
    else:
        if q == s * t:
            found["all-distinct"] = n * n
        k = s * t - q
        if 1 <= k <= s // 2 - 1:
            found["near-rainbow"] = n * n - k
    return found


# ---------------------------------------------------------------------------
# Threshold classification
# ---------------------------------------------------------------------------

def _balanced_rows(p: int, q: int) -> Iterator[BoundEntry]:
    rows = [
        (p * p, "exact", 2, "n^2"),
        (p * p - p // 2 + 1, "exact", 2, f"n^2 - {p // 2} + 1"),
        (p * p - p // 2, "upper", 2, "n^2 - floor(n/2)"),
        (p * p - (2 * p - 1) // 3 + 1, "lower", 2, f"n^2 - {2 * ((p - 2) // 3)}(n-1)"),
        (p * p - (2 * p - 1) // 3, "upper", None, "n^2 - c n^(1+eps), exponent unknown"),
        (p * p - p + 2, "exact", 2, "Theta(n^2)"),
        (p * p - p + 1, "upper", Fraction(2) - Fraction(2, p), f"O(n^(2-2/{p}))"),
        (p * p - 2 * p + 3, "exact", 1, "Theta(n)"),
        (p * p - 2 * p + 2, "upper", 1 - Fraction(1, 2 * p - 1), f"O(n^(1-1/{2 * p - 1}))"),
        (2, "lower", Fraction(1, p), f"Omega(n^(1/{p}))"),
    ]
    for value, kind, exponent, formula in rows:
        if q == value:
            yield _entry("balanced-table", kind, exponent, formula, "balanced K_{p,p} thresholds")


def _theta_families(p: int, q: int) -> Iterator[BoundEntry]:
    for s_ in range(5, p + 1, 2):
        if (p - 2) % (s_ - 1) == 0 and (p - 2) // (s_ - 1) >= 2:
            t_ = (p - 2) // (s_ - 1)
            if q == p * p - s_ * t_ + 1:
                yield _entry("theta-r2", "lower", 2 - Fraction(2, s_), f"Omega(n^(2-2/{s_}))",
                             f"theta family s'={s_}, t'={t_}")
    for r_ in range(3, p + 1):
        if p % r_:
            continue
        half = p // r_ - 1  # (s'-1) t' / 2
        for s_ in range(2 * r_ - 1, 2 * half + 2, 2):
            if (2 * half) % (s_ - 1) == 0:
                t_ = 2 * half // (s_ - 1)
                if t_ >= 2 and q == p * p - (r_ - 1) * s_ * t_ + 2:
                    exponent = Fraction(r_, r_ - 1) * (1 - Fraction(1, s_))
                    yield _entry("theta-r", "lower", exponent, f"Omega(n^({exponent}))",
                                 f"theta family r={r_}, s'={s_}, t'={t_}")


def threshold_classify(s: int, t: int, q: int) -> BoundReport:
    """Place q among the growth thresholds for (s, t) and list every bound that applies"""
    if not 1 <= s <= t or not 2 <= q <= s * t:
        raise InputError(f"invalid pattern (s={s}, t={t}, q={q})")
    report = BoundReport(s=s, t=t, q=q)
    regions, entries = report.regions, report.entries

    if s == 1:
        if 2 * q <= t + 1:
            regions.append("star-linear")
            entries.append(_entry("star-lower", "lower", 1, f"ceil(n({q}-1)/({t}-1))", "star blocks"))
            entries.append(_entry("star-upper", "upper", 1, f"ceil(n/floor(({t}-1)/({q}-1)))", "star blocks"))
        else:
            regions.append("star-exact")
            entries.append(_entry("star-dense", "exact", 1, f"n - {t} + {q}", "star blocks"))
        return report

    st = s * t
    linear = st - s - t + 3
    window = st - (s + t) // 2 + 2
    entries.append(_entry("general-upper", "upper", min(general_upper_exponent(s, t, q), Fraction(2)),
                          f"O(n^(({s}+{t}-2)/({st}-{q}+1)))", "general upper bound"))

    # quadratic thresholds, each valid for every larger q
    quadratic = [(st - s + 2, "st-s+2")]
    if s <= 3:
        quadratic.append((st - t // 2 + 1, "st-floor(t/2)+1"))
    if s >= 4 and (s % 2 == 0 or t % 2 == 0):
        quadratic.append((window + 1, "st-floor((s+t)/2)+3"))
    if s >= 5 and s % 2 == 1 and t % 2 == 1:
        quadratic.append((window + 2, "st-floor((s+t)/2)+4"))
    if t == s + 1 or s == 2 or (s == 3 and t % 2 == 0 and t >= 4):
        quadratic.append((window, "st-floor((s+t)/2)+2"))
    quad_hits = [(value, label) for value, label in quadratic if q >= value]

    if q == st:
        regions.append("exact-n2")
        entries.append(_entry("all-distinct", "exact", 2, "n^2", "every copy rainbow"))
    elif q >= st - s // 2 + 1:
        regions.append("n2-minus-constant")
        entries.append(_entry("near-rainbow", "exact", 2, f"n^2 - {st - q}", "near-rainbow pairs"))
    if quad_hits:
        regions.append("quadratic")
        value, label = min(quad_hits)
        entries.append(_entry("quadratic-threshold", "threshold", 2, f"Theta(n^2) from q >= {label} = {value}",
                              "quadratic threshold"))
    elif window <= q <= window + 2:
        regions.append("quadratic-window")

    if q == linear:
        regions.append("linear-threshold")
        entries.append(_entry("linear-threshold", "exact", 1, "Theta(n)", "monochromatic tree argument"))
    elif q == linear - 1:
        regions.append("sublinear")
        entries.append(_entry("below-linear", "upper", 1 - Fraction(1, s + t - 1), f"O(n^(1-1/{s + t - 1}))",
                              "monochromatic tree argument"))
    elif q < linear:
        regions.append("sublinear")
    elif not quad_hits:
        regions.append("superlinear")
    if q >= linear:
        entries.append(_entry("linear-lower", "lower", 1, f"n/({s}+{t}-2)", "monochromatic tree argument"))

    if s >= 3 and q >= window and not quad_hits:
        entries.append(_entry("three-halves", "lower", Fraction(3, 2), "Omega(n^(3/2))", "generalized Corradi"))
    if s >= 3 and t >= s + 2 and (s, t) not in {(3, 5), (3, 7)} and q >= window - 1 and not quad_hits:
        entries.append(_entry("four-thirds", "lower", Fraction(4, 3), "Omega(n^(4/3))", "generalized Corradi"))
    if t == s + 1 and q == s * s + 1 and s >= 2:
        exponent = 2 - Fraction(2, s // 2)
        entries.append(_entry("even-cycle-unbalanced", "lower", max(exponent, Fraction(0)),
                              f"Omega(n^(2-2/{s // 2}))", "even cycle energy"))

    # families from the energy method
    for u in range(2, t + 1):
        if sorted((2 * u, u * (u - 1))) == [s, t] and q == 2 * u * u * (u - 1) - u * (u - 1) + 1:
            entries.append(_entry("subdivided-clique", "lower", 1 + Fraction(1, 2 * u - 3),
                                  f"Omega(n^(1+1/{2 * u - 3}))", f"subdivided K_{u} energy"))
    if t % s == 0 and t // s >= 2 and q == s * t - (t // s) * (s - 1) + 1:
        b = t // s
        entries.append(_entry("star-incidence", "lower", 1 + Fraction(1, b), f"Omega(n^(1+1/{b}))",
                              "color incidence graph"))
    if s == t:
        p = s
        if q == p * p - p + 1:
            entries.append(_entry("even-cycle", "lower", max(2 - Fraction(2, p // 2), Fraction(0)),
                                  f"Omega(n^(2-2/{p // 2}))", "even cycle energy"))
        if q == p * p - 2 * p + 2:
            entries.append(_entry("two-p-minus-two", "lower", 1 - Fraction(1, p), f"Omega(n^(1-1/{p}))",
                                  "matching argument"))
        entries.extend(_balanced_rows(p, q))
        entries.extend(_theta_families(p, q))

    # K_{a,b}-free colour classes, valid for every q at or above their threshold
    kab = [(a, b) for a in range(2, s + 1) for b in range(2, t + 1) if a * b >= s + t and q >= st - a * b + 2]
    if kab:
        a, b = min(kab, key=lambda ab: (min(ab), ab))
        entries.append(_entry("kab-free", "lower", Fraction(1, min(a, b)), f"Omega(n^(1/{min(a, b)}))",
                              f"K_{{{a},{b}}}-free classes"))
        entries.append(_entry("kab-refined", "lower", Fraction(1, min(a, b)),
                              f"(n/{max(a, b) - 1})^(1/{min(a, b)})", f"K_{{{a},{b}}}-free classes"))
    induction = [a for a in range(2, s + 1)
                 if a * (s + t - a - 2) >= s + t - 1 and q >= st - a * (s + t - a - 2) + 1]
    if induction:
        a = min(induction)
        entries.append(_entry("induction", "lower", Fraction(1, a), f"(n/({t}-1))^(1/{a})", "induction on a"))

    # near-n^2 and n^2 - O(n) regions
    if 0 <= st - q <= s // 2 - 1:
        entries.append(_entry("n2-minus-k", "exact", 2, f"n^2 - {st - q}", "near-rainbow pairs"))
    if q == st - s // 2:
        entries.append(_entry("pairs-upper", "upper", 2, "n^2 - floor(n/2)", "near-rainbow pairs"))
        if s % 2 == 1 and (s >= 7 or (t > s and s >= 3)):
            entries.append(_entry("pairs-exact", "exact", 2, "n^2 - floor(n/2)", "near-rainbow pairs"))
        if s % 2 == 0 and (s >= 14 or (t > s and s >= 10)):
            entries.append(_entry("pairs-exact", "exact", 2, "n^2 - ceil(n/2)", "near-rainbow pairs"))
    if q == st - (2 * s - 1) // 3 + 1:
        entries.append(_entry("n2-minus-linear", "lower", 2, f"n^2 - {2 * ((s - 2) // 3)}(n-1)", "balanced subgraph"))
    if s >= 3 and t >= 2 * (s - 1) and q == st - s + 2:
        entries.append(_entry("repeated-star", "lower", 2, f"n^2 - {s - 2}n + 1", "repeated colors form a star"))
    if s + t >= 8 and q == st - (s + t - 1) // 3:
        exponent = 1 + Fraction(3, s + t - 3)
        entries.append(_entry("sparse-hypergraph", "upper", 2, f"n^2 - Theta(n^({exponent}))",
                              "sparse 4-uniform hypergraph"))
    return report


# ---------------------------------------------------------------------------
# Set-family checks
# ---------------------------------------------------------------------------

def _degree_identity(parts: List[Set[int]], subset: Set[int], power: int) -> bool:
    degree = {x: sum(1 for part in parts if x in part) for x in subset}
    lhs = sum(d ** power for d in degree.values())
    rhs = 0
    for combo in product(range(len(parts)), repeat=power):
        common = set(subset)
        for j in combo:
            common &= parts[j]
        rhs += len(common)
    return lhs == rhs


def check_corradi_instance(inst: SetFamilyInstance) -> CorradiReport:
    """Check the hypotheses directly, compare the union to the bound, and recount degrees"""
    sets = [set(x) for x in inst.sets]
    m, a, ell, r = len(sets), inst.a, inst.ell, inst.r
    sizes_ok = all(len(x) >= a for x in sets)
    max_meet = 0
    for group in combinations(range(m), r):
        max_meet = max(max_meet, len(set.intersection(*(sets[j] for j in group))))
    intersections_ok = max_meet <= ell
    union = len(set().union(*sets))

    ratio = _gen_corradi_ratio(a, m, ell, r)
    bound = float(ratio) if r == 2 else float(ratio) ** (1.0 / (r - 1))
    hypotheses = sizes_ok and intersections_ok
    satisfied = Fraction(union) ** (r - 1) >= ratio if hypotheses else None
    if satisfied is False:
        logger.error(f"union {union} below bound {bound:.4f} for {inst}")

    trimmed = [set(sorted(x)[:a]) for x in sets]
    everything = set().union(*trimmed)
    identity_ok = all(
        _degree_identity(trimmed, subset, power)
        for subset in (everything, trimmed[0])
        for power in range(1, min(3, m) + 1)
    )
    return CorradiReport(hypotheses_ok=hypotheses, sizes_ok=sizes_ok, intersections_ok=intersections_ok,
                         max_intersection=max_meet, bound=bound, union_size=union, satisfied=satisfied,
                         identity_ok=identity_ok)


def random_family(seed: int, r: int = 2, max_sets: int = 7, max_universe: int = 14) -> SetFamilyInstance:
    """A seeded family whose a and ell are read off the sets, so the hypotheses hold"""
    rng = np.random.default_rng(seed)
    m = int(rng.integers(max(2, r), max_sets + 1))
    universe = int(rng.integers(4, max_universe + 1))
    sets = []
    for _ in range(m):
        size = int(rng.integers(1, universe + 1))
        sets.append(sorted(int(x) for x in rng.choice(universe, size=size, replace=False)))
    a = min(len(x) for x in sets)
    ell = max(len(set.intersection(*(set(sets[j]) for j in group))) for group in combinations(range(m), r))
    return SetFamilyInstance(universe=universe, sets=sets, a=a, ell=ell, r=r)


def _a1_row(s: int, t_max: int) -> List[Tuple[int, int]]:
    bad = []
    for t in range(3 * s - 2, t_max + 1):
        if (s, t) == (3, 7):
            continue
        h = (s + t) // 2 - s + 1
        if h % 2 == 0:
            holds = 3 * h + 2 * s <= 2 * t
        else:
            holds = 3 * (h + 1) + 2 * (s - 1) <= 2 * t
        if not holds:
            bad.append((s, t))
    return bad


def lemma_a1_check(s_max: int, t_max: int, jobs: int = JOBS) -> List[Tuple[int, int]]:
    """Pairs s >= 3, t >= 3s-2 where the auxiliary threshold inequality fails (expected: none)"""
    if s_max > 10 ** 4 or t_max > 10 ** 4:
        raise InputError(f"ranges capped at 10^4, got s_max={s_max}, t_max={t_max}")
    rows = range(3, s_max + 1)
    if jobs > 1:
        chunks = Parallel(n_jobs=jobs)(delayed(_a1_row)(s, t_max) for s in rows)
    else:
        chunks = [_a1_row(s, t_max) for s in rows]
    return [pair for chunk in chunks for pair in chunk]
