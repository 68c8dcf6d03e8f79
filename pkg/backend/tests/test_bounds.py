from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from app.bounds import (
    SetFamilyInstance,
    check_corradi_instance,
    corradi_bound,
    exact_formulas,
    gen_corradi_bound,
    general_upper_exponent,
    lemma_a1_check,
    linear_lower_bound,
    random_family,
    refined_r,
    star_lower_bound,
    threshold_classify,
    turan_exponent,
    zarankiewicz_exact,
    zarankiewicz_upper,
)
from app.errors import InputError


class TestFormulas:
    def test_general_upper_exponent(self):
        assert general_upper_exponent(2, 2, 3) == 1
        assert general_upper_exponent(3, 3, 9) == 4
        assert general_upper_exponent(2, 3, 2) == Fraction(3, 5)

    def test_corradi_bound(self):
        assert corradi_bound(2, 3, 1) == 3
        assert corradi_bound(3, 1, 0) == 3

    def test_generalized_bound_reduces_to_pairwise(self):
        for a in range(1, 31):
            for m in range(2, 31):
                for ell in range(0, a + 1):
                    assert gen_corradi_bound(a, m, ell, 2) == float(corradi_bound(a, m, ell))

    def test_generalized_bound_needs_r_at_most_m(self):
        with pytest.raises(InputError):
            gen_corradi_bound(3, 2, 1, 3)

    def test_zarankiewicz(self):
        assert zarankiewicz_upper(4, 4, 2, 2) == 10.0
        assert zarankiewicz_exact(4, 4, 2, 2) == 9
        assert zarankiewicz_exact(3, 3, 2, 2) == 6
        assert zarankiewicz_exact(2, 3, 3, 2) == 6

    def test_zarankiewicz_exact_within_upper(self):
        for n in range(2, 6):
            assert zarankiewicz_exact(n, n, 2, 2) <= zarankiewicz_upper(n, n, 2, 2)

    def test_turan_exponents(self):
        assert turan_exponent("even_cycle", 2) == Fraction(3, 2)
        assert turan_exponent("theta", 3, 5) == Fraction(4, 3)
        assert turan_exponent("subdivision", 3) == Fraction(4, 3)
        with pytest.raises(InputError):
            turan_exponent("cycle", 2)

    def test_linear_lower_bound(self):
        assert linear_lower_bound(12, 3, 5) == 2
        with pytest.raises(InputError):
            linear_lower_bound(5, 1, 1)


class TestStarBounds:
    def test_refined_r(self):
        assert refined_r(7, 4, 3) == 6

    def test_refined_r_never_drops_below_q(self):
        assert refined_r(1, 4, 3) == 3
        for n in range(1, 12):
            for t in range(2, 7):
                for q in range(2, t + 1):
                    assert refined_r(n, t, q) >= q

    def test_star_lower_bound(self):
        assert star_lower_bound(6, 5, 3) == 3
        with pytest.raises(InputError):
            star_lower_bound(6, 4, 3)

    @pytest.mark.parametrize(
        "n,s,t,q,expected",
        [
            (4, 1, 4, 3, {"star-dense": 3}),
            (7, 1, 4, 3, {"star-dense": 6}),
            (5, 1, 5, 3, {"star-divisible": 3}),
            (7, 1, 6, 3, {"star-q3-even-t": 3}),
            (3, 1, 5, 3, {}),
            (2, 2, 2, 4, {"all-distinct": 4}),
            (4, 4, 4, 15, {"near-rainbow": 15}),
            (4, 3, 3, 8, {}),
        ],
    )
    def test_exact_formulas(self, n, s, t, q, expected):
        assert exact_formulas(n, s, t, q) == expected


class TestLemmaA1:
    def test_no_counterexamples(self):
        assert lemma_a1_check(200, 600) == []

    def test_parallel_matches_serial(self):
        assert lemma_a1_check(20, 80, jobs=2) == lemma_a1_check(20, 80, jobs=1)

    def test_range_cap(self):
        with pytest.raises(InputError):
            lemma_a1_check(3, 10 ** 5)


class TestThresholds:
    def test_rainbow_requirement(self):
        report = threshold_classify(2, 2, 4)
        assert "exact-n2" in report.regions
        assert any(e.name == "all-distinct" for e in report.entries)

    def test_linear_threshold(self):
        report = threshold_classify(3, 5, 10)
        assert "linear-threshold" in report.regions
        assert "quadratic" not in report.regions

    def test_quadratic(self):
        report = threshold_classify(3, 4, 11)
        assert "quadratic" in report.regions

    def test_star_regions(self):
        assert threshold_classify(1, 5, 3).regions == ["star-linear"]
        assert threshold_classify(1, 4, 3).regions == ["star-exact"]

    def test_unknown_exponent_row(self):
        # q = p^2 - floor((2p-1)/3) for p = 4
        entries = [e for e in threshold_classify(4, 4, 14).entries if e.name == "balanced-table"]
        assert any(e.exponent is None and "unknown" in e.formula for e in entries)

    def test_invalid_triple(self):
        with pytest.raises(InputError):
            threshold_classify(3, 2, 4)

    @settings(max_examples=100, deadline=None, derandomize=True)
    @given(data=st.data())
    def test_exponents_stay_in_range(self, data):
        t = data.draw(st.integers(1, 9))
        s = data.draw(st.integers(1, t))
        if s * t < 2:
            return
        q = data.draw(st.integers(2, s * t))
        for entry in threshold_classify(s, t, q).entries:
            if entry.exponent is not None:
                assert 0 <= entry.exponent <= 2, entry
                assert Fraction(entry.exact_exponent) == Fraction(entry.exponent).limit_denominator(1000)


class TestCorradiInstances:
    def test_tight_triangle(self):
        report = check_corradi_instance(SetFamilyInstance(universe=3, sets=[[0, 1], [0, 2], [1, 2]], a=2, ell=1))
        assert report.hypotheses_ok
        assert report.union_size == 3
        assert report.bound == 3.0
        assert report.satisfied is True

    def test_broken_hypothesis_is_not_judged(self):
        report = check_corradi_instance(SetFamilyInstance(universe=3, sets=[[0, 1], [0, 2], [1, 2]], a=2, ell=0))
        assert not report.intersections_ok
        assert report.max_intersection == 1
        assert report.satisfied is None

    @pytest.mark.parametrize("r,seeds", [(2, 10_000), (3, 1_000)])
    def test_random_families_meet_the_bound(self, r, seeds):
        failures = []
        for seed in range(seeds):
            report = check_corradi_instance(random_family(seed, r=r))
            if not (report.hypotheses_ok and report.satisfied is True and report.identity_ok):
                failures.append((seed, report))
        assert failures == []

    def test_three_wise_bound_on_four_sets(self):
        bound = gen_corradi_bound(3, 4, 1, 3)
        assert bound == pytest.approx(12 ** 0.5)
        rng = np.random.default_rng(2024)
        checked = 0
        while checked < 200:
            universe = int(rng.integers(6, 15))
            sets = [sorted(int(x) for x in rng.choice(universe, size=int(rng.integers(3, 6)), replace=False))
                    for _ in range(4)]
            if any(len(set(sets[i]) & set(sets[j]) & set(sets[k])) > 1 for i, j, k in combinations(range(4), 3)):
                continue
            report = check_corradi_instance(SetFamilyInstance(universe=universe, sets=sets, a=3, ell=1, r=3))
            assert report.hypotheses_ok
            assert report.union_size >= bound
            assert report.satisfied is True
            checked += 1

    def test_arity_above_family_size(self):
        with pytest.raises(ValidationError):
            SetFamilyInstance(universe=3, sets=[[0, 1]], a=2, ell=0)
