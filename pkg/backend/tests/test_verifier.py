import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.constructions import near_rainbow_pairs, near_rainbow_pairs_odd, rainbow
from app.core import Coloring, iter_copies, make_spec
from app.errors import InputError, PreconditionError
from app.verifier import (
    VACUOUSLY_VALID,
    VALID,
    VIOLATION,
    min_colors_over_copies,
    pairing_max_repetitions,
    verify,
)
from conftest import colorings


@st.composite
def pairing_colorings(draw, max_n: int = 5) -> Coloring:
    """Random pairing colorings: some cells matched up two by two, every other cell its own color"""
    n = draw(st.integers(2, max_n))
    order = draw(st.permutations(range(n * n)))
    pairs = draw(st.integers(0, n * n // 2))
    labels = list(range(n * n))
    for p in range(pairs):
        labels[order[2 * p + 1]] = labels[order[2 * p]]
    return Coloring.from_matrix(np.array(labels).reshape(n, n))


def brute_force_minimum(coloring, s, t):
    best, first = None, None
    for copy in iter_copies(coloring.n, s, t):
        count = len(coloring.copy_colors(copy))
        if best is None or count < best:
            best, first = count, copy
    return best, first


class TestVerify:
    def test_monochromatic_violation(self, mono3):
        report = verify(mono3, make_spec(2, 2, 2))
        assert report.status == VIOLATION
        assert report.witness.side_a == (0, 1)
        assert report.witness.side_b == (0, 1)
        assert report.observed == 1
        assert not report.ok

    def test_rainbow_is_valid(self):
        report = verify(rainbow(4), make_spec(2, 3, 6))
        assert report.status == VALID
        assert report.witness is None
        assert report.copies_checked > 0

    def test_too_small_host_is_vacuous(self, mono3):
        report = verify(mono3, make_spec(1, 4, 2))
        assert report.status == VACUOUSLY_VALID
        assert report.ok

    def test_unbalanced_copy_found_in_second_orientation(self):
        # a monochromatic column: K_{1,3} with its center in B
        matrix = rainbow(3).matrix.copy()
        matrix[:, 0] = 100
        report = verify(Coloring.from_matrix(matrix), make_spec(1, 3, 2))
        assert report.status == VIOLATION
        assert report.witness.s_side == "B"
        assert report.witness.side_b == (0,)

    @settings(max_examples=60, deadline=None, derandomize=True)
    @given(coloring=colorings(min_n=2), data=st.data())
    def test_agrees_with_brute_force(self, coloring, data):
        t = data.draw(st.integers(1, coloring.n))
        s = data.draw(st.integers(1, t))
        best, first = brute_force_minimum(coloring, s, t)
        count, witness = min_colors_over_copies(coloring, s, t, jobs=1)
        assert count == best
        assert witness == first
        if s * t >= 2:
            q = data.draw(st.integers(2, s * t))
            report = verify(coloring, make_spec(s, t, q), jobs=1)
            assert report.ok == (best >= q)

    def test_parallel_scan_matches_serial(self, block6):
        spec = make_spec(2, 3, 4)
        serial = verify(block6, spec, jobs=1)
        parallel = verify(block6, spec, jobs=2)
        assert (parallel.status, parallel.witness, parallel.observed) == (serial.status, serial.witness, serial.observed)

    def test_min_colors_arguments(self, mono3):
        with pytest.raises(InputError):
            min_colors_over_copies(mono3, 3, 2)
        with pytest.raises(InputError):
            min_colors_over_copies(mono3, 1, 4)


class TestPairingRepetitions:
    def test_rejects_non_pairing(self, mono3):
        with pytest.raises(PreconditionError):
            pairing_max_repetitions(mono3, 2, 2)

    @pytest.mark.parametrize("s,t,expected", [(2, 2, 1), (3, 3, 1), (2, 3, 1), (4, 4, 2), (2, 6, 1), (6, 6, 3)])
    def test_diagonal_pairs(self, s, t, expected):
        assert pairing_max_repetitions(near_rainbow_pairs(6).coloring, s, t) == expected

    def test_crossed_pair(self):
        assert pairing_max_repetitions(near_rainbow_pairs_odd(5).coloring, 3, 3) == 2

    def test_rainbow_has_none(self):
        assert pairing_max_repetitions(rainbow(3), 2, 2) == 0

    @pytest.mark.parametrize("n", range(2, 8))
    def test_matches_copy_scan_on_constructions(self, n):
        built = [near_rainbow_pairs(n).coloring]
        if n % 2:
            built.append(near_rainbow_pairs_odd(n).coloring)
        for coloring in built:
            for t in range(1, n + 1):
                for s in range(1, t + 1):
                    fewest, _ = min_colors_over_copies(coloring, s, t, jobs=1)
                    assert pairing_max_repetitions(coloring, s, t) == s * t - fewest, (n, s, t)

    @settings(max_examples=150, deadline=None, derandomize=True)
    @given(coloring=pairing_colorings())
    def test_matches_copy_scan_on_random_pairings(self, coloring):
        for t in range(1, coloring.n + 1):
            for s in range(1, t + 1):
                fewest, _ = min_colors_over_copies(coloring, s, t, jobs=1)
                assert pairing_max_repetitions(coloring, s, t) == s * t - fewest
