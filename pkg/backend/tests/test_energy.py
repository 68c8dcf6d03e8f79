import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings

from app.constructions import monochromatic, near_rainbow_pairs, rainbow
from app.core import Coloring
from app.energy.graph import (
    EnergyConfig,
    Stage,
    build_energy,
    color_energy,
    energy_color_exponent,
    energy_lower_bound_colors,
    prune_coordinate_conflicts,
    prune_partition,
    prune_rare_colors,
    pruned_energy,
    validate_pruned,
)
from app.errors import PreconditionError, ResourceError
from conftest import colorings


class TestRawEnergy:
    def test_energy_of_diagonal_pairs(self):
        coloring = near_rainbow_pairs(4).coloring
        assert color_energy(coloring, 2) == 2 * 4 + 12
        assert build_energy(coloring, 2).edge_count == 20

    def test_edges_are_monochromatic_tuples(self, block4):
        energy = build_energy(block4, 3)
        assert energy.edge_count == color_energy(block4, 3)
        for left, right in energy.edges:
            assert len({block4.color(a, b) for a, b in zip(left, right)}) == 1

    @pytest.mark.parametrize("r", [2, 3])
    def test_edge_count_is_color_energy_on_all_small_colorings(self, r):
        for n in (1, 2, 3):
            for cells in product(range(3), repeat=n * n):
                coloring = Coloring.from_matrix(np.array(cells).reshape(n, n))
                assert build_energy(coloring, r).edge_count == color_energy(coloring, r)

    def test_parallel_build_matches(self, block4):
        assert build_energy(block4, 2, jobs=2).edges == build_energy(block4, 2, jobs=1).edges

    def test_order_must_be_at_least_two(self, mono3):
        with pytest.raises(PreconditionError):
            build_energy(mono3, 1)

    def test_tuple_limit(self, mono3, monkeypatch):
        monkeypatch.setattr("app.energy.graph.ENERGY_TUPLE_LIMIT", 8)
        with pytest.raises(ResourceError):
            build_energy(mono3, 2)

    def test_networkx_view(self, block4):
        energy = build_energy(block4, 2)
        graph = energy.to_networkx()
        assert graph.number_of_edges() == energy.edge_count
        assert energy.colors() == {0, 1}


class TestLowerBound:
    def test_extremes(self):
        assert energy_lower_bound_colors(color_energy(monochromatic(2), 2), 2, 2) == 1.0
        assert energy_lower_bound_colors(color_energy(rainbow(3), 2), 3, 2) == 9.0

    def test_below_floor(self):
        with pytest.raises(PreconditionError):
            energy_lower_bound_colors(8, 3, 2)

    @settings(max_examples=1000, deadline=None, derandomize=True)
    @given(coloring=colorings(max_n=5, max_colors=8))
    def test_never_exceeds_the_palette(self, coloring):
        for r in (2, 3):
            bound = energy_lower_bound_colors(color_energy(coloring, r), coloring.n, r)
            assert bound <= coloring.palette_size + 1e-9

    def test_color_exponent(self):
        assert energy_color_exponent(Fraction(3, 2), 3) == Fraction(9, 4)
        assert energy_color_exponent(1, 2) == 2


class TestPruning:
    def test_pipeline_reaches_conflict_stage(self, block6):
        graph = pruned_energy(block6, 2, EnergyConfig(seed=5))
        assert graph.stage is Stage.CONFLICT_PRUNED
        assert graph.raw_edge_count == 3 * 12 ** 2
        report = validate_pruned(graph)
        assert report.ok
        assert 0 < report.retained_fraction <= 1

    def test_pipeline_is_deterministic(self, block6):
        first = pruned_energy(block6, 2, EnergyConfig(seed=11))
        second = pruned_energy(block6, 2, EnergyConfig(seed=11))
        assert first.edges == second.edges
        assert first.partitions == second.partitions

    def test_stages_run_in_order(self, block6):
        raw = build_energy(block6, 2)
        with pytest.raises(PreconditionError):
            prune_rare_colors(raw)
        partitioned = prune_partition(raw, seed=1)
        with pytest.raises(PreconditionError):
            prune_partition(partitioned)
        with pytest.raises(PreconditionError):
            prune_coordinate_conflicts(partitioned, 3)

    def test_rare_threshold_drops_small_classes(self):
        coloring = near_rainbow_pairs(4).coloring
        partitioned = prune_partition(build_energy(coloring, 2), seed=0)
        pruned = prune_rare_colors(partitioned, threshold=2)
        mult = coloring.classes.multiplicities
        assert all(mult[c] >= 2 for c in pruned.colors())
        assert pruned.threshold == 2

    def test_star_must_stay_below_ell_star(self, block6):
        with pytest.raises(PreconditionError):
            pruned_energy(block6, 2, EnergyConfig(ell_star=2))

    def test_tampered_graph_fails_validation(self, block6):
        graph = pruned_energy(block6, 2, EnergyConfig(seed=5))
        parts_a, parts_b = graph.partitions
        stray = ((parts_a[1][0], parts_a[0][0]), (parts_b[0][0], parts_b[1][0]))
        tampered = graph.derive(graph.edges + [stray], Stage.CONFLICT_PRUNED)
        assert validate_pruned(tampered).partition_violations

    @pytest.mark.parametrize("n,palette", [(6, 8), (8, 16)])
    @pytest.mark.parametrize("seed", range(50))
    def test_random_colorings_pass_validation(self, n, palette, seed, monkeypatch):
        monkeypatch.setattr("app.energy.graph.RARE_COLOR_THRESHOLD", "")
        rng = np.random.default_rng(seed)
        coloring = Coloring.from_matrix(rng.integers(0, palette, size=(n, n)))
        graph = pruned_energy(coloring, 2, EnergyConfig(seed=seed))
        assert graph.threshold == math.ceil(math.log2(n))
        report = validate_pruned(graph)
        assert report.ok
        mult = coloring.classes.multiplicities
        assert all(mult[c] >= graph.threshold for c in graph.colors())

    @pytest.mark.parametrize("seed", range(5))
    def test_unit_threshold_passes_validation(self, seed):
        rng = np.random.default_rng(seed)
        coloring = Coloring.from_matrix(rng.integers(0, 8, size=(6, 6)))
        graph = pruned_energy(coloring, 2, EnergyConfig(seed=seed, threshold=1))
        assert validate_pruned(graph).ok
        assert graph.threshold == 1
