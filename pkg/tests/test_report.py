import re

import numpy as np
import pytest

from nile_momdp.errors import UsageError
from nile_momdp.metrics import pareto_indices
from nile_momdp.report import (build_report, filter_sets_against_union,
                               format_table, metrics_table,
                               parallel_coordinates_svg)

NAMES4 = ("ED", "SD", "HAD", "EH")


def random_sets(seed, k=4, d=4):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(k):
        n = int(rng.integers(3, 25))
        out.append((f"set{i}", rng.random((n, d))))
    return out


def panel_counts(svg):
    """(data-count, polylines drawn) per panel, in document order."""
    counts = []
    for block in re.findall(r'<g class="panel".*?</g>', svg, flags=re.S):
        declared = int(re.search(r'data-count="(\d+)"', block).group(1))
        drawn = block.count("<polyline")
        counts.append((declared, drawn))
    return counts


class TestUnionFilter:
    def test_cross_set_domination_removes_points(self):
        strong = np.array([[2.0, 2.0]])
        weak = np.array([[1.0, 1.0], [3.0, 0.5]])
        survivors = filter_sets_against_union([strong, weak])
        assert survivors[0].tolist() == [[2.0, 2.0]]
        assert survivors[1].tolist() == [[3.0, 0.5]]

    def test_shared_point_survives_in_both(self):
        a = np.array([[1.0, 1.0]])
        b = np.array([[1.0, 1.0]])
        survivors = filter_sets_against_union([a, b])
        assert survivors[0].tolist() == [[1.0, 1.0]]
        assert survivors[1].tolist() == [[1.0, 1.0]]

    def test_union_of_survivors_is_mutually_nondominated(self):
        sets = [points for _, points in random_sets(5)]
        survivors = filter_sets_against_union(sets)
        merged = np.vstack([s for s in survivors if len(s)])
        assert pareto_indices(merged) == list(range(len(merged)))

    def test_empty_set_passes_through(self):
        survivors = filter_sets_against_union([np.empty((0, 2)),
                                               np.array([[1.0, 1.0]])])
        assert len(survivors[0]) == 0
        assert len(survivors[1]) == 1


class TestSvg:
    def test_four_panels_with_matching_counts(self):
        svg = parallel_coordinates_svg(random_sets(1), NAMES4)
        counts = panel_counts(svg)
        assert len(counts) == 4
        for declared, drawn in counts:
            assert declared == drawn

    def test_counts_equal_survivor_cardinality(self):
        labeled = random_sets(2)
        survivors = filter_sets_against_union([p for _, p in labeled])
        svg = parallel_coordinates_svg(labeled, NAMES4)
        declared = [c for c, _ in panel_counts(svg)]
        assert declared == [len(s) for s in survivors]

    def test_byte_identical_for_equal_inputs(self):
        a = parallel_coordinates_svg(random_sets(3), NAMES4)
        b = parallel_coordinates_svg(random_sets(3), NAMES4)
        assert a == b

    def test_axis_labels_present(self):
        svg = parallel_coordinates_svg(random_sets(4), NAMES4)
        for name in NAMES4:
            assert f">{name}<" in svg

    def test_dominated_set_draws_flat_top_line_when_constant(self):
        # one set pinned at the global max of every axis: after
        # normalization its polyline hugs the top of the panel
        top = np.array([[5.0, 5.0]])
        rest = np.array([[1.0, 4.0], [4.0, 1.0]])
        svg = parallel_coordinates_svg([("top", top), ("rest", rest)], ("A", "B"))
        block = re.search(r'<g class="panel" data-label="top".*?</g>', svg,
                          flags=re.S).group(0)
        poly = re.search(r'<polyline points="([^"]+)"', block).group(1)
        ys = {pair.split(",")[1] for pair in poly.split()}
        assert len(ys) == 1  # flat line

    def test_coordinates_have_fixed_precision(self):
        svg = parallel_coordinates_svg(random_sets(6), NAMES4)
        for points in re.findall(r'<polyline points="([^"]+)"', svg):
            for pair in points.split():
                x, y = pair.split(",")
                assert re.fullmatch(r"-?\d+\.\d{2}", x)
                assert re.fullmatch(r"-?\d+\.\d{2}", y)

    def test_rejects_empty_input(self):
        with pytest.raises(UsageError):
            parallel_coordinates_svg([], NAMES4)
        with pytest.raises(UsageError):
            parallel_coordinates_svg([("a", np.empty((0, 4)))], NAMES4)

    def test_name_count_must_match(self):
        with pytest.raises(UsageError):
            parallel_coordinates_svg([("a", np.random.default_rng(0).random((3, 4)))],
                                     ("only", "three", "names"))


class TestTable:
    def test_best_set_is_100_percent(self):
        big = np.array([[10.0, 10.0]])
        small = np.array([[1.0, 1.0]])
        rows, ref = metrics_table([("big", big), ("small", small)],
                                  reference=[0.0, 0.0])
        assert rows[0].pct_of_best == 100
        assert rows[0].hypervolume == 100.0
        assert rows[1].pct_of_best == 1
        assert rows[1].cardinality == 1

    def test_shared_default_reference(self):
        from nile_momdp.metrics import pareto_filter

        sets = random_sets(7, k=3)
        rows, ref = metrics_table(sets)
        assert len(ref) == 4
        # every front point must strictly dominate the shared reference
        for _, points in sets:
            assert np.all(pareto_filter(points) > np.asarray(ref))
        assert max(r.pct_of_best for r in rows) == 100

    def test_format_table_alignment(self):
        rows, _ = metrics_table([("alpha", np.array([[1.0, 1.0]])),
                                 ("b", np.array([[0.5, 0.5]]))],
                                reference=[0.0, 0.0])
        text = format_table(rows)
        lines = text.splitlines()
        assert lines[0].startswith("set")
        assert "hypervolume" in lines[0]
        assert len(lines) == 3
        assert "1.00E+00" in lines[1]

    def test_build_report_bundle(self):
        sets = random_sets(9)
        bundle = build_report(sets, NAMES4)
        assert len(bundle.rows) == 4
        assert bundle.svg.startswith("<svg")
        assert len(bundle.survivors) == 4
        assert pareto_indices(bundle.merged) == list(range(len(bundle.merged)))
