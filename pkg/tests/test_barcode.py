import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treepers import InvalidInputError
from treepers.barcode import (Bar, Diagram, barcode_from_field, barcode_from_tree,
                              box_dimension, covering_number, elder_rule_barcode,
                              geometric_grid, mellin_pers_p, p_variation, pers_p,
                              persistence_index, variation_index)
from treepers.domain import ScalarField, gen_fbm, grid_graph, path_graph
from treepers.tree import MergeTree, build_merge_tree, random_merge_tree
from oracles import naive_elder, p_variation_by_partitions


def field(values, graph=None):
    values = np.asarray(values, dtype=float)
    return ScalarField(graph or path_graph(len(values)), values)


def as_pairs(d):
    return sorted((b.birth, -math.inf if b.essential else b.death) for b in d.bars)


def oracle_pairs(f):
    bars = naive_elder(list(f.values), f.graph.edges)
    return sorted((b, -math.inf if d is None else d) for b, d in bars)


# ---------------------------------------------------------------- barcodes


def test_example_barcodes():
    d = barcode_from_field(field([1, 3, 2, 4]))
    assert as_pairs(d) == [(3.0, 2.0), (4.0, -math.inf)]
    assert as_pairs(barcode_from_field(field([0, 2, 1, 3]))) == [(2.0, 1.0), (3.0, -math.inf)]
    seg = barcode_from_tree(MergeTree([1.0, 4.0], [-1, 0]))
    assert as_pairs(seg) == [(4.0, -math.inf)] and list(seg.lengths()) == [3.0]


def test_constant_field_has_zero_length_essential_bar():
    d = barcode_from_field(field([2, 2, 2, 2]))
    assert len(d) == 1 and d.lengths()[0] == 0.0


@pytest.mark.parametrize("seed", range(40))
def test_tree_barcode_matches_naive_oracle(seed):
    rng = np.random.default_rng(seed)
    if seed % 2:
        g = grid_graph(int(rng.integers(2, 6)), int(rng.integers(2, 6)))
    else:
        g = path_graph(int(rng.integers(2, 30)))
    # coarse integer values force ties and plateaus
    f = ScalarField(g, rng.integers(0, 5, g.vertex_count).astype(float))
    tree_d = barcode_from_field(f, "tree")
    assert as_pairs(tree_d) == as_pairs(elder_rule_barcode(f))
    assert as_pairs(tree_d) == oracle_pairs(f)


def test_diagram_validation():
    with pytest.raises(InvalidInputError):
        Diagram((Bar(5.0, 1.0),), (0.0, 4.0))
    with pytest.raises(InvalidInputError):
        Diagram((Bar(2.0, 1.0, True),), (0.0, 4.0))


def test_unknown_method():
    with pytest.raises(InvalidInputError):
        barcode_from_field(field([0, 1]), "magic")


# ---------------------------------------------------------------- Pers_p


def test_pers_p_examples():
    d = barcode_from_field(field([1, 3, 2, 4]))
    assert pers_p(d, 1) == 4.0
    assert pers_p(d, 2) == pytest.approx(math.sqrt(10))
    assert pers_p(d, math.inf) == 3.0
    only = barcode_from_field(field([0, 1, 2, 5]))
    for p in (1, 2, 7.5):
        assert pers_p(only, p) == pytest.approx(5.0)
    with pytest.raises(InvalidInputError):
        pers_p(d, 0.5)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 30), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_mellin_identity(seed, leaves, p):
    t = random_merge_tree(np.random.default_rng(seed), leaves)
    direct = pers_p(barcode_from_tree(t), p) ** p
    assert abs(mellin_pers_p(t, p) - direct) <= 1e-9 * max(1.0, direct)


# ---------------------------------------------------------------- p-variation


def test_p_variation_examples():
    assert p_variation([0, 1, 2, 3], 1) == 3.0
    assert p_variation([0, 1, 2, 3], 2) == pytest.approx(3.0)
    assert p_variation([0, 2, 1, 3], 1) == 5.0
    assert p_variation([0, 2, 1, 3], 2) == pytest.approx(3.0)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=9),
       st.sampled_from([1.0, 1.3, 2.0, 3.0]))
def test_p_variation_matches_partition_enumeration(xs, p):
    assert p_variation(xs, p) == pytest.approx(p_variation_by_partitions(xs, p), rel=1e-12, abs=1e-12)


def test_p_variation_needs_a_path():
    f = ScalarField(grid_graph(2, 2), [0, 1, 2, 3])
    with pytest.raises(InvalidInputError):
        p_variation(f, 2)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
def test_variation_bounded_by_persistence(p):
    # p-variation^p <= 2 Pers_p^p; the constant 2 is attained
    for seed in range(30):
        f = gen_fbm(int(np.random.default_rng(seed).integers(3, 200)), 0.5, seed)
        lhs = p_variation(f, p) ** p
        rhs = 2 * pers_p(barcode_from_field(f), p) ** p
        assert lhs <= rhs * (1 + 1e-12)


def test_variation_bound_is_sharp():
    f = field([0, 1, 0])
    assert p_variation(f, 1) == pytest.approx(2 * pers_p(barcode_from_field(f), 1))


# ---------------------------------------------------------------- dimension estimators


def star(k, length=1.0):
    return MergeTree([0.0] + [length] * k, [-1] + [0] * k)


def test_covering_numbers_of_simple_trees():
    seg = MergeTree([0.0, 1.0], [-1, 0])
    assert [covering_number(seg, e) for e in (1, 0.5, 0.25, 0.1, 0.01)] == [1, 1, 2, 5, 50]
    s = star(5)
    assert covering_number(s, 1.0) == 1
    assert covering_number(s, 0.75) == 5
    assert covering_number(s, 0.4) == 6
    assert covering_number(s, 0.01) == pytest.approx(5 / 0.02, rel=0.02)


def test_box_dimension_of_finite_trees():
    seg = MergeTree([0.0, 1.0], [-1, 0])
    grid = geometric_grid(1.0)
    assert box_dimension(seg, grid)["upper_est"] == pytest.approx(1.0, abs=0.1)
    assert box_dimension(star(6), grid)["upper_est"] == pytest.approx(1.0, abs=0.1)


def test_index_of_finite_tree_is_one():
    t = random_merge_tree(np.random.default_rng(0), 6)
    shortest = barcode_from_tree(t).lengths().min()
    est = persistence_index(t, geometric_grid(shortest, 1, 8))
    assert est.index == 1.0
    assert est.slope == pytest.approx(0.0, abs=1e-12)


def test_index_grid_validation():
    t = random_merge_tree(np.random.default_rng(0), 6)
    with pytest.raises(InvalidInputError):
        persistence_index(t, [0.1, 0.2])
    with pytest.raises(InvalidInputError):
        persistence_index(t, [-1, 0.1, 0.2, 0.3, 0.4, 0.5])
    with pytest.raises(InvalidInputError):
        persistence_index(MergeTree([0.0], [-1]))


def test_brownian_estimators_agree():
    f = gen_fbm(2 ** 14, 0.5, 3)
    t = build_merge_tree(f)
    idx = persistence_index(t).index
    box = box_dimension(t)["upper_est"]
    var = variation_index(f)
    assert idx == pytest.approx(2.0, abs=0.3)
    assert box == pytest.approx(2.0, abs=0.3)
    assert var == pytest.approx(2.0, abs=0.3)


def test_smooth_field_variation_index():
    x = np.linspace(0, 1, 4097)
    assert variation_index(np.sin(2 * np.pi * x)) == pytest.approx(1.0, abs=0.05)
