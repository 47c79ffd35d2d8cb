import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treepers import InvalidInputError
from treepers.barcode import barcode_from_field
from treepers.domain import (MetricGraph, ScalarField, cycle_graph, gen_fbm,
                             grid_graph, path_graph)
from treepers.tree import (MarkedInterval, MergeTree, approximant_interval_lengths,
                           approximate_from_tree, build_merge_tree, canonical_form,
                           cascade_tree, compose_intervals, df_distance, df_matrix,
                           distortion_bound, dyck_path, height_above, leaf_count,
                           random_merge_tree, total_length, trim, unit_edge_tree)
from oracles import df_by_paths, isometric


def field(values, graph=None):
    values = np.asarray(values, dtype=float)
    return ScalarField(graph or path_graph(len(values)), values)


def example_tree():
    return build_merge_tree(field([1, 3, 2, 4]))


def bar_lengths(t):
    # lengths of the barcode of the contour field, an independent route
    d = barcode_from_field(dyck_path(t)[0], method="elder")
    return d.lengths()


# ---------------------------------------------------------------- d_f


def test_df_comparable_points():
    f = field([1, 2, 3])
    assert df_distance(f, 0, 2) == 2.0


def test_df_across_a_valley():
    assert df_distance(field([0, 2, 1, 3]), 0, 3) == 3.0
    assert df_distance(field([1, 3, 2, 4]), 1, 3) == 3 + 4 - 2 * 2


def test_df_matches_path_enumeration():
    rng = np.random.default_rng(1)
    for trial in range(60):
        n = int(rng.integers(2, 9))
        edges = [(int(rng.integers(0, v)), v, 1.0) for v in range(1, n)]
        for _ in range(int(rng.integers(0, 4))):
            u, v = sorted(rng.choice(n, 2, replace=False))
            if not any({a, b} == {u, v} for a, b, _ in edges):
                edges.append((int(u), int(v), 1.0))
        g = MetricGraph(n, tuple(edges))
        vals = rng.integers(0, 4, n).astype(float)  # ties on purpose
        f = ScalarField(g, vals)
        D = df_matrix(f)
        for x in range(n):
            for y in range(n):
                expect = df_by_paths(vals, edges, x, y)
                assert df_distance(f, x, y) == expect
                assert D[x, y] == expect


def test_df_matrix_is_a_pseudometric():
    f = gen_fbm(40, 0.5, 0)
    D = df_matrix(f)
    assert np.array_equal(D, D.T)
    assert np.all(np.diag(D) == 0)
    assert np.all(D[:, :, None] <= D[:, None, :].transpose(0, 2, 1) + D[None, :, :] + 1e-12)


# ---------------------------------------------------------------- construction


def test_example_tree_shape():
    t = example_tree()
    assert sorted(t.values[t.leaves]) == [3.0, 4.0]
    assert t.values[t.root] == 1.0
    internal = [v for v in range(len(t)) if v != t.root and v not in t.leaves]
    assert [t.values[v] for v in internal] == [2.0]


def test_monotone_field_is_one_segment():
    t = build_merge_tree(field([0, 1, 2, 3]))
    assert len(t) == 2 and len(t.leaves) == 1


def test_constant_field_is_a_point():
    t = build_merge_tree(field([2, 2, 2]))
    assert len(t) == 1 and t.values[0] == 2.0


def test_plateau_merges_into_one_node():
    # two peaks merging along a flat valley of three vertices
    t = build_merge_tree(field([3, 1, 1, 1, 4]))
    assert len(t.leaves) == 2
    assert sorted(t.values) == [1.0, 3.0, 4.0]


def test_tree_metric_matches_df():
    rng = np.random.default_rng(2)
    for g in (path_graph(30), grid_graph(5, 5), cycle_graph(12)):
        for _ in range(5):
            f = ScalarField(g, rng.normal(size=g.vertex_count))
            t = build_merge_tree(f)
            D = df_matrix(f)
            for x in range(len(f)):
                for y in range(len(f)):
                    assert abs(t.vertex_distance(x, y) - D[x, y]) <= 1e-12


def test_height_above():
    t = example_tree()
    node2 = int(np.flatnonzero(t.values == 2.0)[0])
    assert height_above(t, node2) == 2.0
    assert height_above(t, t.root) == 3.0
    assert all(height_above(t, v) == 0 for v in t.leaves)


def test_tree_rejects_bad_structure():
    with pytest.raises(InvalidInputError):
        MergeTree([0, 1], [-1, -1])
    with pytest.raises(InvalidInputError):
        MergeTree([0, 0], [-1, 0])


def test_json_roundtrip():
    t = random_merge_tree(np.random.default_rng(5), 12)
    back = MergeTree.from_dict(json.loads(json.dumps(t.to_dict())))
    assert np.array_equal(back.values, t.values)
    assert np.array_equal(back.parent, t.parent)


# ---------------------------------------------------------------- trimming


def test_trim_example():
    t = example_tree()
    tt = trim(t, 1.5)
    assert len(tt.leaves) == 1
    assert sorted(tt.values) == [1.0, 2.5]
    assert leaf_count(t, 0.5) == 2
    assert leaf_count(t, 1.5) == 1
    assert total_length(t) == 4.0


def test_trim_beyond_range():
    t = example_tree()
    tt = trim(t, 3.5)
    assert len(tt) == 1 and tt.values[0] == 1.0
    assert leaf_count(t, 3.5) == 0
    assert total_length(t, 3.5) == 0.0


def test_trim_rejects_nonpositive_eps():
    with pytest.raises(InvalidInputError):
        trim(example_tree(), 0.0)
    with pytest.raises(InvalidInputError):
        leaf_count(example_tree(), -1.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 25), st.floats(0.01, 2.0), st.floats(0.01, 2.0))
def test_trim_composes_additively(seed, leaves, a, b):
    t = random_merge_tree(np.random.default_rng(seed), leaves)
    left = trim(trim(t, a), b)
    right = trim(t, a + b)
    assert np.allclose(sorted(left.values), sorted(right.values), atol=1e-12)
    assert len(left.leaves) == len(right.leaves)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 25), st.floats(0.001, 3.0))
def test_leaf_count_and_length_match_barcode(seed, leaves, eps):
    t = random_merge_tree(np.random.default_rng(seed), leaves)
    lengths = bar_lengths(t)
    assert leaf_count(t, eps) == int(np.sum(lengths > eps))
    assert total_length(t, eps) == pytest.approx(np.sum(np.clip(lengths - eps, 0, None)),
                                                 rel=1e-9, abs=1e-12)
    tt = trim(t, eps)
    if leaf_count(t, eps):
        assert len(tt.leaves) == leaf_count(t, eps)
        assert total_length(tt) == pytest.approx(total_length(t, eps), rel=1e-9, abs=1e-12)
        # every surviving point keeps at least eps of the original tree above it
        assert tt.subtree_max[tt.root] == pytest.approx(t.subtree_max[t.root] - eps)


def test_leaf_count_small_eps_is_total():
    t = random_merge_tree(np.random.default_rng(3), 17)
    assert leaf_count(t, 1e-9) == len(t.leaves) == 17


# ---------------------------------------------------------------- canonical form


def relabel(t, rng):
    perm = rng.permutation(len(t))
    inv = np.argsort(perm)
    values = t.values[perm]
    parent = np.array([inv[t.parent[v]] if t.parent[v] >= 0 else -1 for v in perm])
    return MergeTree(values, parent)


def test_canonical_form_ignores_labels_and_order():
    rng = np.random.default_rng(0)
    for _ in range(30):
        t = random_merge_tree(rng, int(rng.integers(1, 15)))
        u = relabel(t, rng)
        assert canonical_form(t) == canonical_form(u)
        assert isometric(t, u)


def test_canonical_form_mirror_and_subdivision():
    a = MergeTree([0, 1, 2, 3], [-1, 0, 1, 1])
    b = MergeTree([0, 1, 3, 2], [-1, 0, 1, 1])
    assert canonical_form(a) == canonical_form(b)
    # subdividing the root edge at 0.5 gives the same metric tree
    c = MergeTree([0, 0.5, 1, 2, 3], [-1, 0, 1, 2, 2])
    assert canonical_form(a) == canonical_form(c) and isometric(a, c)


def test_canonical_form_sees_small_changes():
    a = MergeTree([0, 1, 2, 3], [-1, 0, 1, 1])
    b = MergeTree([0, 1, 2.001, 3], [-1, 0, 1, 1])
    assert canonical_form(a) != canonical_form(b)
    assert not isometric(a, b)


def test_canonical_form_agrees_with_isometry_oracle():
    rng = np.random.default_rng(11)
    for _ in range(80):
        t = random_merge_tree(rng, int(rng.integers(1, 8)))
        vals = t.values.copy()
        if rng.random() < 0.5:
            # perturb one non-root value without breaking monotonicity
            v = int(rng.integers(1, len(t)))
            vals[v] += 1e-6
            if any(vals[c] <= vals[v] for c in t.children[v]):
                continue
        u = relabel(MergeTree(vals, t.parent), rng)
        assert (canonical_form(t) == canonical_form(u)) == isometric(t, u)


# ---------------------------------------------------------------- contours


def test_dyck_of_a_segment_is_a_tent():
    t = MergeTree([1.0, 3.0], [-1, 0])
    f, interval = dyck_path(t)
    assert list(f.values) == [1.0, 3.0, 1.0]
    assert interval.length == 4.0 and interval.marks == (2.0,)


def test_dyck_unit_binary_tree_length():
    t = MergeTree([0, 1, 2, 2], [-1, 0, 1, 1])
    assert dyck_path(t)[1].length == 4 * 2 - 2


def test_dyck_roundtrip_random_trees():
    rng = np.random.default_rng(4)
    for _ in range(100):
        t = random_merge_tree(rng, int(rng.integers(1, 41)))
        f, marks = dyck_path(t, scale=float(rng.uniform(0.1, 3)))
        back = build_merge_tree(f)
        assert canonical_form(back) == canonical_form(t)
        assert len(marks.marks) == len(t.leaves)


def test_dyck_roundtrip_small_trees_by_isometry():
    rng = np.random.default_rng(8)
    for _ in range(40):
        t = random_merge_tree(rng, int(rng.integers(1, 7)))
        assert isometric(build_merge_tree(dyck_path(t)[0]), t)


def test_unit_edge_contour_bound():
    rng = np.random.default_rng(6)
    for _ in range(50):
        n = int(rng.integers(2, 30))
        t = unit_edge_tree(rng, n)
        assert len(t.leaves) == n
        assert dyck_path(t)[1].length <= 4 * n - 2


def test_compose_intervals():
    I = MarkedInterval(2.0, (1.0,))
    J = MarkedInterval(3.0, (0.5, 2.0))
    out = compose_intervals(I, [J])
    assert out.length == 5.0
    assert out.marks == (1.5, 3.0)
    zero = compose_intervals(MarkedInterval(2.0, (0.5, 1.5)),
                             [MarkedInterval(0.0, (0.0,))] * 2)
    assert zero.length == 2.0 and zero.marks == (0.5, 1.5)
    with pytest.raises(InvalidInputError):
        compose_intervals(I, [J, J])


# ---------------------------------------------------------------- approximants


@pytest.mark.parametrize("seed", range(8))
def test_approximants_realize_trimmed_trees(seed):
    rng = np.random.default_rng(seed)
    t = random_merge_tree(rng, int(rng.integers(2, 30)))
    a = float(t.subtree_max[t.root] - t.values[t.root]) / 2
    fs = approximate_from_tree(t, a, 0.3, 6)
    for k, f in enumerate(fs, start=1):
        assert canonical_form(build_merge_tree(f)) == canonical_form(trim(t, a / 2 ** k))
    for i in range(len(fs)):
        for j in range(i + 1, len(fs)):
            assert fs[i].sup_distance(fs[j]) <= a * 2.0 ** -(i + 1) + 1e-12


def test_cascade_cauchy_bound():
    c = cascade_tree(8)
    fs = approximate_from_tree(c, 1.0, 0.25, 8)
    for k, f in enumerate(fs, start=1):
        assert canonical_form(build_merge_tree(f)) == canonical_form(trim(c, 2.0 ** -k))
    ratios = [fs[i].sup_distance(fs[j]) / 2.0 ** -(i + 1)
              for i in range(8) for j in range(i + 1, 8)]
    assert max(ratios) <= 1.0


def test_approximants_of_a_tall_tree_only_grow_their_tips():
    # no branch is shorter than a: the shape is fixed from step 1 on and the
    # leaf tips rise by exactly a / 2**(k+1) per step
    t = MergeTree([0, 1, 3, 4], [-1, 0, 1, 1])
    fs = approximate_from_tree(t, 1.0, 0.5, 4)
    shapes = {len(build_merge_tree(f).leaves) for f in fs}
    assert shapes == {2}
    for k in range(3):
        assert fs[k].sup_distance(fs[k + 1]) == pytest.approx(2.0 ** -(k + 2))


def test_approximant_lengths_stay_bounded():
    c = cascade_tree(8)
    lengths = approximant_interval_lengths(c, 1.0, 0.25, 8)
    assert np.all(np.diff(lengths) >= 0)
    assert lengths[-1] < 2 * lengths[0] + 10


def test_approximate_rejects_bad_lambda():
    with pytest.raises(InvalidInputError):
        approximate_from_tree(cascade_tree(2), 1.0, 1.0, 2)


# ---------------------------------------------------------------- distortion


def test_distortion_of_identical_and_shifted_fields():
    f = gen_fbm(300, 0.5, 0)
    assert distortion_bound(f, f) == 0.0
    assert distortion_bound(f, f.with_values(f.values + 3.0)) == pytest.approx(0.0, abs=1e-12)


def test_distortion_within_twice_sup_distance():
    for seed in range(5):
        f = gen_fbm(200, 0.5, seed)
        g = f.with_values(f.values + 0.1 * np.sin(np.arange(200)))
        assert distortion_bound(f, g) <= 2 * f.sup_distance(g) + 1e-12


def test_distortion_sampled_pairs_on_large_fields():
    f = gen_fbm(5000, 0.5, 1)
    g = f.with_values(f.values * 1.01)
    pairs = np.random.default_rng(0).integers(0, 5000, size=(200, 2))
    D = df_matrix(f) - df_matrix(g)
    expect = 0.5 * np.max(np.abs(D[pairs[:, 0], pairs[:, 1]]))
    assert distortion_bound(f, g, pairs=pairs) == pytest.approx(expect, abs=1e-12)


def test_distortion_mismatched_graphs():
    with pytest.raises(InvalidInputError):
        distortion_bound(gen_fbm(10, 0.5, 0), gen_fbm(11, 0.5, 0))
