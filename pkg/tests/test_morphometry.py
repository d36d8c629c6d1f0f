"""Asymmetry measures, per-tree metrics, and population summaries."""

import math

import numpy as np
import pytest

from arbortopo.errors import UndefinedPartitionError
from arbortopo.morphometry import (branch_length_by_order, compute_metrics,
                                   conditional_means, excess_asymmetry,
                                   partition_asymmetry, read_metrics_csv,
                                   summarize, tree_asymmetry,
                                   write_metrics_csv)
from arbortopo.tree import Tree
from conftest import make_caterpillar


def test_partition_asymmetry_values():
    assert partition_asymmetry(2, 2) == 0.0
    assert partition_asymmetry(3, 1) == 1.0
    assert partition_asymmetry(5, 3) == pytest.approx(1 / 3, abs=0)
    assert partition_asymmetry(1, 2) == 1.0


def test_partition_asymmetry_domain():
    with pytest.raises(UndefinedPartitionError):
        partition_asymmetry(1, 1)
    with pytest.raises(ValueError):
        partition_asymmetry(0, 2)


def test_tree_asymmetry_undefined_for_single_bifurcation(single_bifurcation):
    assert tree_asymmetry(single_bifurcation) is None


def test_tree_asymmetry_caterpillar_is_one(caterpillar3):
    # eligible partitions (3,1) and (2,1) are both maximal
    assert tree_asymmetry(caterpillar3) == 1.0
    for n in (2, 5, 11):
        assert tree_asymmetry(make_caterpillar(n)) == 1.0


def test_tree_asymmetry_perfect_tree(perfect_depth2):
    # only the root is eligible, with the symmetric partition (2,2)
    assert tree_asymmetry(perfect_depth2) == 0.0


def test_excess_asymmetry_perfect_depth3_is_zero(perfect_depth3):
    assert excess_asymmetry(perfect_depth3) == 0.0


def test_excess_asymmetry_undefined_without_b_nodes(caterpillar3):
    assert excess_asymmetry(caterpillar3) is None


def test_excess_asymmetry_invariant_granddaughters():
    # root's granddaughter terminal counts are (3,1,1,1): every pairing gives
    # the same partition (4,2), so the excess vanishes
    parent = np.array([-1, 0, 1, 2, 3, 4, 4, 3, 2, 1, 9, 9], dtype=np.int32)
    t = Tree(parent=parent)
    t.validate()
    assert t.n_branching == 5 and t.n_terminals == 6
    assert excess_asymmetry(t) == 0.0
    a = tree_asymmetry(t)
    assert a == pytest.approx((0.5 + 1.0 + 1.0) / 3, rel=1e-15)


def test_compute_metrics_fields(caterpillar3):
    t = Tree(parent=caterpillar3.parent,
             lengths=np.array([0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]),
             kind="dendrite")
    m = compute_metrics(t)
    assert m.kind == "dendrite"
    assert (m.N, m.k_max, m.j_max) == (3, 4, 1)
    assert (m.b_frac, m.m_frac, m.s_frac) == (0.0, 2 / 3, 1 / 3)
    assert m.A == 1.0 and m.eligible_A == 2
    assert m.E_p is None and m.eligible_Ep == 0
    assert m.L == 28.0


def test_metrics_csv_round_trip(tmp_path, caterpillar3, single_bifurcation):
    ms = [compute_metrics(Tree(parent=caterpillar3.parent, kind="axon")),
          compute_metrics(single_bifurcation)]
    path = tmp_path / "metrics.csv"
    write_metrics_csv(path, ms)
    back = read_metrics_csv(path)
    assert len(back) == 2
    assert back[0].kind == "axon" and back[0].N == 3 and back[0].A == 1.0
    assert back[0].L is None
    assert back[1].A is None and back[1].E_p is None


def test_conditional_means_grouping():
    sizes = [3, 1, 3, 2, 3, 1]
    values = [6.0, 1.0, 9.0, 4.0, 3.0, 3.0]
    rows = conditional_means(sizes, values)
    assert rows.tolist() == [[1.0, 2.0, 2.0], [2.0, 4.0, 1.0], [3.0, 6.0, 3.0]]
    rows = conditional_means(sizes, values, min_group_size=2)
    assert rows.tolist() == [[1.0, 2.0, 2.0], [3.0, 6.0, 3.0]]


def test_summarize_basic(single_bifurcation, caterpillar3):
    ms = [compute_metrics(single_bifurcation), compute_metrics(caterpillar3)]
    s = summarize(ms)
    assert s.n_trees == 2
    assert s.stats["N"].mean == 2.0
    assert s.stats["N"].sem == pytest.approx(np.std([1, 3], ddof=1) / math.sqrt(2))
    assert s.stats["N"].median == 2.0
    # A defined for one tree only
    assert s.stats["A"].n == 1 and s.stats["A"].mean == 1.0
    assert s.stats["A"].sem is None
    assert s.stats["L"].n == 0 and s.stats["L"].mean is None
    d = s.to_dict()
    assert d["n_trees"] == 2
    assert {row["N"] for row in d["conditional_by_N"]} == {1, 3}


def test_summarize_empty_population_rejected():
    with pytest.raises(ValueError):
        summarize([])


def test_branch_length_by_order():
    t = Tree(parent=np.array([-1, 0, 1, 1], dtype=np.int32),
             lengths=np.array([0.0, 3.0, 4.0, 5.0]))
    rows = branch_length_by_order([t])
    assert rows[0] == (1, 3.0, None, 1)
    order2 = rows[1]
    assert order2[0] == 2 and order2[1] == 4.5 and order2[3] == 2
    assert order2[2] == pytest.approx(np.std([4.0, 5.0], ddof=1) / math.sqrt(2))
    # trees without lengths contribute nothing
    assert branch_length_by_order([Tree(parent=t.parent)]) == []
