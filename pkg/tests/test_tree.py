"""Canonical tree invariants and (de)serialization."""

import numpy as np
import pytest

from arbortopo.errors import TreeInvariantError
from arbortopo.tree import Tree, from_parent_list


def test_basic_properties(caterpillar3):
    t = caterpillar3
    assert t.n_nodes == 8
    assert t.n_branching == 3
    assert t.n_terminals == 4
    assert t.orders.tolist() == [0, 1, 2, 2, 3, 3, 4, 4]
    t.validate()


def test_validate_accepts_lengths(single_bifurcation):
    t = Tree(parent=single_bifurcation.parent,
             lengths=np.array([0.0, 3.0, 4.0, 5.0]))
    t.validate()


@pytest.mark.parametrize("parent,lengths,message", [
    ([-1], None, "at least one node"),
    ([0, 0, 1, 1], None, "root stub"),
    ([-1, 0, 1, 1, 1], None, "0 or 2 children"),
    ([-1, 0, 0, 1, 1], None, "exactly one child"),
    ([-1, 0], None, "at least one branching"),
    ([-1, 0, 1, 1], [0.0, 1.0], "align"),
    ([-1, 0, 1, 1], [1.0, 1.0, 1.0, 1.0], "stub edge"),
    ([-1, 0, 1, 1], [0.0, -1.0, 1.0, 1.0], "finite and >= 0"),
])
def test_validate_rejects(parent, lengths, message):
    t = Tree(parent=np.array(parent, dtype=np.int32),
             lengths=None if lengths is None else np.array(lengths))
    with pytest.raises(TreeInvariantError, match=message):
        t.validate()


def test_validate_rejects_forward_parent():
    t = Tree(parent=np.array([-1, 2, 1, 1], dtype=np.int32))
    with pytest.raises(TreeInvariantError, match="parent"):
        t.validate()


def test_round_trip_without_lengths(perfect_depth2):
    d = perfect_depth2.to_dict()
    back = Tree.from_dict(d)
    assert np.array_equal(back.parent, perfect_depth2.parent)
    assert back.lengths is None
    assert back.kind == "unknown"


def test_round_trip_with_lengths_and_metadata():
    t = Tree(parent=np.array([-1, 0, 1, 1], dtype=np.int32),
             lengths=np.array([0.0, 1.5, 2.5, 3.5]),
             kind="dendrite", stem_point_id=17, axon_tie_break=True)
    back = Tree.from_dict(t.to_dict())
    assert np.array_equal(back.parent, t.parent)
    assert np.array_equal(back.lengths, t.lengths)
    assert back.kind == "dendrite"
    assert back.stem_point_id == 17
    assert back.axon_tie_break is True


def test_from_dict_rejects_gapped_ids(single_bifurcation):
    d = single_bifurcation.to_dict()
    d["nodes"][2]["id"] = 5
    with pytest.raises(TreeInvariantError, match="ids"):
        Tree.from_dict(d)


def test_from_dict_rejects_partial_lengths(single_bifurcation):
    d = single_bifurcation.to_dict()
    d["nodes"][1]["edge_length_um"] = 2.0
    with pytest.raises(TreeInvariantError, match="all present or all absent"):
        Tree.from_dict(d)


def test_from_dict_rejects_inconsistent_order(single_bifurcation):
    d = single_bifurcation.to_dict()
    d["nodes"][3]["order"] = 9
    with pytest.raises(TreeInvariantError, match="order"):
        Tree.from_dict(d)


def test_from_parent_list_validates():
    t = from_parent_list([-1, 0, 1, 1], kind="axon")
    assert t.kind == "axon"
    with pytest.raises(TreeInvariantError):
        from_parent_list([-1, 0])
