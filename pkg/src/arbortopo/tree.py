"""Canonical rooted binary tree.

A tree is stored as a parent-index array in topological order:

* node 0 is the soma stub (``parent[0] == -1``) and has exactly one child,
  the order-1 node;
* every other node has 0 or 2 children;
* ``parent[i] < i`` for all i >= 1, so single forward/reverse passes work.

Orders count branches on the path to the soma (stub at order 0, its child at
order 1, terminals included). ``lengths[i]`` is the geometric length in um of
the edge from ``parent[i]`` to node ``i`` (``lengths[0] == 0``); trees from
the generator carry no lengths.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import TreeInvariantError

SCHEMA_VERSION = 1


@dataclass
class Tree:
    parent: np.ndarray
    lengths: np.ndarray | None = None
    kind: str = "unknown"
    source: str | None = None
    seed: int | None = None
    stem_point_id: int | None = None
    axon_tie_break: bool = False
    _arrays: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.parent = np.ascontiguousarray(self.parent, dtype=np.int32)
        if self.lengths is not None:
            self.lengths = np.ascontiguousarray(self.lengths, dtype=np.float64)

    @property
    def n_nodes(self) -> int:
        return int(self.parent.shape[0])

    def node_arrays(self):
        """(child1, child2, nchild, order, terminal_count) — cached."""
        if self._arrays is None:
            self._arrays = _kernels.node_arrays(self.parent)
        return self._arrays

    @property
    def orders(self) -> np.ndarray:
        return self.node_arrays()[3]

    @property
    def n_branching(self) -> int:
        """N: number of branching nodes."""
        return int(np.count_nonzero(self.node_arrays()[2] == 2))

    @property
    def n_terminals(self) -> int:
        return int(np.count_nonzero(self.node_arrays()[2] == 0))

    def validate(self) -> None:
        """Raise TreeInvariantError unless every canonical invariant holds."""
        m = self.n_nodes
        if m < 2:
            raise TreeInvariantError("tree must have a stub and at least one node")
        if self.parent[0] != -1:
            raise TreeInvariantError("node 0 must be the root stub (parent -1)")
        idx = np.arange(m)
        if np.any(self.parent[1:] < 0) or np.any(self.parent[1:] >= idx[1:]):
            raise TreeInvariantError("parent indices must satisfy 0 <= parent[i] < i")
        nchild = self.node_arrays()[2]
        if nchild[0] != 1:
            raise TreeInvariantError("root stub must have exactly one child")
        rest = nchild[1:]
        if np.any((rest != 0) & (rest != 2)):
            raise TreeInvariantError("every non-stub node must have 0 or 2 children")
        if self.n_branching < 1:
            raise TreeInvariantError("tree must contain at least one branching node")
        if self.lengths is not None:
            if self.lengths.shape[0] != m:
                raise TreeInvariantError("lengths must align with nodes")
            if self.lengths[0] != 0.0:
                raise TreeInvariantError("stub edge length must be 0")
            if np.any(self.lengths < 0) or not np.all(np.isfinite(self.lengths)):
                raise TreeInvariantError("edge lengths must be finite and >= 0")

    def to_dict(self) -> dict:
        orders = self.orders
        lens = self.lengths
        nodes = []
        for i in range(self.n_nodes):
            node = {
                "id": i,
                "parent": int(self.parent[i]),
                "order": int(orders[i]),
                "edge_length_um": None if lens is None else float(lens[i]),
            }
            nodes.append(node)
        return {
            "kind": self.kind,
            "seed": self.seed,
            "stem_point_id": self.stem_point_id,
            "axon_tie_break": self.axon_tie_break,
            "nodes": nodes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        nodes = sorted(d["nodes"], key=lambda n: n["id"])
        if [n["id"] for n in nodes] != list(range(len(nodes))):
            raise TreeInvariantError("node ids must be 0..m-1")
        parent = np.array([n["parent"] for n in nodes], dtype=np.int32)
        raw = [n.get("edge_length_um") for n in nodes]
        if all(v is None for v in raw):
            lengths = None
        elif any(v is None for v in raw):
            raise TreeInvariantError("edge lengths must be all present or all absent")
        else:
            lengths = np.array(raw, dtype=np.float64)
        tree = cls(
            parent=parent,
            lengths=lengths,
            kind=d.get("kind", "unknown"),
            seed=d.get("seed"),
            stem_point_id=d.get("stem_point_id"),
            axon_tie_break=bool(d.get("axon_tie_break", False)),
        )
        order = tree.orders
        for n in nodes:
            if n["order"] != int(order[n["id"]]):
                raise TreeInvariantError(
                    f"stored order {n['order']} of node {n['id']} disagrees with "
                    f"topology ({int(order[n['id']])})")
        return tree


def from_parent_list(parent, lengths=None, **kw) -> Tree:
    """Build and validate a Tree from a plain parent sequence."""
    t = Tree(parent=np.asarray(parent, dtype=np.int32),
             lengths=None if lengths is None else np.asarray(lengths, dtype=np.float64),
             **kw)
    t.validate()
    return t
