"""Order assignment, per-order accounting, and subtree combinatorics.

Orders are 1-based: the soma stub's single child carries order 1, and k_max
ranges over every node including terminals, so the smallest possible tree
(one bifurcation) has k_max = 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tree import Tree


@dataclass
class OrderProfile:
    """Per-order branching counts for one tree.

    j[i] is the branching-node count at order i+1; total[i] counts all nodes
    (branching + terminal) at order i+1. total[0] == 1 (the order-1 node) and
    total at order k equals 2*j_{k-1} for k >= 2.
    """
    j: np.ndarray
    total: np.ndarray
    k_max: int
    j_max: int
    n_branching: int

    def j_at(self, k: int) -> int:
        """Branching-node count at order k (0 beyond k_max)."""
        if k < 1:
            raise ValueError("orders are 1-based")
        return int(self.j[k - 1]) if k <= len(self.j) else 0


def order_profile(tree: Tree) -> OrderProfile:
    _, _, nchild, order, _ = tree.node_arrays()
    k_max = int(order.max())
    branching = nchild == 2
    j = np.bincount(order[branching], minlength=k_max + 1)[1:]
    total = np.bincount(order[1:], minlength=k_max + 1)[1:]
    return OrderProfile(j=j.astype(np.int64), total=total.astype(np.int64),
                        k_max=k_max, j_max=int(j.max()),
                        n_branching=int(j.sum()))


def subtree_counts(tree: Tree) -> np.ndarray:
    """(r, s) terminal counts of the two subtrees of every branching node.

    One row per branching node, in node-index order.
    """
    child1, child2, nchild, _, term = tree.node_arrays()
    branching = np.flatnonzero(nchild == 2)
    out = np.empty((branching.size, 2), dtype=np.int64)
    out[:, 0] = term[child1[branching]]
    out[:, 1] = term[child2[branching]]
    return out


def classify_nodes(tree: Tree) -> dict:
    """Count branching nodes by class: B (both children branch), M (one), S (none)."""
    child1, child2, nchild, _, _ = tree.node_arrays()
    branching = np.flatnonzero(nchild == 2)
    nb = (nchild[child1[branching]] == 2).astype(np.int64) \
        + (nchild[child2[branching]] == 2).astype(np.int64)
    return {
        "B": int(np.count_nonzero(nb == 2)),
        "M": int(np.count_nonzero(nb == 1)),
        "S": int(np.count_nonzero(nb == 0)),
    }


def profile_rows(profile: OrderProfile) -> list:
    """(order, j_k, total_nodes_k) rows for CSV export."""
    return [(k + 1, int(profile.j[k]), int(profile.total[k]))
            for k in range(len(profile.j))]
