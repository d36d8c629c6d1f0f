"""Per-tree and per-population morphometrics.

Per-tree record: size N, topological length k_max and width j_max, B/M/S
class fractions, tree asymmetry A, excess partition asymmetry E_p, and total
geometric length L. A and E_p can be undefined (None): A when every
branching node splits (1,1), E_p when the tree has no B-type node. L is None
for trees without geometric lengths (generated ones).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, asdict

import numpy as np

from . import _kernels
from .errors import UndefinedPartitionError
from .tree import Tree

METRICS_COLUMNS = ("kind", "N", "k_max", "j_max", "b_frac", "m_frac",
                   "s_frac", "A", "E_p", "L")


def partition_asymmetry(r: int, s: int) -> float:
    """A_p(r, s) = |r - s| / (r + s - 2) for subtree terminal counts.

    The (1, 1) partition is excluded by definition and raises.
    """
    if r < 1 or s < 1:
        raise ValueError(f"terminal counts must be >= 1, got ({r}, {s})")
    if r == 1 and s == 1:
        raise UndefinedPartitionError("A_p is undefined for the (1, 1) partition")
    return abs(r - s) / (r + s - 2)


def tree_asymmetry(tree: Tree):
    """Unweighted mean of A_p over eligible branching nodes; None if none."""
    stats = _kernels.tree_stats(tree.parent)
    return None if math.isnan(stats[6]) else float(stats[6])


def excess_asymmetry(tree: Tree):
    """Mean node excess A_p over B-type nodes; None without any B node.

    A node's excess is its observed A_p minus the mean A_p over the three
    pairings of its four granddaughter subtrees into two pairs.
    """
    stats = _kernels.tree_stats(tree.parent)
    return None if math.isnan(stats[8]) else float(stats[8])


def total_length(tree: Tree):
    """Sum of all edge lengths in um (synthetic zero edges included)."""
    if tree.lengths is None:
        return None
    return float(np.sum(tree.lengths))


@dataclass
class TreeMetrics:
    kind: str
    N: int
    k_max: int
    j_max: int
    b_frac: float
    m_frac: float
    s_frac: float
    A: float | None
    E_p: float | None
    L: float | None
    eligible_A: int
    eligible_Ep: int

    def csv_row(self) -> list:
        d = asdict(self)
        return [_fmt(d[c]) for c in METRICS_COLUMNS]


def _fmt(v):
    if v is None:
        return ""
    return str(v)


def compute_metrics(tree: Tree) -> TreeMetrics:
    N, kmax, jmax, nB, nM, nS, A, a_n, Ep, ep_n = _kernels.tree_stats(tree.parent)
    N = int(N)
    return TreeMetrics(
        kind=tree.kind,
        N=N,
        k_max=int(kmax),
        j_max=int(jmax),
        b_frac=nB / N,
        m_frac=nM / N,
        s_frac=nS / N,
        A=None if math.isnan(A) else float(A),
        E_p=None if math.isnan(Ep) else float(Ep),
        L=total_length(tree),
        eligible_A=int(a_n),
        eligible_Ep=int(ep_n),
    )


@dataclass
class MetricSummary:
    mean: float | None
    sem: float | None
    median: float | None
    n: int


@dataclass
class PopulationSummary:
    stats: dict
    conditional: np.ndarray  # rows (N, mean_k_max, mean_j_max, group size)
    n_trees: int

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "stats": {k: asdict(v) for k, v in self.stats.items()},
            "conditional_by_N": [
                {"N": int(r[0]), "mean_k_max": float(r[1]),
                 "mean_j_max": float(r[2]), "n": int(r[3])}
                for r in self.conditional
            ],
        }


def _summary(values) -> MetricSummary:
    vals = np.array([v for v in values if v is not None], dtype=np.float64)
    n = vals.size
    if n == 0:
        return MetricSummary(mean=None, sem=None, median=None, n=0)
    sem = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else None
    return MetricSummary(mean=float(vals.mean()), sem=sem,
                         median=float(np.median(vals)), n=n)


def conditional_means(sizes, values, min_group_size: int = 0) -> np.ndarray:
    """Group ``values`` by exact size N; rows (N, group mean, group count).

    Groups smaller than min_group_size are dropped (the rule applied to
    simulated populations; pass 0 to keep every group).
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    uniq, inv = np.unique(sizes, return_inverse=True)
    counts = np.bincount(inv)
    sums = np.bincount(inv, weights=values)
    keep = counts >= max(min_group_size, 1)
    out = np.empty((int(keep.sum()), 3), dtype=np.float64)
    out[:, 0] = uniq[keep]
    out[:, 1] = sums[keep] / counts[keep]
    out[:, 2] = counts[keep]
    return out


def summarize(metrics, min_group_size: int = 0) -> PopulationSummary:
    """Population summary: per-metric mean/sem/median/n plus ⟨k_max|N⟩, ⟨j_max|N⟩.

    Trees with undefined A, E_p, or L drop out of those metrics only.
    """
    metrics = list(metrics)
    if not metrics:
        raise ValueError("empty population")
    stats = {}
    for name in ("N", "k_max", "j_max", "b_frac", "m_frac", "s_frac",
                 "A", "E_p", "L"):
        stats[name] = _summary(getattr(m, name) for m in metrics)
    sizes = np.array([m.N for m in metrics], dtype=np.int64)
    ck = conditional_means(sizes, [m.k_max for m in metrics], min_group_size)
    cj = conditional_means(sizes, [m.j_max for m in metrics], min_group_size)
    # identical grouping for both metrics, so the N columns line up
    cond = np.column_stack([ck[:, 0], ck[:, 1], cj[:, 1], ck[:, 2]])
    return PopulationSummary(stats=stats, conditional=cond, n_trees=len(metrics))


def branch_length_by_order(trees) -> list:
    """Rows (order, mean_length, sem, n) over branches ending at each order.

    Only trees carrying geometric lengths contribute; the stub pseudo-edge is
    ignored. sem is None for single-sample bins.
    """
    by_order = {}
    for t in trees:
        if t.lengths is None:
            continue
        orders = t.orders
        for k, ln in zip(orders[1:], t.lengths[1:]):
            by_order.setdefault(int(k), []).append(float(ln))
    rows = []
    for k in sorted(by_order):
        vals = np.array(by_order[k])
        n = vals.size
        sem = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else None
        rows.append((k, float(vals.mean()), sem, n))
    return rows


def write_metrics_csv(path, metrics) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(METRICS_COLUMNS)
        for m in metrics:
            w.writerow(m.csv_row())


def read_metrics_csv(path) -> list:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append(TreeMetrics(
                kind=row["kind"],
                N=int(row["N"]),
                k_max=int(row["k_max"]),
                j_max=int(row["j_max"]),
                b_frac=float(row["b_frac"]),
                m_frac=float(row["m_frac"]),
                s_frac=float(row["s_frac"]),
                A=float(row["A"]) if row["A"] else None,
                E_p=float(row["E_p"]) if row["E_p"] else None,
                L=float(row["L"]) if row["L"] else None,
                eligible_A=0,
                eligible_Ep=0,
            ))
    return out
