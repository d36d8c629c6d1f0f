"""Stochastic rooted 3-Cayley tree generation.

Both model variants grow a tree breadth-first: the order-1 node always
bifurcates, and each candidate node at order k >= 2 independently branches
with probability p_k — a constant p (homogeneous) or
min{b·exp(−a·k) + c, 1} (inhomogeneous). Generation is finite with
probability 1 while p (resp. the plateau c) stays below the critical value
1/2; supercritical parameters require an explicit opt-in and still hit the
max_order cap as a hard error, never a silent truncation.

Reproducibility: a tree is a pure function of (model, seed); population
member i uses the substream seed derived from (master_seed, i), so results
are independent of execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DivergenceError, TruncationError
from .tree import Tree

CRITICAL_P = 0.5
DEFAULT_MAX_ORDER = 10_000

# mean_size series: stop once a term falls below this fraction of the sum
_SERIES_RTOL = 1e-12
_SERIES_MAX_TERMS = 1_000_000


@dataclass(frozen=True)
class BranchModel:
    variant: str  # "homogeneous" | "inhomogeneous"
    p: float | None = None
    a: float | None = None
    b: float | None = None
    c: float | None = None
    max_order: int = DEFAULT_MAX_ORDER
    allow_supercritical: bool = False

    def __post_init__(self):
        if self.max_order < 1:
            raise ValueError("max_order must be positive")
        if self.variant == "homogeneous":
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ValueError(f"homogeneous model needs 0 <= p <= 1, got {self.p}")
            if self.p >= CRITICAL_P and not self.allow_supercritical:
                raise DivergenceError(
                    f"p = {self.p} is supercritical (p_c = 0.5); generation may "
                    "never terminate — pass allow_supercritical=True to cap it "
                    "at max_order")
        elif self.variant == "inhomogeneous":
            if self.a is None or self.b is None or self.c is None:
                raise ValueError("inhomogeneous model needs a, b, c")
            if self.a < 0 or self.b < 0 or self.c < 0:
                raise ValueError(
                    f"a, b, c must be >= 0, got ({self.a}, {self.b}, {self.c})")
            if self.c >= CRITICAL_P and not self.allow_supercritical:
                raise DivergenceError(
                    f"plateau c = {self.c} is supercritical (p_c = 0.5); pass "
                    "allow_supercritical=True to cap generation at max_order")
        else:
            raise ValueError(f"unknown variant {self.variant!r}")

    @classmethod
    def homogeneous(cls, p: float, **kw) -> "BranchModel":
        return cls(variant="homogeneous", p=p, **kw)

    @classmethod
    def inhomogeneous(cls, a: float, b: float, c: float, **kw) -> "BranchModel":
        return cls(variant="inhomogeneous", a=a, b=b, c=c, **kw)

    def kernel_params(self) -> tuple:
        """(a, b, c) for the generation kernel; homogeneous p maps to (0, 0, p)."""
        if self.variant == "homogeneous":
            return 0.0, 0.0, float(self.p)
        return float(self.a), float(self.b), float(self.c)

    def to_dict(self) -> dict:
        d = {"variant": self.variant, "max_order": self.max_order}
        if self.variant == "homogeneous":
            d["p"] = self.p
        else:
            d.update(a=self.a, b=self.b, c=self.c)
        return d


def branching_probability(model: BranchModel, k: int) -> float:
    """p_k: 1 at k = 1 (the first branching is unconditional), the model's
    probability at k >= 2."""
    if k < 1:
        raise ValueError("orders are 1-based")
    if k == 1:
        return 1.0
    a, b, c = model.kernel_params()
    return min(b * math.exp(-a * k) + c, 1.0)


def generate(model: BranchModel, seed: int) -> Tree:
    """One virtual tree; pure function of (model, seed)."""
    a, b, c = model.kernel_params()
    status, parent = _kernels.generate_parents(seed, a, b, c, model.max_order)
    if status != 0:
        raise TruncationError(
            f"tree exceeded max_order={model.max_order} "
            f"(model {model.to_dict()}, seed {seed})", seed=seed)
    return Tree(parent=parent, lengths=None, kind="virtual", seed=int(seed))


def generate_population(model: BranchModel, count: int, master_seed: int) -> list:
    """count trees with per-tree substream seeds derived from master_seed."""
    if count < 1:
        raise ValueError("count must be >= 1")
    trees = []
    for i in range(count):
        seed = _kernels.substream_seed(master_seed, i)
        try:
            trees.append(generate(model, seed))
        except TruncationError as exc:
            raise TruncationError(f"{exc} at population index {i}",
                                  seed=seed, index=i) from None
    return trees


# stats columns produced by simulate_population_stats
STATS_COLUMNS = ("N", "k_max", "j_max", "nB", "nM", "nS",
                 "A", "eligible_A", "E_p", "eligible_Ep")


def simulate_population_stats(model: BranchModel, count: int,
                              master_seed: int) -> np.ndarray:
    """Per-tree stats for a whole population without materializing trees.

    Returns an (count, 10) array with STATS_COLUMNS; A and E_p are NaN where
    undefined. Orders of magnitude faster than generate_population +
    compute_metrics for large populations.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    a, b, c = model.kernel_params()
    status, idx, stats = _kernels.simulate_stats(master_seed, count, a, b, c,
                                                 model.max_order)
    if status != 0:
        raise TruncationError(
            f"tree exceeded max_order={model.max_order} at population index "
            f"{idx} (model {model.to_dict()}, master_seed {master_seed})",
            seed=_kernels.substream_seed(master_seed, idx), index=int(idx))
    return stats


def mean_size(model: BranchModel) -> float:
    """Expected branching-node count ⟨N⟩.

    Homogeneous: 1/(1 − 2p) in closed form. Inhomogeneous: the series
    1 + Σ_{k>=2} 2^{k−1} Π_{m=2..k} p_m, truncated once a term drops below
    1e-12 of the running sum (term ratio tends to 2c < 1, so truncation is
    always detected).
    """
    if model.variant == "homogeneous":
        if model.p >= CRITICAL_P:
            raise DivergenceError(
                f"mean size diverges for p = {model.p} >= 0.5")
        return 1.0 / (1.0 - 2.0 * model.p)
    a, b, c = model.kernel_params()
    if c >= CRITICAL_P:
        raise DivergenceError(f"mean size diverges for plateau c = {c} >= 0.5")
    total = 1.0
    term = 1.0  # 2^{k-1} Π p_m, built incrementally
    k = 2
    while k <= _SERIES_MAX_TERMS:
        pk = min(b * math.exp(-a * k) + c, 1.0)
        term *= 2.0 * pk
        total += term
        if term < _SERIES_RTOL * total:
            return total
        k += 1
    raise DivergenceError(
        f"mean-size series did not converge within {_SERIES_MAX_TERMS} terms "
        f"(a={a}, b={b}, c={c})")


def solve_homogeneous_p(target_mean: float) -> float:
    """Invert ⟨N⟩ = 1/(1 − 2p): p = (1 − 1/⟨N⟩)/2."""
    if target_mean < 1:
        raise ValueError(f"target mean size must be >= 1, got {target_mean}")
    return (1.0 - 1.0 / target_mean) / 2.0


def substream_seed(master_seed: int, index: int) -> int:
    """Seed used for population member ``index`` under ``master_seed``."""
    return _kernels.substream_seed(master_seed, index)
