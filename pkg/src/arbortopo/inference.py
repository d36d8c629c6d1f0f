"""Branching-frequency estimation, model fitting, and statistical tests.

Fits of the order-dependent branching probability use orders k >= 2 only:
p_1 ≡ 1 is structural (the first branching always happens), so order 1 is
reported in profiles but never enters a fit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy import stats as _sps

from . import _kernels
from .errors import FitError
from .topology_core import order_profile

DEFAULT_MIN_SAMPLES = 10

PROFILE_COLUMNS = ("order", "branching_count", "total_count", "frequency",
                   "included_in_fit")


@dataclass
class FitResult:
    model_form: str
    params: dict
    se: dict
    rss: float
    n_points: int
    note: str | None = None

    def to_dict(self) -> dict:
        return {"model_form": self.model_form, "params": dict(self.params),
                "se": dict(self.se), "rss": self.rss,
                "n_points": self.n_points, "note": self.note}


@dataclass
class TestResult:
    test_kind: str
    statistic: float
    p_value: float
    df: object = None
    n: object = None
    note: str | None = None

    def to_dict(self) -> dict:
        return {"test_kind": self.test_kind, "statistic": self.statistic,
                "p_value": self.p_value, "df": self.df, "n": self.n,
                "note": self.note}


@dataclass
class BranchingProfilePopulation:
    orders: np.ndarray
    branching_count: np.ndarray
    total_count: np.ndarray
    frequency: np.ndarray
    included: np.ndarray
    min_samples: int
    n_trees: int


def estimate_branching_frequencies(trees, min_samples: int = DEFAULT_MIN_SAMPLES,
                                   per_tree: bool = False) -> BranchingProfilePopulation:
    """Empirical p̂_k over a population.

    Default pools branching and total node counts across trees per order
    (one frequency per order per population); ``per_tree=True`` instead
    averages per-tree frequencies, as a sensitivity variant. Total nodes at
    order k follow the branching counts: 1 per tree at k = 1, 2·j_{k−1}
    at k >= 2. Orders whose pooled total is <= min_samples (and always
    order 1) are flagged out of fits.
    """
    trees = list(trees)
    if not trees:
        raise ValueError("empty population")
    profiles = [order_profile(t) for t in trees]
    deepest = max(len(p.j) for p in profiles)
    pooled_j = np.zeros(deepest + 1, dtype=np.int64)  # index = order - 1
    for p in profiles:
        pooled_j[:len(p.j)] += p.j
    total = np.empty(deepest + 1, dtype=np.int64)
    total[0] = len(trees)
    total[1:] = 2 * pooled_j[:-1]
    orders = np.arange(1, deepest + 2)
    keep = total > 0
    orders, pooled_j, total = orders[keep], pooled_j[keep], total[keep]

    if per_tree:
        freq_sum = np.zeros(orders.size)
        freq_n = np.zeros(orders.size, dtype=np.int64)
        for p in profiles:
            # orders 1..k_max have nodes in this tree (the last is all-terminal)
            k_top = len(p.j)
            t_tree = np.empty(k_top, dtype=np.int64)
            t_tree[0] = 1
            t_tree[1:] = 2 * p.j[:k_top - 1]
            freq_sum[:k_top] += p.j / t_tree
            freq_n[:k_top] += 1
        frequency = np.divide(freq_sum, freq_n, out=np.zeros_like(freq_sum),
                              where=freq_n > 0)
    else:
        frequency = pooled_j / total

    included = (total > min_samples) & (orders >= 2)
    return BranchingProfilePopulation(
        orders=orders, branching_count=pooled_j, total_count=total,
        frequency=frequency, included=included,
        min_samples=min_samples, n_trees=len(trees))


def write_profile_csv(path, profile: BranchingProfilePopulation) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(PROFILE_COLUMNS)
        for i in range(profile.orders.size):
            w.writerow([int(profile.orders[i]), int(profile.branching_count[i]),
                        int(profile.total_count[i]), float(profile.frequency[i]),
                        bool(profile.included[i])])


def _fit_exp(ks, ys, weights, with_plateau: bool) -> FitResult:
    if ks.size < 4:
        raise FitError(f"exponential fit needs >= 4 included orders, "
                       f"got {ks.size}")
    sw = np.sqrt(weights) if weights is not None else None

    def residuals(theta):
        if with_plateau:
            a, b, c = theta
            r = b * np.exp(-a * ks) + c - ys
        else:
            a, b = theta
            r = b * np.exp(-a * ks) - ys
        return r * sw if sw is not None else r

    b0 = max(float(ys[0] - ys[-1]), 0.01)
    c0 = max(float(ys[-1]), 0.0)
    n_par = 3 if with_plateau else 2
    lower = np.zeros(n_par)
    upper = np.full(n_par, np.inf)
    best = None
    failures = []
    for a0 in (0.1, 0.5, 1.0):
        x0 = [a0, b0, c0] if with_plateau else [a0, max(b0 + c0, 0.01)]
        try:
            res = optimize.least_squares(residuals, x0, bounds=(lower, upper),
                                         method="trf", ftol=1e-10, xtol=1e-12,
                                         gtol=1e-12, max_nfev=500)
        except Exception as exc:  # pragma: no cover - solver internal failure
            failures.append(f"start a={a0}: {exc}")
            continue
        # status 0 means the iteration cap stopped the solver; the cap is a
        # stop rule, not a failure, so the result still competes on cost
        if res.status < 0:
            failures.append(f"start a={a0}: {res.message}")
            continue
        if best is None or res.cost < best.cost:
            best = res
    if best is None:
        raise FitError("exponential fit did not converge from any start: "
                       + "; ".join(failures))
    rss = float(2.0 * best.cost)
    dof = ks.size - n_par
    s2 = rss / dof if dof > 0 else float("nan")
    jtj = best.jac.T @ best.jac
    cov = np.linalg.pinv(jtj) * s2
    ses = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    names = ("a", "b", "c")[:n_par]
    return FitResult(
        model_form="exp_plateau" if with_plateau else "exp_zero",
        params={nm: float(v) for nm, v in zip(names, best.x)},
        se={nm: float(v) for nm, v in zip(names, ses)},
        rss=rss, n_points=int(ks.size))


def _fit_inputs(profile: BranchingProfilePopulation, weighted: bool):
    sel = profile.included
    ks = profile.orders[sel].astype(np.float64)
    ys = profile.frequency[sel].astype(np.float64)
    weights = profile.total_count[sel].astype(np.float64) if weighted else None
    return ks, ys, weights


def fit_exp_plateau(profile: BranchingProfilePopulation,
                    weighted: bool = False) -> FitResult:
    """Least-squares fit of p_k = b·exp(−a·k) + c over included orders."""
    return _fit_exp(*_fit_inputs(profile, weighted), with_plateau=True)


def fit_exp_zero(profile: BranchingProfilePopulation,
                 weighted: bool = False) -> FitResult:
    """Two-parameter decay-to-zero variant: p_k = b·exp(−a·k)."""
    return _fit_exp(*_fit_inputs(profile, weighted), with_plateau=False)


def f_test_nested(restricted: FitResult, full: FitResult) -> TestResult:
    """F-test of a restricted model against a full model on the same points."""
    if restricted.n_points != full.n_points:
        raise ValueError("nested F-test needs both fits on the same data")
    p_r, p_f = len(restricted.params), len(full.params)
    if p_r >= p_f:
        raise ValueError("restricted model must have fewer parameters")
    n = full.n_points
    d1, d2 = p_f - p_r, n - p_f
    if d2 < 1:
        raise ValueError("not enough points for the F-test denominator")
    if full.rss == 0.0:
        return TestResult(test_kind="f_nested", statistic=float("inf"),
                          p_value=0.0, df=(d1, d2), n=n, note="perfect_fit")
    f_stat = max(((restricted.rss - full.rss) / d1) / (full.rss / d2), 0.0)
    return TestResult(test_kind="f_nested", statistic=float(f_stat),
                      p_value=float(_sps.f.sf(f_stat, d1, d2)),
                      df=(d1, d2), n=n)


def _loglog(points):
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("expected a sequence of (N, value) pairs")
    if pts.shape[0] < 3:
        raise ValueError("power-law fit needs at least 3 points")
    if np.any(pts <= 0):
        raise ValueError("power-law fit needs strictly positive N and values")
    return np.log(pts[:, 0]), np.log(pts[:, 1])


def fit_power_law(points) -> FitResult:
    """OLS of log(value) on log(N); the slope is the scaling exponent."""
    x, y = _loglog(points)
    n = x.size
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise ValueError("all N identical; exponent not identifiable")
    slope = float(xc @ (y - y.mean()) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - slope * x - intercept
    rss = float(resid @ resid)
    dof = n - 2
    s2 = rss / dof if dof > 0 else float("nan")
    se_slope = math.sqrt(s2 / sxx)
    se_intercept = math.sqrt(s2 * (1.0 / n + x.mean() ** 2 / sxx))
    return FitResult(model_form="power_law",
                     params={"exponent": slope, "log_amplitude": intercept},
                     se={"exponent": se_slope, "log_amplitude": se_intercept},
                     rss=rss, n_points=int(n))


def f_test_slope_equality(fit1: FitResult, fit2: FitResult,
                          data1, data2) -> TestResult:
    """Slope homogeneity across two log-log regressions.

    Compares separate-slopes (full) against common-slope with separate
    intercepts (restricted) on the combined data; F has (1, n1 + n2 − 4) df.
    The fits are the per-dataset power laws being compared (used for their
    form only; sums are recomputed from the data).
    """
    for f in (fit1, fit2):
        if f.model_form != "power_law":
            raise ValueError("slope-equality test expects power_law fits")
    x1, y1 = _loglog(data1)
    x2, y2 = _loglog(data2)
    n = x1.size + x2.size
    if n - 4 < 1:
        raise ValueError("not enough points for the slope-equality test")

    def _rss_sep(x, y):
        xc = x - x.mean()
        slope = xc @ (y - y.mean()) / (xc @ xc)
        r = y - y.mean() - slope * xc
        return float(r @ r)

    rss_full = _rss_sep(x1, y1) + _rss_sep(x2, y2)
    x1c, x2c = x1 - x1.mean(), x2 - x2.mean()
    common = float((x1c @ (y1 - y1.mean()) + x2c @ (y2 - y2.mean()))
                   / (x1c @ x1c + x2c @ x2c))
    r1 = y1 - y1.mean() - common * x1c
    r2 = y2 - y2.mean() - common * x2c
    rss_restricted = float(r1 @ r1 + r2 @ r2)
    if rss_full == 0.0:
        if rss_restricted == 0.0:
            return TestResult(test_kind="f_slope_equality", statistic=0.0,
                              p_value=1.0, df=(1, n - 4), n=(x1.size, x2.size),
                              note="perfect_fit")
        return TestResult(test_kind="f_slope_equality", statistic=float("inf"),
                          p_value=0.0, df=(1, n - 4), n=(x1.size, x2.size),
                          note="perfect_fit")
    f_stat = max((rss_restricted - rss_full) / (rss_full / (n - 4)), 0.0)
    return TestResult(test_kind="f_slope_equality", statistic=float(f_stat),
                      p_value=float(_sps.f.sf(f_stat, 1, n - 4)),
                      df=(1, n - 4), n=(x1.size, x2.size))


def fit_total_length(metrics) -> FitResult:
    """One-parameter fit L = m·(2N + 1) over trees with geometric lengths."""
    pairs = [(m.N, m.L) for m in metrics if m.L is not None]
    if not pairs:
        raise ValueError("no trees with geometric lengths")
    arr = np.asarray(pairs, dtype=np.float64)
    x = 2.0 * arr[:, 0] + 1.0
    L = arr[:, 1]
    sxx = float(x @ x)
    m = float(x @ L / sxx)
    resid = L - m * x
    rss = float(resid @ resid)
    n = x.size
    dof = n - 1
    se = math.sqrt((rss / dof) / sxx) if dof > 0 else float("nan")
    return FitResult(model_form="linear_through_form",
                     params={"m": m}, se={"m": se}, rss=rss, n_points=int(n))


def _kolmogorov_sf(lam: float, terms: int = 100) -> float:
    """Asymptotic Kolmogorov survival function Q(λ), 100-term series."""
    if lam < 1e-12:
        return 1.0
    total = 0.0
    for j in range(1, terms + 1):
        total += (-1.0) ** (j - 1) * math.exp(-2.0 * j * j * lam * lam)
    return min(max(2.0 * total, 0.0), 1.0)


def ks_two_sample(x, y) -> TestResult:
    """Two-sample KS: D from pooled-point ECDFs, asymptotic p-value.

    The effective size is nx·ny/(nx+ny); ties are handled by evaluating both
    ECDFs at every pooled sample point.
    """
    x = np.sort(np.asarray(x, dtype=np.float64))
    y = np.sort(np.asarray(y, dtype=np.float64))
    nx, ny = x.size, y.size
    if nx == 0 or ny == 0:
        raise ValueError("both samples must be non-empty")
    pooled = np.concatenate([x, y])
    cdf_x = np.searchsorted(x, pooled, side="right") / nx
    cdf_y = np.searchsorted(y, pooled, side="right") / ny
    d = float(np.max(np.abs(cdf_x - cdf_y)))
    ne = nx * ny / (nx + ny)
    p = _kolmogorov_sf(math.sqrt(ne) * d)
    return TestResult(test_kind="ks_2samp", statistic=d, p_value=p, n=(nx, ny))


def pearson(x, y) -> TestResult:
    """Pearson correlation with the exact-t two-sided p-value."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size:
        raise ValueError("samples must have equal length")
    n = x.size
    if n < 3:
        raise ValueError("pearson needs at least 3 pairs")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(xc @ xc)
    sy = float(yc @ yc)
    if sx == 0.0 or sy == 0.0:
        raise ValueError("correlation undefined for constant input")
    r = float(xc @ yc / math.sqrt(sx * sy))
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return TestResult(test_kind="pearson", statistic=r, p_value=0.0,
                          df=n - 2, n=n)
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(_sps.t.sf(abs(t), n - 2))
    return TestResult(test_kind="pearson", statistic=r, p_value=p,
                      df=n - 2, n=n)


def t_test_zero_mean(x) -> TestResult:
    """One-sample two-sided t-test against mean 0."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n < 2:
        raise ValueError("t-test needs at least 2 observations")
    mean = float(x.mean())
    sd = float(x.std(ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return TestResult(test_kind="t_zero_mean", statistic=0.0,
                              p_value=1.0, df=n - 1, n=n, note="zero_variance")
        stat = math.copysign(float("inf"), mean)
        return TestResult(test_kind="t_zero_mean", statistic=stat,
                          p_value=0.0, df=n - 1, n=n, note="zero_variance")
    t = mean / (sd / math.sqrt(n))
    p = 2.0 * float(_sps.t.sf(abs(t), n - 1))
    return TestResult(test_kind="t_zero_mean", statistic=float(t), p_value=p,
                      df=n - 1, n=n)


def t_test_two_sample(x, y, equal_var: bool = False) -> TestResult:
    """Two-sided two-sample t-test; Welch by default."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    nx, ny = x.size, y.size
    if nx < 2 or ny < 2:
        raise ValueError("each sample needs at least 2 observations")
    vx, vy = float(x.var(ddof=1)), float(y.var(ddof=1))
    diff = float(x.mean() - y.mean())
    if equal_var:
        sp2 = ((nx - 1) * vx + (ny - 1) * vy) / (nx + ny - 2)
        denom = math.sqrt(sp2 * (1.0 / nx + 1.0 / ny))
        df = nx + ny - 2
        kind = "t_two_sample_pooled"
    else:
        denom = math.sqrt(vx / nx + vy / ny)
        if denom > 0.0:
            df = (vx / nx + vy / ny) ** 2 / (
                (vx / nx) ** 2 / (nx - 1) + (vy / ny) ** 2 / (ny - 1))
        else:
            df = nx + ny - 2
        kind = "t_two_sample_welch"
    if denom == 0.0:
        if diff == 0.0:
            return TestResult(test_kind=kind, statistic=0.0, p_value=1.0,
                              df=df, n=(nx, ny), note="zero_variance")
        return TestResult(test_kind=kind,
                          statistic=math.copysign(float("inf"), diff),
                          p_value=0.0, df=df, n=(nx, ny), note="zero_variance")
    t = diff / denom
    p = 2.0 * float(_sps.t.sf(abs(t), df))
    return TestResult(test_kind=kind, statistic=float(t), p_value=p,
                      df=df, n=(nx, ny))


@dataclass
class ShuffleResult:
    observed_std: float
    fraction_greater: float
    shuffle_stds: np.ndarray = field(repr=False)
    n_shuffles: int
    n_groups: int
    group_size: int
    seed: int

    def to_dict(self) -> dict:
        counts, edges = np.histogram(self.shuffle_stds, bins=20)
        return {
            "observed_std": self.observed_std,
            "fraction_greater": self.fraction_greater,
            "n_shuffles": self.n_shuffles,
            "n_groups": self.n_groups,
            "group_size": self.group_size,
            "seed": self.seed,
            "histogram": {"counts": counts.tolist(),
                          "bin_edges": edges.tolist()},
        }


def shuffle_test_dendrite_sizes(groups, n_shuffles: int = 1000,
                                seed: int = 0) -> ShuffleResult:
    """Permutation test of the std of per-group mean sizes.

    ``groups`` are the dendrite sizes per neuron, all of equal cardinality.
    Each shuffle repartitions the pooled sizes into equal groups and
    recomputes the std (sample, ddof=1) of group means; the result reports
    the fraction of shuffles strictly exceeding the observed statistic.
    Deterministic in ``seed`` and invariant to group ordering (the pool is
    sorted before permuting).
    """
    groups = [np.asarray(g, dtype=np.float64) for g in groups]
    if len(groups) < 2:
        raise ValueError("need at least 2 groups")
    size = groups[0].size
    if size < 1 or any(g.size != size for g in groups):
        raise ValueError("all groups must have the same non-zero cardinality")
    if n_shuffles < 1:
        raise ValueError("n_shuffles must be >= 1")
    observed = float(np.std([g.mean() for g in groups], ddof=1))
    pool = np.sort(np.concatenate(groups))
    n_groups = len(groups)
    stds = np.empty(n_shuffles, dtype=np.float64)
    for rep in range(n_shuffles):
        rep_seed = _kernels.substream_seed(seed, rep)
        u = _kernels.uniform_block(rep_seed, pool.size)
        perm = np.argsort(u, kind="stable")
        means = pool[perm].reshape(n_groups, size).mean(axis=1)
        stds[rep] = means.std(ddof=1)
    fraction = float(np.count_nonzero(stds > observed) / n_shuffles)
    return ShuffleResult(observed_std=observed, fraction_greater=fraction,
                         shuffle_stds=stds, n_shuffles=n_shuffles,
                         n_groups=n_groups, group_size=size, seed=seed)
