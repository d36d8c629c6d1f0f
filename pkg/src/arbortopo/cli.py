"""Command-line pipeline.

Commands: parse (SWC -> canonical tree JSON), analyze (trees -> metrics CSV +
summaries), fit (trees -> branching-frequency and scaling fits), generate
(virtual populations), compare (real vs virtual metrics), shuffle
(dendrite-size permutation test).

Exit codes: 0 success, 1 analysis error, 2 usage/input error.
"""

from __future__ import annotations

import csv
import functools
import glob as globmod
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .errors import (ArbortopoError, DivergenceError, FitError, SwcParseError)
from .generator import (DEFAULT_MAX_ORDER, BranchModel, generate_population,
                        mean_size)
from .inference import (DEFAULT_MIN_SAMPLES, estimate_branching_frequencies,
                        f_test_nested, f_test_slope_equality, fit_exp_plateau,
                        fit_exp_zero, fit_power_law, fit_total_length,
                        ks_two_sample, shuffle_test_dendrite_sizes,
                        write_profile_csv)
from .io import read_neuron_json, read_trees, write_neuron_json, \
    write_population_jsonl
from .morphometry import (branch_length_by_order, compute_metrics,
                          conditional_means, read_metrics_csv, summarize,
                          write_metrics_csv)
from .swc_ingest import decompose, parse_swc
from .tree import SCHEMA_VERSION


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SwcParseError as exc:
            _fail(2, str(exc))
        except (DivergenceError, ValueError, OSError) as exc:
            _fail(2, str(exc))
        except ArbortopoError as exc:
            _fail(1, str(exc))
    return wrapper


def _collect(inputs, suffixes) -> list:
    files = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            files.extend(q for s in suffixes for q in sorted(p.rglob(f"*{s}")))
        elif p.is_file():
            files.append(p)
        else:
            files.extend(Path(q) for q in sorted(globmod.glob(item)))
    files = sorted(set(files))
    if not files:
        _fail(2, "no input files")
    return files


def _outdir(out) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_report(outdir, name, report, fmt):
    if fmt == "json":
        path = outdir / f"{name}.json"
        path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
    else:
        path = outdir / f"{name}.csv"
        rows = _flatten("", report)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["key", "value"])
            w.writerows(rows)
    click.echo(f"wrote {path}")


def _flatten(prefix, obj):
    rows = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            rows.extend(_flatten(f"{prefix}{k}." if prefix else f"{k}.",
                                 obj[k]) if isinstance(obj[k], (dict, list))
                        else [(f"{prefix}{k}", obj[k])])
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            rows.extend(_flatten(f"{prefix}{i}.", v)
                        if isinstance(v, (dict, list))
                        else [(f"{prefix}{i}", v)])
    else:
        rows.append((prefix.rstrip("."), obj))
    return rows


@click.group()
@click.version_option(__version__)
def main():
    """Neuron tree topology toolkit."""


@main.command("parse")
@click.option("--input", "inputs", multiple=True, required=True,
              help="SWC files, directories, or globs.")
@click.option("--out", required=True, help="Output directory.")
@click.option("--allow-multiple-roots", is_flag=True,
              help="Keep the largest component of multi-root files.")
@_guard
def cmd_parse(inputs, out, allow_multiple_roots):
    """Parse SWC files into canonical tree JSON (one per neuron)."""
    files = _collect(inputs, (".swc",))
    outdir = _outdir(out)
    mode = "largest" if allow_multiple_roots else "error"
    dendrite_counts = []
    for f in files:
        swc = parse_swc(f.read_bytes(), source_path=str(f))
        trees, stats = decompose(swc, on_multiple_roots=mode, with_stats=True)
        write_neuron_json(outdir / f"{f.stem}.json", trees, source=str(f))
        kinds = [t.kind for t in trees]
        n_dend = kinds.count("dendrite")
        dendrite_counts.append(n_dend)
        msg = (f"{f}: kept {len(trees)} trees "
               f"({kinds.count('axon')} axon, {n_dend} dendrites), "
               f"dropped {stats['dropped']} unbranched stems")
        if not trees:
            msg += " [warning: no branching subcomponent]"
        click.echo(msg)
    click.echo(f"parsed {len(files)} neurons; mean dendrites per neuron: "
               f"{np.mean(dendrite_counts):.2f}")


@main.command("analyze")
@click.option("--input", "inputs", multiple=True, required=True,
              help="Canonical tree .json/.jsonl files, directories, or globs.")
@click.option("--out", required=True)
@click.option("--min-group-size", default=0, show_default=True,
              help="Drop conditional-mean groups smaller than this "
                   "(use 10 for simulated populations).")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json", show_default=True)
@_guard
def cmd_analyze(inputs, out, min_group_size, fmt):
    """Per-tree metrics CSV plus per-kind population summaries."""
    files = _collect(inputs, (".json", ".jsonl"))
    outdir = _outdir(out)
    trees = [t for f in files for t in read_trees(f)]
    if not trees:
        _fail(2, "inputs contain no trees")
    metrics = [compute_metrics(t) for t in trees]
    write_metrics_csv(outdir / "metrics.csv", metrics)
    click.echo(f"wrote {outdir / 'metrics.csv'} ({len(metrics)} trees)")
    report = {"schema_version": SCHEMA_VERSION,
              "config": {"min_group_size": min_group_size,
                         "inputs": [str(f) for f in files]},
              "kinds": {}}
    for kind in sorted({t.kind for t in trees}):
        kind_trees = [t for t in trees if t.kind == kind]
        kind_metrics = [m for m in metrics if m.kind == kind]
        report["kinds"][kind] = summarize(
            kind_metrics, min_group_size=min_group_size).to_dict()
        rows = branch_length_by_order(kind_trees)
        if rows:
            path = outdir / f"order_lengths_{kind}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["order", "mean_length", "sem", "n"])
                for order, mean, sem, n in rows:
                    w.writerow([order, mean, "" if sem is None else sem, n])
            click.echo(f"wrote {path}")
    _write_report(outdir, "summary", report, fmt)


@main.command("fit")
@click.option("--input", "inputs", multiple=True, required=True,
              help="Canonical tree .json/.jsonl files, directories, or globs.")
@click.option("--out", required=True)
@click.option("--min-samples", default=DEFAULT_MIN_SAMPLES, show_default=True,
              help="Orders need more pooled nodes than this to enter fits.")
@click.option("--min-group-size", default=0, show_default=True,
              help="Conditional-mean group threshold for the power-law fits.")
@click.option("--per-tree-frequencies", is_flag=True,
              help="Average per-tree frequencies instead of pooling counts.")
@click.option("--weighted-fit", is_flag=True,
              help="Weight exponential-fit residuals by per-order sample size.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json", show_default=True)
@_guard
def cmd_fit(inputs, out, min_samples, min_group_size, per_tree_frequencies,
            weighted_fit, fmt):
    """Branching-frequency fits, scaling exponents, and total-length fit."""
    files = _collect(inputs, (".json", ".jsonl"))
    outdir = _outdir(out)
    trees = [t for f in files for t in read_trees(f)]
    if not trees:
        _fail(2, "inputs contain no trees")
    report = {"schema_version": SCHEMA_VERSION,
              "config": {"min_samples": min_samples,
                         "min_group_size": min_group_size,
                         "per_tree_frequencies": per_tree_frequencies,
                         "weighted_fit": weighted_fit,
                         "inputs": [str(f) for f in files]},
              "kinds": {}}
    for kind in sorted({t.kind for t in trees}):
        kind_trees = [t for t in trees if t.kind == kind]
        entry = {}
        profile = estimate_branching_frequencies(
            kind_trees, min_samples=min_samples, per_tree=per_tree_frequencies)
        write_profile_csv(outdir / f"profile_{kind}.csv", profile)
        try:
            plateau = fit_exp_plateau(profile, weighted=weighted_fit)
            zero = fit_exp_zero(profile, weighted=weighted_fit)
            entry["exp_plateau"] = plateau.to_dict()
            entry["exp_zero"] = zero.to_dict()
            entry["f_test_plateau_vs_zero"] = f_test_nested(zero, plateau).to_dict()
        except FitError as exc:
            entry["exp_fits_skipped"] = str(exc)
        metrics = [compute_metrics(t) for t in kind_trees]
        sizes = [m.N for m in metrics]
        ck = conditional_means(sizes, [m.k_max for m in metrics], min_group_size)
        cj = conditional_means(sizes, [m.j_max for m in metrics], min_group_size)
        try:
            lam = fit_power_law(ck[:, :2])
            tau = fit_power_law(cj[:, :2])
            entry["power_law_k_max"] = lam.to_dict()
            entry["power_law_j_max"] = tau.to_dict()
            entry["f_test_slope_equality"] = f_test_slope_equality(
                lam, tau, ck[:, :2], cj[:, :2]).to_dict()
        except ValueError as exc:
            entry["power_law_skipped"] = str(exc)
        try:
            entry["total_length"] = fit_total_length(metrics).to_dict()
        except ValueError as exc:
            entry["total_length_skipped"] = str(exc)
        report["kinds"][kind] = entry
    _write_report(outdir, "fit_report", report, fmt)


@main.command("generate")
@click.option("--model", type=click.Choice(["homogeneous", "inhomogeneous"]),
              required=True)
@click.option("--p", type=float, help="Homogeneous branching probability.")
@click.option("--a", type=float, help="Inhomogeneous decay rate.")
@click.option("--b", type=float, help="Inhomogeneous amplitude.")
@click.option("--c", type=float, help="Inhomogeneous plateau.")
@click.option("--n", type=int, required=True, help="Population size.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-order", type=int, default=DEFAULT_MAX_ORDER,
              show_default=True)
@click.option("--kind", default="virtual", show_default=True,
              help="kind label written on generated trees.")
@click.option("--allow-supercritical", is_flag=True)
@click.option("--out", required=True)
@_guard
def cmd_generate(model, p, a, b, c, n, seed, max_order, kind,
                 allow_supercritical, out):
    """Generate a virtual tree population plus a manifest."""
    outdir = _outdir(out)
    if model == "homogeneous":
        if p is None:
            _fail(2, "--p is required for the homogeneous model")
        bm = BranchModel.homogeneous(p, max_order=max_order,
                                     allow_supercritical=allow_supercritical)
    else:
        if a is None or b is None or c is None:
            _fail(2, "--a, --b, --c are required for the inhomogeneous model")
        bm = BranchModel.inhomogeneous(a, b, c, max_order=max_order,
                                       allow_supercritical=allow_supercritical)
    trees = generate_population(bm, n, seed)
    for t in trees:
        t.kind = kind
    write_population_jsonl(outdir / "trees.jsonl", trees)
    try:
        predicted = mean_size(bm)
    except DivergenceError:
        predicted = None
    empirical = float(np.mean([t.n_branching for t in trees]))
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "model": bm.to_dict(),
        "master_seed": seed,
        "n": n,
        "kind": kind,
        "predicted_mean_size": predicted,
        "empirical_mean_size": empirical,
    }
    (outdir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    click.echo(f"wrote {outdir / 'trees.jsonl'} ({n} trees), "
               f"mean N empirical {empirical:.4g}"
               + (f" vs predicted {predicted:.4g}" if predicted else ""))


_COMPARE_MEANS = ("N", "b_frac", "k_max", "j_max", "A")
_COMPARE_KS = ("N", "k_max", "j_max")


@main.command("compare")
@click.argument("real", type=click.Path(exists=True))
@click.argument("virtual", type=click.Path(exists=True))
@click.option("--kind", default=None,
              help="Restrict both metric files to one kind label.")
@click.option("--out", required=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json", show_default=True)
@_guard
def cmd_compare(real, virtual, kind, out, fmt):
    """Relative mean differences and KS tests between two metrics CSVs."""
    outdir = _outdir(out)
    m_real = read_metrics_csv(real)
    m_virt = read_metrics_csv(virtual)
    if kind is not None:
        m_real = [m for m in m_real if m.kind == kind]
        m_virt = [m for m in m_virt if m.kind == kind]
    if not m_real or not m_virt:
        _fail(2, "empty population after kind filtering")
    report = {"schema_version": SCHEMA_VERSION,
              "config": {"real": str(real), "virtual": str(virtual),
                         "kind": kind},
              "relative_difference": {}, "ks": {}}
    for q in _COMPARE_MEANS:
        rv = [getattr(m, q) for m in m_real if getattr(m, q) is not None]
        vv = [getattr(m, q) for m in m_virt if getattr(m, q) is not None]
        if not rv or not vv:
            report["relative_difference"][q] = None
            continue
        mr, mv = float(np.mean(rv)), float(np.mean(vv))
        report["relative_difference"][q] = {
            "mean_real": mr, "mean_virtual": mv,
            "value": (mv - mr) / mr if mr != 0 else None}
    for q in _COMPARE_KS:
        res = ks_two_sample([getattr(m, q) for m in m_real],
                            [getattr(m, q) for m in m_virt])
        report["ks"][q] = res.to_dict()
    _write_report(outdir, "comparison", report, fmt)


@main.command("shuffle")
@click.option("--input", "inputs", multiple=True, required=True,
              help="Neuron .json documents (one neuron per file).")
@click.option("--group-size", type=int, required=True,
              help="Keep only neurons with exactly this many dendrites.")
@click.option("--shuffles", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json", show_default=True)
@_guard
def cmd_shuffle(inputs, group_size, shuffles, seed, out, fmt):
    """Dendrite-size shuffle test over neurons with equal dendrite counts."""
    files = _collect(inputs, (".json",))
    outdir = _outdir(out)
    groups = []
    for f in files:
        trees = read_neuron_json(f)
        sizes = [t.n_branching for t in trees if t.kind == "dendrite"]
        if len(sizes) == group_size:
            groups.append(sizes)
    if len(groups) < 2:
        _fail(2, f"need at least 2 neurons with exactly {group_size} "
                 f"dendrites, found {len(groups)}")
    result = shuffle_test_dendrite_sizes(groups, n_shuffles=shuffles, seed=seed)
    report = result.to_dict()
    report["schema_version"] = SCHEMA_VERSION
    report["config"] = {"group_size": group_size, "shuffles": shuffles,
                        "seed": seed, "inputs": [str(f) for f in files]}
    _write_report(outdir, "shuffle", report, fmt)
    counts, edges = np.histogram(result.shuffle_stds, bins=20)
    with open(outdir / "histogram.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_left", "bin_right", "count"])
        for i, cnt in enumerate(counts):
            w.writerow([edges[i], edges[i + 1], cnt])
    click.echo(f"observed std {result.observed_std:.6g}; "
               f"{result.fraction_greater:.1%} of {shuffles} shuffles exceed it")


if __name__ == "__main__":
    main()
