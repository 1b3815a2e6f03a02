"""Command line tool around the decoding library.

Subcommands: ``map`` (exact decode), ``sample`` (posterior marginals),
``fisher`` (enrichment baseline), ``simulate`` (replicated benchmark),
``violations`` (activation-rule failure rates under the prior), and
``oracle`` (exhaustive posterior on small systems).

Every run writes its tables plus ``manifest.json`` capturing the
resolved configuration, seeds, package versions, and produced files;
the exit status is 0 only when every declared output exists.

Per-whole report header (stable order, NA where a column was not
computed by the invoked subcommand)::

    set_id size n_listed in_map p_constrained p_unconstrained
    fisher_p_raw fisher_p_adj
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import platform
import sys
import time

import numpy as np

from . import __version__, model
from .enrichment import fisher_test
from .exact import enumerate_posterior, expected_violations
from .files import parse_gene_list, parse_gmt
from .map_ilp import solve_map, solve_map_sequential, trim
from .mcmc import run_chain
from .model import ModelParams
from .simulate import BenchmarkConfig, run_benchmark
from .system import build_system

REPORT_COLUMNS = ("set_id", "size", "n_listed", "in_map", "p_constrained",
                  "p_unconstrained", "fisher_p_raw", "fisher_p_adj")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.1,
                   help="listing rate of inactive parts (default 0.1)")
    p.add_argument("--gamma", type=float, default=0.9,
                   help="listing rate of active parts (default 0.9)")
    p.add_argument("--pi", type=float, default=0.05,
                   help="prior activation rate per whole (default 0.05)")
    p.add_argument("--lambda", dest="lam", type=float, default=5.0,
                   help="violation penalty for sampling (default 5.0)")


def _add_size_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--min-size", type=int, default=1,
                   help="drop wholes smaller than this (default 1)")
    p.add_argument("--max-size", type=int, default=None,
                   help="drop wholes larger than this (default: keep all)")


def _add_io_flags(p: argparse.ArgumentParser, genes: bool) -> None:
    p.add_argument("--sets", required=True,
                   help="GMT file defining the set system")
    if genes:
        p.add_argument("--genes", required=True,
                       help="newline-delimited list of reported parts")
    p.add_argument("--out", default=".",
                   help="output directory (default: current)")


def _load_system(args):
    records = parse_gmt(args.sets)
    system = build_system(
        ((r.set_id, list(r.members)) for r in records),
        min_size=getattr(args, "min_size", 1),
        max_size=getattr(args, "max_size", None))
    return records, system


def _params(args) -> ModelParams:
    return ModelParams(alpha=args.alpha, gamma=args.gamma, pi=args.pi,
                       lam=args.lam)


def _fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.6g}"


def _write_report(path, system, x, in_map=None, p_constrained=None,
                  p_unconstrained=None, fisher_p_raw=None,
                  fisher_p_adj=None) -> None:
    x = model.as_part_vector(x, system)
    listed = np.add.reduceat(
        x[system.wp_indices].astype(np.int64), system.wp_indptr[:-1])
    cols = {"in_map": in_map, "p_constrained": p_constrained,
            "p_unconstrained": p_unconstrained, "fisher_p_raw": fisher_p_raw,
            "fisher_p_adj": fisher_p_adj}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(REPORT_COLUMNS) + "\n")
        for w in range(system.n_wholes):
            row = [system.wholes[w], str(int(system.deg_wholes[w])),
                   str(int(listed[w]))]
            row += [_fmt(None if c is None else c[w]) for c in cols.values()]
            fh.write("\t".join(row) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_manifest(out_dir, command, args, extra, outputs,
                    t_start) -> str:
    path = os.path.join(out_dir, "manifest.json")
    config = {k: v for k, v in vars(args).items() if k != "func"}
    doc = {
        "command": command,
        "argv": sys.argv[1:],
        "config": config,
        "versions": {
            "setdecode": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "outputs": [os.path.basename(o) for o in outputs],
        "elapsed_seconds": round(time.time() - t_start, 3),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
    }
    doc.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, default=_jsonable)
        fh.write("\n")
    return path


def _cmd_map(args) -> list[str]:
    t0 = time.time()
    _, system = _load_system(args)
    genes = parse_gene_list(args.genes, system)
    params = _params(args)
    if args.sequential_start is not None:
        est = solve_map_sequential(system, genes.observation, params,
                                   n_start=args.sequential_start,
                                   use_shrinking=not args.no_shrink,
                                   node_limit=args.node_limit)
    else:
        est = solve_map(system, genes.observation, params,
                        use_shrinking=not args.no_shrink,
                        node_limit=args.node_limit)
    kept = trim(est, system, genes.observation)
    report = os.path.join(args.out, "report.tsv")
    _write_report(report, system, genes.observation,
                  in_map=est.z_hat.astype(int))
    manifest = _write_manifest(args.out, "map", args, {
        "objective_value": est.objective_value,
        "log_posterior_value": est.log_posterior_value,
        "active_wholes": est.active_wholes,
        "trimmed_active_wholes": kept,
        "coverage": est.coverage,
        "mis_coverage": est.mis_coverage,
        "alt_optima": est.alt_optima,
        "node_count": est.node_count,
        "fixed_wholes": est.fixed_wholes,
        "fixed_parts": est.fixed_parts,
        "n_wholes": system.n_wholes,
        "n_parts": system.n_parts,
        "unmapped_ids": len(genes.unmapped_ids),
        "duplicate_ids": genes.n_duplicates,
    }, [report], t0)
    print(f"active wholes ({len(est.active_wholes)}): "
          f"{' '.join(est.active_wholes) or '-'}")
    if kept != est.active_wholes:
        print(f"after trimming ({len(kept)}): {' '.join(kept) or '-'}")
    print(f"coverage {est.coverage}, mis-coverage {est.mis_coverage}, "
          f"objective {est.objective_value:.6g}")
    return [report, manifest]


def _cmd_sample(args) -> list[str]:
    t0 = time.time()
    _, system = _load_system(args)
    genes = parse_gene_list(args.genes, system)
    summary = run_chain(system, genes.observation, _params(args),
                        sweeps=args.sweeps, burn_in=args.burnin,
                        seed=args.seed, mode=args.mode)
    report = os.path.join(args.out, "report.tsv")
    kw = {"p_constrained" if args.mode == "constrained"
          else "p_unconstrained": summary.marginals}
    _write_report(report, system, genes.observation, **kw)
    manifest = _write_manifest(args.out, "sample", args, {
        "acceptance_rate": summary.acceptance_rate,
        "kept_fraction": summary.kept_fraction,
        "ah_fraction": summary.ah_fraction,
        "kept_count": summary.kept_count,
        "lag1_autocorr": summary.lag1_autocorr,
        "teleport_rate": summary.teleport_rate,
        "teleport_accepts": summary.teleport_accepts,
        "mcmc_backend": summary.backend,
        "unmapped_ids": len(genes.unmapped_ids),
        "duplicate_ids": genes.n_duplicates,
    }, [report], t0)
    top = np.argsort(-summary.marginals)[:10]
    print(f"mode {summary.mode}, acceptance {summary.acceptance_rate:.3f}, "
          f"kept {summary.kept_fraction:.3f}")
    for w in top:
        print(f"  {system.wholes[w]}\t{summary.marginals[w]:.4f}")
    return [report, manifest]


def _cmd_fisher(args) -> list[str]:
    t0 = time.time()
    _, system = _load_system(args)
    genes = parse_gene_list(args.genes, system)
    res = fisher_test(system, genes.observation)
    report = os.path.join(args.out, "report.tsv")
    _write_report(report, system, genes.observation,
                  fisher_p_raw=res.p_raw, fisher_p_adj=res.p_adjusted)
    manifest = _write_manifest(args.out, "fisher", args, {
        "universe_size": res.universe_size,
        "listed_total": res.listed_total,
        "unmapped_ids": len(genes.unmapped_ids),
        "duplicate_ids": genes.n_duplicates,
    }, [report], t0)
    top = np.argsort(res.p_adjusted)[:10]
    for w in top:
        print(f"{system.wholes[w]}\traw={res.p_raw[w]:.4g}"
              f"\tadj={res.p_adjusted[w]:.4g}")
    return [report, manifest]


def _cmd_simulate(args) -> list[str]:
    t0 = time.time()
    cfg = BenchmarkConfig(
        experiment=args.experiment, replicates=args.replicates,
        alpha=args.alpha, gamma=args.gamma, pi=args.pi, lam=args.lam,
        master_seed=args.seed, mcmc_sweeps=args.sweeps,
        mcmc_burn_in=args.burnin)
    rep = run_benchmark(cfg)
    bench = os.path.join(args.out, "benchmark.json")
    with open(bench, "w", encoding="utf-8") as fh:
        json.dump(dataclasses.asdict(rep), fh, indent=1, default=_jsonable)
        fh.write("\n")
    methods = os.path.join(args.out, "methods.tsv")
    metric_names = ("sensitivity", "specificity", "precision",
                    "mean_predicted_active")
    with open(methods, "w", encoding="utf-8") as fh:
        fh.write("method\t" + "\t".join(metric_names) + "\n")
        for name, m in rep.methods.items():
            fh.write(name + "\t"
                     + "\t".join(_fmt(m[k]) for k in metric_names) + "\n")
    roc = os.path.join(args.out, "roc.tsv")
    with open(roc, "w", encoding="utf-8") as fh:
        fh.write("method\tthreshold\ttpr\tfpr\tprecision\n")
        for name, pts in rep.roc.items():
            for pt in pts:
                fh.write("\t".join([name, _fmt(pt["threshold"]),
                                    _fmt(pt["tpr"]), _fmt(pt["fpr"]),
                                    _fmt(pt["precision"])]) + "\n")
    manifest = _write_manifest(args.out, "simulate", args, {
        "resolved_config": rep.config,
        "methods": rep.methods,
    }, [bench, methods, roc], t0)
    for name, m in rep.methods.items():
        line = ", ".join(f"{k}={_fmt(m[k])}" for k in metric_names)
        print(f"{name}: {line}")
    return [bench, methods, roc, manifest]


def _cmd_violations(args) -> list[str]:
    t0 = time.time()
    _, system = _load_system(args)
    grid = [float(t) for t in args.pi_grid.split(",") if t.strip()]
    if not grid:
        raise ValueError("empty --pi-grid")
    table = os.path.join(args.out, "violations.tsv")
    rows = []
    with open(table, "w", encoding="utf-8") as fh:
        fh.write("pi\texpected_violations\tse\tmethod\n")
        for pi in grid:
            r = expected_violations(system, pi, method=args.method,
                                    n=args.mc_n, seed=args.seed)
            method = r.method + ("(mixed)" if r.mixed else "")
            fh.write(f"{_fmt(pi)}\t{_fmt(r.total)}\t{_fmt(r.se_total)}"
                     f"\t{method}\n")
            rows.append((pi, r.total))
    manifest = _write_manifest(args.out, "violations", args, {
        "n_wholes": system.n_wholes,
        "n_parts": system.n_parts,
        "totals": {str(pi): t for pi, t in rows},
    }, [table], t0)
    for pi, t in rows:
        print(f"pi={pi:g}: {t:.6g}")
    return [table, manifest]


def _cmd_oracle(args) -> list[str]:
    t0 = time.time()
    _, system = _load_system(args)
    genes = parse_gene_list(args.genes, system)
    post = enumerate_posterior(system, genes.observation, _params(args),
                               constrained=not args.unconstrained)
    table = os.path.join(args.out, "oracle.tsv")
    with open(table, "w", encoding="utf-8") as fh:
        fh.write("set_id\tmarginal\tin_map\n")
        for w, name in enumerate(post.whole_ids):
            fh.write(f"{name}\t{_fmt(post.marginals[w])}"
                     f"\t{int(post.map_z[w])}\n")
    manifest = _write_manifest(args.out, "oracle", args, {
        "constrained": post.constrained,
        "n_states": len(post.codes),
        "n_map_states": len(post.map_codes),
        "log_normalizer": post.log_normalizer,
        "prior_normalizer": post.prior_normalizer,
        "map_wholes": [post.whole_ids[w]
                       for w in np.flatnonzero(post.map_z)],
    }, [table], t0)
    for w in np.argsort(-post.marginals)[:10]:
        print(f"{post.whole_ids[w]}\t{post.marginals[w]:.4f}")
    return [table, manifest]


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="setdecode",
        description="decode active sets from a binary part report")
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("map", help="exact decode under the activation rule")
    _add_io_flags(p, genes=True)
    _add_model_flags(p)
    _add_size_flags(p)
    p.add_argument("--no-shrink", action="store_true",
                   help="skip the provable fix-to-zero reduction")
    p.add_argument("--sequential-start", type=int, default=None,
                   metavar="SIZE",
                   help="solve size-staged, starting at this whole size")
    p.add_argument("--node-limit", type=int, default=200_000)
    p.set_defaults(func=_cmd_map)

    p = sub.add_parser("sample", help="posterior marginals by MCMC")
    _add_io_flags(p, genes=True)
    _add_model_flags(p)
    _add_size_flags(p)
    p.add_argument("--sweeps", type=int, default=1_000_000)
    p.add_argument("--burnin", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("constrained", "unconstrained"),
                   default="constrained")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("fisher", help="overrepresentation baseline")
    _add_io_flags(p, genes=True)
    _add_size_flags(p)
    p.set_defaults(func=_cmd_fisher)

    p = sub.add_parser("simulate", help="replicated synthetic benchmark")
    p.add_argument("--experiment", type=int, choices=(1, 2), default=1)
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=0.9)
    p.add_argument("--pi", type=float, default=None,
                   help="inference rate (default: experiment-specific)")
    p.add_argument("--lambda", dest="lam", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sweeps", type=int, default=1_000_000)
    p.add_argument("--burnin", type=int, default=100_000)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("violations",
                       help="expected activation-rule failures vs pi")
    _add_io_flags(p, genes=False)
    _add_size_flags(p)
    p.add_argument("--pi-grid", default="0.05,0.1,0.2,0.3,0.4,0.5",
                   help="comma-separated prior rates")
    p.add_argument("--method", default="exact_per_whole",
                   choices=("exact_per_whole", "monte_carlo", "enumerate"))
    p.add_argument("--mc-n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_violations)

    p = sub.add_parser("oracle",
                       help="exhaustive posterior (small systems)")
    _add_io_flags(p, genes=True)
    _add_model_flags(p)
    _add_size_flags(p)
    p.add_argument("--unconstrained", action="store_true",
                   help="enumerate without the activation-rule constraint")
    p.set_defaults(func=_cmd_oracle)
    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        os.makedirs(args.out, exist_ok=True)
        outputs = args.func(args)
    except Exception as e:  # one-line diagnostics, nonzero exit
        print(f"error: {e}", file=sys.stderr)
        return 1
    missing = [o for o in outputs if not os.path.exists(o)]
    if missing:
        print(f"error: missing outputs: {missing}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
