"""Command-line entry point.

Subcommands map thinly onto library operations: gen-regular and
graph-stats onto the graph module, analyze and diagnose-buckets onto the
instance pipeline, sweep and kemp onto the harness. Human-readable output
goes to stdout, progress to stderr, data only through --out/--csv.

Exit codes: 0 success, 2 parameter error, 1 runtime or I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from typing import Sequence

from .graphs import (
    ConnectivityError,
    EdgeListParseError,
    Graph,
    from_edge_list,
    largest_connected_component,
    random_regular,
    serialize_edge_list,
    structural_stats,
    write_edge_list,
)
from .harness import (
    SweepConfig,
    analyze_records,
    anchor_seed_for,
    evaluate_instance,
    kemp_table,
    parse_sweep_config,
    read_csv_rows,
    run_sweep,
    select_anchors,
    write_csv,
    write_records_csv,
)
from .observation import BUCKET_CUTOFFS
from .spectral import (
    empty_embedding,
    energy_embedding,
    low_frequency_basis,
    normalized_laplacian,
    quantize_absolute,
    quantize_relative,
    write_basis_tsv,
    write_embedding_tsv,
)


def _parse_regular(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"expected N,R (e.g. 500,3), got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ValueError(f"expected integers N,R, got {text!r}") from exc


def _parse_bool(text: str) -> bool:
    token = text.strip().lower()
    if token in ("true", "1", "yes"):
        return True
    if token in ("false", "0", "no"):
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def _load_graph(args: argparse.Namespace) -> tuple[Graph, int | None]:
    """Resolve the graph source flags; returns (graph, regular degree or None)."""
    if getattr(args, "graph", None) is not None and getattr(args, "regular", None) is not None:
        raise ValueError("pass exactly one of --graph and --regular")
    if getattr(args, "graph", None) is not None:
        with open(args.graph, "r", encoding="utf-8") as fh:
            parsed = from_edge_list(fh)
        g = parsed.graph
        if parsed.duplicate_edges or parsed.self_loops:
            print(
                f"dropped {parsed.duplicate_edges} duplicate edges and "
                f"{parsed.self_loops} self-loops",
                file=sys.stderr,
            )
        r = None
    elif getattr(args, "regular", None) is not None:
        n, r = _parse_regular(args.regular)
        g = random_regular(n, r, args.seed)
    else:
        raise ValueError("pass one of --graph and --regular")
    if getattr(args, "lcc", False):
        before = g.n
        g = largest_connected_component(g)
        if g.n != before:
            print(f"kept largest component: {g.n} of {before} vertices", file=sys.stderr)
    return g, r


def _add_graph_source(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--graph", metavar="PATH", help="edge-list file (two tokens per line)")
    parser.add_argument("--regular", metavar="N,R", help="random regular graph, e.g. 500,3")
    parser.add_argument("--seed", type=int, default=0, help="seed for graph and anchor draws")
    parser.add_argument("--lcc", action="store_true", help="restrict to the largest connected component")


def _add_observation_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--anchors", type=int, required=True, metavar="K", help="anchor count (at least 1)")
    parser.add_argument("--strategy", default="random", choices=("random", "degree", "farthest"), help="anchor selection strategy")
    parser.add_argument("--m", type=int, default=0, help="spectral embedding width")
    parser.add_argument("--eta", default="0.1", help="quantization scale (decimal string, kept verbatim)")
    parser.add_argument("--quantizer", default="absolute", choices=("absolute", "relative"), help="quantization rule")
    parser.add_argument("--scaled", default="true", metavar="BOOL", help="scale embedding entries by n (true/false)")


def _cmd_gen_regular(args: argparse.Namespace) -> int:
    g = random_regular(args.n, args.r, args.seed)
    if args.out is not None:
        write_edge_list(g, args.out)
    else:
        for line in serialize_edge_list(g):
            print(line)
    print(
        f"generated {args.r}-regular graph: n={g.n} edges={g.edge_count} seed={args.seed}",
        file=sys.stderr,
    )
    return 0


def _cmd_graph_stats(args: argparse.Namespace) -> int:
    g, _ = _load_graph(args)
    stats = structural_stats(g)
    for field in dataclasses.fields(stats):
        value = getattr(stats, field.name)
        if isinstance(value, float):
            print(f"{field.name} {value:.12g}")
        else:
            print(f"{field.name} {value}")
    return 0


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def _cmd_analyze(args: argparse.Namespace) -> int:
    g, r = _load_graph(args)
    scaled = _parse_bool(args.scaled)
    records = analyze_records(
        g,
        r=r,
        k=args.anchors,
        m=args.m,
        eta=args.eta,
        quantizer=args.quantizer,
        scaled=scaled,
        anchor_strategy=args.strategy,
        seed=args.seed,
        resamples=args.resamples,
    )
    if records[0].degenerate:
        print(
            "warning: near-degenerate eigenvalues; spectral codes are "
            "basis-dependent at this m",
            file=sys.stderr,
        )
    if args.basis_tsv is not None or args.embedding_tsv is not None:
        if args.m > 0:
            basis = low_frequency_basis(normalized_laplacian(g), args.m)
            emb = energy_embedding(basis, args.m, scaled)
        else:
            basis = low_frequency_basis(normalized_laplacian(g), 0)
            emb = empty_embedding(g.n, scaled)
        if args.basis_tsv is not None:
            write_basis_tsv(basis, args.basis_tsv)
        if args.embedding_tsv is not None:
            write_embedding_tsv(emb, args.embedding_tsv)

    errors = [rec.error for rec in records]
    mean_error = _mean(errors)
    std_error = (_mean([(e - mean_error) ** 2 for e in errors])) ** 0.5
    print(f"n {g.n}")
    print(f"resamples {len(records)}")
    print(f"error {mean_error:.6g} +- {std_error:.6g}")
    print(f"image_frac {_mean([rec.image_frac for rec in records]):.6g}")
    print(f"mean_preimage {_mean([rec.mean_preimage for rec in records]):.6g}")
    print(f"singleton_frac {_mean([rec.singleton_frac for rec in records]):.6g}")
    print(f"codebook_size {records[0].codebook_size}")
    print(f"profile_count {_mean([float(rec.profile_count) for rec in records]):.6g}")
    generic_ok = all(rec.bounds_ok for rec in records)
    refined_na = sum(1 for rec in records if rec.refined_bound is None)
    print(f"bounds_ok {'true' if generic_ok else 'false'}")
    print(f"refined_bound_na {refined_na}")
    if args.csv is not None:
        write_records_csv(records, args.csv, include_timing=args.timings)
        print(f"wrote {len(records)} rows to {args.csv}", file=sys.stderr)
    return 0


def _cmd_diagnose_buckets(args: argparse.Namespace) -> int:
    g, _ = _load_graph(args)
    scaled = _parse_bool(args.scaled)
    if args.anchors < 1:
        raise ValueError("anchor count must be at least 1")
    if args.m > 0:
        basis = low_frequency_basis(normalized_laplacian(g), args.m)
        emb = energy_embedding(basis, args.m, scaled)
    else:
        emb = empty_embedding(g.n, scaled)
    eta = float(args.eta)
    codes = quantize_absolute(emb, eta) if args.quantizer == "absolute" else quantize_relative(emb, eta)
    aseed = anchor_seed_for(args.seed, args.anchors, args.strategy, 0)
    anchors = select_anchors(g, args.anchors, args.strategy, aseed)
    report = evaluate_instance(g, anchors, codes)
    diag = report.diagnostics

    print(f"n {diag.n}")
    print(f"buckets {report.bounds.profile_bound}")
    print(f"singleton_vertex_fraction {diag.singleton_vertex_fraction:.6g}")
    for level in diag.levels:
        prefix = f"cutoff_{level.cutoff}"
        print(f"{prefix}.buckets {level.bucket_count}")
        print(f"{prefix}.below_cutoff_vertex_fraction {level.below_cutoff_vertex_fraction:.6g}")
        for name, value in (
            ("weighted_collision", level.weighted_collision),
            ("median_code_ratio", level.median_code_ratio),
            ("q90_balance", level.q90_balance),
        ):
            if value is None:
                print(f"{prefix}.{name} n/a")
            else:
                print(f"{prefix}.{name} {value:.6g}")
    rows = sorted(diag.rows.items(), key=lambda kv: (-kv[1].size, kv[0]))
    if rows and args.top > 0:
        print("largest buckets (profile size codes collision balance):")
        for profile, row in rows[: args.top]:
            label = ",".join(str(d) for d in profile)
            print(
                f"  ({label}) {row.size} {row.code_count} "
                f"{row.collision:.6g} {row.balance:.6g}"
            )
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = parse_sweep_config(fh.read())
        overrides = {}
        if args.n:
            overrides["n_list"] = tuple(args.n)
        if args.k:
            overrides["k_list"] = tuple(args.k)
        if args.m:
            overrides["m_list"] = tuple(args.m)
        if args.eta:
            overrides["eta_list"] = tuple(args.eta)
    else:
        if not (args.n and args.k and args.m and args.eta):
            raise ValueError("without --config, pass --n, --k, --m, and --eta")
        overrides = {
            "n_list": tuple(args.n),
            "k_list": tuple(args.k),
            "m_list": tuple(args.m),
            "eta_list": tuple(args.eta),
        }
        cfg = None
    scalar_overrides = {
        "trials": args.trials,
        "anchor_resamples": args.resamples,
        "r": args.r,
        "quantizer": args.quantizer,
        "feature": args.feature,
        "anchor_strategy": args.strategy,
        "seed": args.seed,
        "error_threshold": args.threshold,
    }
    if args.scaled is not None:
        scalar_overrides["scaled"] = _parse_bool(args.scaled)
    for key, value in scalar_overrides.items():
        if value is not None:
            overrides[key] = value
    if cfg is None:
        cfg = SweepConfig(**overrides)
    elif overrides:
        cfg = dataclasses.replace(cfg, **overrides)

    total_points = (
        len(cfg.n_list) * len(cfg.k_list) * len(cfg.m_list) * len(cfg.eta_list)
        * cfg.trials * cfg.anchor_resamples
    )
    print(f"sweep: {total_points} trial rows", file=sys.stderr)

    def progress(done: int, total: int) -> None:
        step = max(1, total // 20)
        if done % step == 0 or done == total:
            print(f"progress {done}/{total} graph batches", file=sys.stderr)

    result = run_sweep(cfg, jobs=args.jobs, progress=progress)
    write_csv(result, args.out, include_timing=args.timings)
    failures = sum(1 for rec in result.records if rec.failure is not None)
    print(f"wrote {len(result.records)} rows to {args.out}", file=sys.stderr)
    if failures:
        print(f"warning: {failures} failed trials recorded", file=sys.stderr)
    return 0


def _cmd_kemp(args: argparse.Namespace) -> int:
    rows = read_csv_rows(args.in_path)
    table = kemp_table(rows, float(args.threshold))
    print(f"{'n':>6} {'m':>3} {'eta':>8} {'k_emp':>5} {'rho_eng':>8} "
          f"{'image_frac':>10} {'preimage':>9} {'codebook':>9}")
    for row in table:
        k_text = "none" if row.k_emp is None else str(row.k_emp)
        rho_text = "n/a" if row.rho is None else f"{row.rho:.3f}"
        im_text = "n/a" if row.image_frac is None else f"{row.image_frac:.4f}"
        pre_text = "n/a" if row.mean_preimage is None else f"{row.mean_preimage:.4f}"
        cb_text = "n/a" if row.codebook is None else f"{row.codebook:.1f}"
        print(f"{row.n:>6} {row.m:>3} {row.eta:>8} {k_text:>5} {rho_text:>8} "
              f"{im_text:>10} {pre_text:>9} {cb_text:>9}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="obsmap",
        description="Observation maps on graphs: anchor distances plus "
        "quantized spectral signatures, with identifiability diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-regular", help="generate a connected random regular graph")
    p.add_argument("--n", type=int, required=True, help="vertex count")
    p.add_argument("--r", type=int, default=3, help="degree (default 3)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="PATH", help="edge-list output (default stdout)")
    p.set_defaults(func=_cmd_gen_regular)

    p = sub.add_parser("graph-stats", help="structural statistics of a graph")
    _add_graph_source(p)
    p.set_defaults(func=_cmd_graph_stats)

    p = sub.add_parser("analyze", help="evaluate one observation-map configuration")
    _add_graph_source(p)
    _add_observation_flags(p)
    p.add_argument("--resamples", type=int, default=1, help="independent anchor draws")
    p.add_argument("--csv", metavar="PATH", help="write per-resample records")
    p.add_argument("--timings", action="store_true", help="put wall times in the CSV")
    p.add_argument("--basis-tsv", metavar="PATH", help="dump retained eigenvectors as TSV")
    p.add_argument("--embedding-tsv", metavar="PATH", help="dump embedding values as TSV")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("sweep", help="run a parameter sweep to CSV")
    p.add_argument("--config", metavar="PATH", help="key=value grid file")
    p.add_argument("--n", action="append", type=int, help="grid n (repeatable)")
    p.add_argument("--k", action="append", type=int, help="grid k (repeatable)")
    p.add_argument("--m", action="append", type=int, help="grid m (repeatable)")
    p.add_argument("--eta", action="append", help="grid eta (repeatable, decimal strings)")
    p.add_argument("--trials", type=int, help="graphs per grid cell")
    p.add_argument("--resamples", type=int, help="anchor draws per graph")
    p.add_argument("--r", type=int, help="regular degree")
    p.add_argument("--quantizer", choices=("absolute", "relative"))
    p.add_argument("--scaled", metavar="BOOL", help="true/false")
    p.add_argument("--feature", choices=("nope", "distance", "spectral", "full"))
    p.add_argument("--strategy", choices=("random", "degree", "farthest"))
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--threshold", type=float, help="error threshold for k_emp")
    p.add_argument("--jobs", type=int, default=os.cpu_count(), help="worker processes")
    p.add_argument("--timings", action="store_true", help="put wall times in the CSV")
    p.add_argument("--out", metavar="PATH", required=True, help="CSV output path")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("kemp", help="anchor thresholds from a sweep CSV")
    p.add_argument("--in", dest="in_path", metavar="PATH", required=True, help="sweep CSV")
    p.add_argument("--threshold", default="0.1", help="mean-error threshold")
    p.set_defaults(func=_cmd_kemp)

    p = sub.add_parser("diagnose-buckets", help="bucket-level collision diagnostics")
    _add_graph_source(p)
    _add_observation_flags(p)
    p.add_argument("--top", type=int, default=10, help="largest buckets to list")
    p.set_defaults(func=_cmd_diagnose_buckets)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EdgeListParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConnectivityError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
