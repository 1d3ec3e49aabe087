"""Command-line front end.

Subcommands mirror the library workflow: inspect a graph's symmetries,
enumerate subgroups, run Bayesian model selection over the distinct
symmetry models, print fitted concentration tables, evaluate the cone
functionals at a point, and run the built-in verification suites.

Exit codes: 0 success, 2 input error, 3 model-precondition error,
4 capability error (no realization data for the graph), 5 verification
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import cone
from .butterfly import butterfly_graph
from .errors import (
    CapabilityError,
    DualMembershipError,
    HomconeError,
    HomogeneityError,
    IntegrabilityError,
)
from .graphs import automorphism_group, enumerate_subgroups, is_homogeneous_graph, load_graph
from .selection import (
    Hyperparams,
    build_butterfly_models,
    exam_marks_summary,
    fit_concentration,
    fit_concentration_mle,
    load_scatter_json,
    log_I,
    posterior,
    summarize_data,
)
from .verify import run_verification

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PRECONDITION = 3
EXIT_CAPABILITY = 4
EXIT_VERIFY = 5


def _load_rows_csv(path):
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for record in csv.reader(fh):
            if not record:
                continue
            try:
                rows.append([float(tok) for tok in record])
            except ValueError:
                if rows:
                    raise
                continue  # header line
    if not rows:
        raise ValueError(f"no numeric rows in {path}")
    return np.array(rows)


def _resolve_graph(args):
    if getattr(args, "graph", None):
        return load_graph(args.graph)
    return butterfly_graph()


def _resolve_data(args, p):
    sources = [s for s in ("data", "scatter", "fixture") if getattr(args, s, None)]
    if len(sources) != 1:
        raise ValueError("provide exactly one of --data, --scatter, --fixture")
    if args.fixture:
        if args.fixture != "exam-marks":
            raise ValueError(f"unknown fixture {args.fixture!r} (available: exam-marks)")
        return exam_marks_summary()
    if args.scatter:
        return load_scatter_json(args.scatter)
    rows = _load_rows_csv(args.data)
    if rows.shape[1] != p:
        raise ValueError(f"data has {rows.shape[1]} columns, graph has {p} vertices")
    return summarize_data(rows, center=not args.no_center)


def _resolve_scale(args, p):
    if getattr(args, "scale_file", None):
        with open(args.scale_file, "r", encoding="utf-8") as fh:
            mat = np.asarray(json.load(fh), dtype=float)
        if mat.shape != (p, p):
            raise ValueError(f"scale matrix is {mat.shape}, expected {(p, p)}")
        return mat
    return args.d_scale * np.eye(p)


def _resolve_models(args):
    graph = _resolve_graph(args)
    if not is_homogeneous_graph(graph):
        raise HomogeneityError(
            "model selection needs a homogeneous graph "
            "(chordal with no induced 4-vertex path)"
        )
    builtin = butterfly_graph()
    if graph.edges != builtin.edges or graph.vertex_count != builtin.vertex_count:
        raise CapabilityError(
            "no block-realization registry for this graph; "
            "the gamma factor of the normalizing constant is unavailable"
        )
    return graph, build_butterfly_models(getattr(args, "registry", None))


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def cmd_aut(args) -> int:
    graph = _resolve_graph(args)
    group = automorphism_group(graph)
    gens = ", ".join(g.cycle_string() for g in group.generators) or "e"
    print(f"order {group.order}; generators {gens}")
    return EXIT_OK


def cmd_subgroups(args) -> int:
    graph = _resolve_graph(args)
    group = automorphism_group(graph)
    subs = enumerate_subgroups(group)
    print(f"{len(subs)} subgroups of the automorphism group (order {group.order})")
    for i, h in enumerate(subs, start=1):
        gens = ", ".join(g.cycle_string() for g in h.generators) or "e"
        print(f"#{i}: order {h.order}; generators {gens}")
    return EXIT_OK


def cmd_select(args) -> int:
    graph, models = _resolve_models(args)
    data = _resolve_data(args, graph.vertex_count)
    hyper = Hyperparams(delta=args.delta, scale=_resolve_scale(args, graph.vertex_count))
    report = posterior(models, data, hyper)
    if args.output == "json":
        print(_dump_json(report.to_json_dict()))
    else:
        print(report.render_table())
    return EXIT_OK


def _format_fit_table(k, labels) -> str:
    width = max(len(s) for s in labels) + 2
    header = " " * width + "".join(f"{s:>{width}}" for s in labels)
    lines = [header]
    for i, row_label in enumerate(labels):
        cells = []
        for j in range(len(labels)):
            v = k[i, j] * 1e3
            cells.append(f"{'0':>{width}}" if v == 0.0 else f"{v:>{width}.2f}")
        lines.append(f"{row_label:<{width}}" + "".join(cells))
    return "\n".join(lines)


def cmd_fit(args) -> int:
    graph, models = _resolve_models(args)
    by_label = {m.label: m for m in models}
    if args.model not in by_label:
        raise ValueError(f"unknown model {args.model!r}; available: {sorted(by_label)}")
    data = _resolve_data(args, graph.vertex_count)
    fit = fit_concentration_mle if args.mle else fit_concentration
    k = fit(by_label[args.model], data)
    if args.output == "json":
        print(_dump_json({"model_id": args.model, "concentration": k.tolist()}))
    else:
        print(f"fitted concentrations x 10^3, model {args.model}")
        print(_format_fit_table(k, list(graph.labels)))
    return EXIT_OK


def cmd_constants(args) -> int:
    graph, models = _resolve_models(args)
    scale = _resolve_scale(args, graph.vertex_count)
    if not args.delta > 2.0:
        raise IntegrabilityError(f"shape parameter must exceed 2, got {args.delta}")
    alpha = (args.delta - 2.0) / 2.0
    wanted = args.model.split(",") if args.model else [m.label for m in models]
    known = {m.label for m in models}
    unknown = [w for w in wanted if w not in known]
    if unknown:
        raise ValueError(f"unknown models {unknown}; available: {sorted(known)}")
    rows = []
    for m in models:
        if m.label not in wanted:
            continue
        y = m.space.project(scale) / 2.0
        ld, lp = m.realization.log_delta_phi(y)
        rows.append(
            {
                "model_id": m.label,
                "dim": m.space.dim,
                "alpha": alpha,
                "log_gamma": m.realization.log_gamma(alpha),
                "log_delta": ld,
                "log_phi": lp,
                "log_I": log_I(m, args.delta, scale),
            }
        )
    if args.output == "json":
        print(_dump_json({"models": rows}))
    else:
        print(f"{'model':<8}{'dim':>4}{'log_gamma':>14}{'log_delta':>14}"
              f"{'log_phi':>14}{'log_I':>14}")
        for r in rows:
            print(f"{r['model_id']:<8}{r['dim']:>4}{r['log_gamma']:>14.6f}"
                  f"{r['log_delta']:>14.6f}{r['log_phi']:>14.6f}{r['log_I']:>14.6f}")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_verification(
        args.level, registry_path=args.registry, samples=args.samples, seed=args.seed
    )
    failed = [r for r in results if not r.passed]
    for r in results:
        mark = "ok" if r.passed else "FAIL"
        print(f"[{mark}] {r.name}: {r.detail}")
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homcone",
        description="Bayesian selection of permutation-invariant Gaussian "
        "graphical models on homogeneous graphs",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="dump solver iteration records to stderr as JSON lines")
    sub = parser.add_subparsers(dest="command", required=True)

    p_aut = sub.add_parser("aut", help="automorphism group of a graph")
    p_aut.add_argument("--graph", help="graph JSON file (default: built-in benchmark)")
    p_aut.set_defaults(func=cmd_aut)

    p_sub = sub.add_parser("subgroups", help="all subgroups of the automorphism group")
    p_sub.add_argument("--graph", help="graph JSON file (default: built-in benchmark)")
    p_sub.set_defaults(func=cmd_subgroups)

    def add_stat_args(p, with_data=True):
        p.add_argument("--graph", help="graph JSON file (default: built-in benchmark)")
        p.add_argument("--registry", help="override the realization registry JSON file")
        if with_data:
            p.add_argument("--data", help="CSV of observations, one row each")
            p.add_argument("--scatter", help="JSON scatter object")
            p.add_argument("--fixture", help="named built-in data set (exam-marks)")
            p.add_argument("--no-center", action="store_true",
                           help="do not center CSV observations")
        p.add_argument("--delta", type=float, default=3.0,
                       help="prior shape parameter (> 2, default 3)")
        p.add_argument("--d-scale", type=float, default=1.0,
                       help="prior scale is this multiple of the identity (default 1)")
        p.add_argument("--D", dest="scale_file",
                       help="prior scale matrix as a JSON file (overrides --d-scale)")
        p.add_argument("--output", choices=("table", "json"), default="table")
        p.add_argument("--seed", type=int, default=0xC0FFEE)

    p_sel = sub.add_parser("select", help="posterior probabilities over symmetry models")
    add_stat_args(p_sel)
    p_sel.set_defaults(func=cmd_select)

    p_fit = sub.add_parser("fit", help="fitted concentration table for one model")
    add_stat_args(p_fit)
    p_fit.add_argument("--model", required=True, help="model id, e.g. G3")
    p_fit.add_argument("--mle", action="store_true",
                       help="use the restricted-likelihood maximizer instead of the "
                            "symmetry-projected estimate")
    p_fit.set_defaults(func=cmd_fit)

    p_const = sub.add_parser("constants",
                             help="log gamma / delta / phi / I at the prior point")
    add_stat_args(p_const, with_data=False)
    p_const.add_argument("--model", help="comma-separated model ids (default: all)")
    p_const.set_defaults(func=cmd_constants)

    p_ver = sub.add_parser("verify", help="run the self-check suites")
    p_ver.add_argument("--level", choices=("fast", "mc"), default="fast")
    p_ver.add_argument("--registry", help="override the realization registry JSON file")
    p_ver.add_argument("--samples", type=int, help="Monte Carlo sample count")
    p_ver.add_argument("--seed", type=int, default=0xC0FFEE)
    p_ver.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        cone.set_newton_trace(
            lambda record: print(json.dumps(record, sort_keys=True), file=sys.stderr)
        )
    try:
        return args.func(args)
    except HomogeneityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (IntegrabilityError, DualMembershipError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except CapabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (HomconeError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        cone.set_newton_trace(None)


if __name__ == "__main__":
    sys.exit(main())
