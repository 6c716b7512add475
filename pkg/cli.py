"""covselect command line: selection, post-selection P-values, interactions, graphs and simulations.

The response is the LAST column of the table unless --response names it (by
header name or 1-based index). Covariate indices in every report are 1-based.
"""
import argparse
import json
import logging
import math
import sys
from pathlib import Path

from pydantic import ValidationError

import config
from design_expansion import expanded_labels, gen_interactions, interaction_count
from errors import EXIT_DATA, EXIT_OK, EXIT_USAGE, CovselectError
from monte_carlo import bidiagonal_graph_sim, overfit_sim, simulate_false_positives, tutorial_sim
from schemas import GraphConfig, PvalueConfig, SimConfig
from services import GraphService, RunService, SelectionService
from stepwise_selection import averaged_fit_misclassification
from table_io import read_matrix, read_table, write_table

logger = logging.getLogger(__name__)

# Default amplitudes of the two tutorial benchmarks.
TUTORIAL_AMPLITUDE = {1: 4.5, 2: 7.5}


class UsageError(Exception):
    """Bad command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def format_pvalue(p: float) -> str:
    """7 significant digits: scientific below 1e-3, fixed otherwise."""
    if p == 0:
        return "0"
    if p < 1e-3:
        return f"{p:.6e}"
    return f"{p:.{max(6 - math.floor(math.log10(p)), 0)}f}"


def format_rss(rss: float) -> str:
    return f"{rss:.7g}"


def parse_indices(text: str | None) -> list[int] | None:
    """"1,5,9" -> [0, 4, 8]."""
    if text is None:
        return None
    try:
        values = [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError:
        raise UsageError(f"not a comma-separated index list: {text!r}") from None
    if not values or min(values) < 1:
        raise UsageError(f"indices are 1-based and must be positive: {text!r}")
    return [v - 1 for v in values]


def emit(rows: list[dict], fmt: str, out=None) -> None:
    """Aligned text table with a header, or one JSON record per row."""
    out = out or sys.stdout
    if fmt == "records":
        for row in rows:
            out.write(json.dumps(row) + "\n")
        return
    if not rows:
        return
    headers = list(rows[0])
    cells = [[_cell(row[h]) for h in headers] for row in rows]
    widths = [max(len(h), *(len(c[i]) for c in cells)) for i, h in enumerate(headers)]
    out.write("  ".join(h.rjust(w) for h, w in zip(headers, widths)).rstrip() + "\n")
    for line in cells:
        out.write("  ".join(c.rjust(w) for c, w in zip(line, widths)).rstrip() + "\n")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.7g}"
    return str(value)


def _text_row(row: dict, fmt: str) -> dict:
    if fmt == "records":
        return row
    row = dict(row)
    if "pvalue" in row:
        row["pvalue"] = format_pvalue(row["pvalue"])
    if "rss" in row:
        row["rss"] = format_rss(row["rss"])
    return row


def _timing(args, elapsed: float) -> None:
    if args.time:
        if args.format == "records":
            print(json.dumps({"elapsed": elapsed}))
        else:
            print(f"time: {elapsed:.3f}s")


def _session(args):
    if not args.save:
        return None
    from database import SessionLocal, init_db

    init_db()
    return SessionLocal()


def _pvalue_config(args) -> PvalueConfig:
    return PvalueConfig(
        alpha=args.alpha, kmax=args.kmax, nu=args.nu, ek=args.ek, centered=not args.no_offset, misclass=args.misclass
    )


def _step_row(step, misclass: bool) -> dict:
    row = {"index": step.index, "label": step.label, "pvalue": step.pvalue, "rss": step.rss}
    if misclass:
        row["misclass"] = step.misclass
    return row


def cmd_select(args) -> int:
    data = read_table(args.table, args.response)
    cfg = _pvalue_config(args)
    db = _session(args)
    try:
        path, run_id = SelectionService.select(data, cfg, columns=parse_indices(args.columns), db=db)
    finally:
        if db is not None:
            db.close()
    emit([_text_row(_step_row(step, cfg.misclass), args.format) for step in path.steps], args.format)
    _timing(args, path.elapsed)
    if run_id is not None:
        print(f"saved run {run_id}", file=sys.stderr)
    return EXIT_OK


def cmd_select_all(args) -> int:
    data = read_table(args.table, args.response)
    cfg = _pvalue_config(args)
    db = _session(args)
    try:
        result, run_id = SelectionService.select_all(
            data, cfg, nmax=args.nmax, vmax=args.vmax, columns=parse_indices(args.columns), db=db
        )
    finally:
        if db is not None:
            db.close()
    rows = [
        _text_row({"group": group.group_id, **_step_row(step, cfg.misclass)}, args.format)
        for group in result.groups
        for step in group.steps
    ]
    emit(rows, args.format)
    if args.average and result.groups:
        count = averaged_fit_misclassification(data, result, cfg.centered)
        if args.format == "records":
            print(json.dumps({"averaged_fit_misclass": count}))
        else:
            print(f"averaged fit misclassifications: {count}")
    _timing(args, result.elapsed)
    if run_id is not None:
        print(f"saved run {run_id}", file=sys.stderr)
    return EXIT_OK


def cmd_pvals(args) -> int:
    data = read_table(args.table, args.response)
    ind = parse_indices(args.ind)
    db = _session(args)
    try:
        results, elapsed, run_id = SelectionService.pvals(
            data, ind, alpha=args.alpha, alpha1=args.alpha1, augmented=args.augmented, misclass=args.misclass, db=db
        )
    finally:
        if db is not None:
            db.close()
    rows = []
    for result in results:
        companions = [c.signed_index for c in result.companions] + [0, 0]
        row = {"index": result.index, "pvalue": result.pvalue, "i2": companions[0], "i3": companions[1], "rss": result.rss}
        if args.misclass:
            row["misclass"] = result.misclass
        rows.append(_text_row(row, args.format))
    emit(rows, args.format)
    _timing(args, elapsed)
    if run_id is not None:
        print(f"saved run {run_id}", file=sys.stderr)
    return EXIT_OK


def cmd_interact(args) -> int:
    if args.no_response:
        X, labels = read_matrix(args.table)
        y = None
    else:
        data = read_table(args.table, args.response)
        X, labels, y = data.X, data.labels, data.y
    k = X.shape[1]
    expanded, table = gen_interactions(X, args.ord)
    output = Path(args.output)
    write_table(output, expanded, expanded_labels(table, labels), y=y)
    decode_path = Path(args.decode) if args.decode else output.with_name(output.name + ".decode")
    decode_path.write_text(table.to_text())
    count = interaction_count(k, args.ord)
    print(
        f"{count} interaction columns = C({k}+{args.ord},{args.ord}) - 1; "
        f"a constant column would make it {count + 1}"
    )
    print(f"wrote {output} and {decode_path}")
    return EXIT_OK


def cmd_graph(args) -> int:
    X, labels = read_matrix(args.table)
    cfg = GraphConfig(
        alpha=args.alpha,
        nu=args.nu,
        repeated=args.repeated,
        bonferroni=not args.no_bonferroni,
        edge_rule=args.edge_rule,
        kmax=args.kmax,
        nmax=args.nmax,
        vmax=args.vmax,
    )
    db = _session(args)
    try:
        graph, run_id = GraphService.build(X, cfg, subset=parse_indices(args.nodes), n_jobs=args.jobs, db=db)
    finally:
        if db is not None:
            db.close()
    if args.format == "records":
        text = "".join(edge.model_dump_json() + "\n" for edge in graph.edges)
    else:
        text = graph.to_text()
    if args.output:
        Path(args.output).write_text(text)
        print(f"{len(graph.edges)} edges written to {args.output}")
    else:
        sys.stdout.write(text)
    _timing(args, graph.elapsed)
    if run_id is not None:
        print(f"saved run {run_id}", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.variant == "fp":
        cfg = SimConfig(seed=args.seed, nsim=args.nsim, n=args.n, k=args.k, alpha=args.alpha, nu=args.nu, kmx=args.kmx)
        table = simulate_false_positives(cfg, n_jobs=args.jobs)
        row = {str(c): f for c, f in enumerate(table.frequencies)}
        row["mean"] = table.mean
        rows = [row] if args.format == "records" else [{key: f"{value:.3f}" for key, value in row.items()}]
        emit(rows, args.format)
        _timing(args, table.elapsed)
    elif args.variant == "tutorial":
        amplitude = args.amplitude if args.amplitude is not None else TUTORIAL_AMPLITUDE.get(args.tutorial, 0.0)
        cfg = SimConfig(
            seed=args.seed, nsim=args.nsim, n=args.n, k=args.k, s=args.s,
            amplitude=amplitude, alpha=args.alpha, nu=args.nu, rho=args.rho,
        )
        result = tutorial_sim(args.tutorial, cfg, n_jobs=args.jobs)
        row = {"tutorial": result.variant, "nu": result.nu, "fp": result.fp_mean, "fn": result.fn_mean}
        emit([row], args.format)
        _timing(args, result.elapsed)
    elif args.variant == "graph":
        result = bidiagonal_graph_sim(
            args.n, args.k, rho=args.rho, alpha=args.alpha, seed=args.seed, nu=args.nu, n_jobs=args.jobs
        )
        emit([{"edges": len(result.graph.edges), "true_edges": result.n_true_edges,
               "fp": result.fp_edges, "fn": result.fn_edges}], args.format)
        _timing(args, result.graph.elapsed)
    else:
        data = read_table(args.table, args.response)
        table = overfit_sim(data, parse_indices(args.keep) or [], args.kmax, nsim=args.nsim, seed=args.seed,
                            n_jobs=args.jobs)
        rows = [{"misclass": count, "frequency": freq} for count, freq in sorted(table.frequencies.items())]
        emit(rows, args.format)
        if args.format == "records":
            print(json.dumps({"mean": table.mean}))
        else:
            print(f"mean: {table.mean:.3f}")
    return EXIT_OK


def cmd_runs(args) -> int:
    from database import SessionLocal, init_db

    init_db()
    db = SessionLocal()
    try:
        runs = RunService.list_runs(db, limit=args.limit)
        rows = [
            {
                "id": run.id,
                "command": run.command,
                "created_at": run.created_at.isoformat(timespec="seconds"),
                "n": run.n,
                "k": run.k,
                "alpha": run.alpha,
                "nu": run.nu,
                "selected": run.n_selected,
            }
            for run in runs
        ]
    finally:
        db.close()
    emit(rows, args.format)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("main:app", host=args.host, port=args.port)
    return EXIT_OK


def _output_options() -> argparse.ArgumentParser:
    parent = _Parser(add_help=False)
    parent.add_argument("--format", choices=["text", "records"], default="text")
    parent.add_argument("--time", action="store_true", help="print the elapsed time")
    parent.add_argument("--save", action="store_true", help="store the run in the run store")
    return parent


def _table_options() -> argparse.ArgumentParser:
    parent = _Parser(add_help=False)
    parent.add_argument("table", help="comma or whitespace delimited numeric table")
    parent.add_argument("--response", help="response column name or 1-based index (default: last column)")
    return parent


def _selection_options() -> argparse.ArgumentParser:
    parent = _Parser(add_help=False)
    parent.add_argument("--alpha", type=float, default=config.DEFAULT_ALPHA)
    parent.add_argument("--kmax", type=int)
    parent.add_argument("--nu", type=float, default=1.0)
    parent.add_argument("--ek", type=float, help="effective number of covariates (default: k)")
    parent.add_argument("--misclass", action="store_true", help="report misclassification counts")
    parent.add_argument("--no-offset", action="store_true", help="fit without an intercept")
    parent.add_argument("--columns", help="restrict candidates to these 1-based columns")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="covselect", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--log-level", default=config.LOG_LEVEL)
    parser.add_argument("--jobs", type=int, default=config.N_JOBS, help="worker processes (results do not depend on it)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    output, table, selection = _output_options(), _table_options(), _selection_options()

    p = sub.add_parser("select", parents=[table, selection, output], help="stepwise selection")
    p.set_defaults(handler=cmd_select)

    p = sub.add_parser("select-all", parents=[table, selection, output], help="repeated stepwise selection")
    p.add_argument("--nmax", type=int, help="maximum number of groups")
    p.add_argument("--vmax", type=int, help="maximum number of covariates over all groups")
    p.add_argument("--average", action="store_true", help="misclassifications of the averaged fit")
    p.set_defaults(handler=cmd_select_all)

    p = sub.add_parser("pvals", parents=[table, output], help="P-values for a given covariate set")
    p.add_argument("--ind", required=True, help="comma-separated 1-based covariate indices")
    p.add_argument("--alpha", type=float, default=config.DEFAULT_ALPHA)
    p.add_argument("--alpha1", type=float, default=config.DEFAULT_ALPHA)
    p.add_argument("--augmented", action="store_true", help="add the best covariate to every subset")
    p.add_argument("--misclass", action="store_true")
    p.set_defaults(handler=cmd_pvals)

    p = sub.add_parser("interact", parents=[table], help="expand covariates to all interactions")
    p.add_argument("--ord", type=int, required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--decode", help="decode table path (default: OUTPUT.decode)")
    p.add_argument("--no-response", action="store_true", help="expand every column")
    p.set_defaults(handler=cmd_interact)

    p = sub.add_parser("graph", parents=[output], help="dependency graph by neighborhood selection")
    p.add_argument("table")
    p.add_argument("--alpha", type=float, default=config.DEFAULT_ALPHA)
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--repeated", action="store_true", help="repeated stepwise per node")
    p.add_argument("--nmax", type=int, help="maximum number of groups per node")
    p.add_argument("--vmax", type=int, help="maximum number of neighbors per node")
    p.add_argument("--kmax", type=int)
    p.add_argument("--no-bonferroni", action="store_true", help="use alpha per node instead of alpha / nodes")
    p.add_argument("--nodes", help="comma-separated 1-based node subset")
    p.add_argument("--edge-rule", choices=["or", "and"], default="or")
    p.add_argument("--output")
    p.set_defaults(handler=cmd_graph)

    p = sub.add_parser("simulate", help="simulation harnesses")
    sims = p.add_subparsers(dest="variant", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--nsim", type=int, default=100)
    common.add_argument("--alpha", type=float, default=config.DEFAULT_ALPHA)
    common.add_argument("--nu", type=float, default=1.0)
    common.add_argument("--format", choices=["text", "records"], default="text")
    common.add_argument("--time", action="store_true")

    s = sims.add_parser("fp", parents=[common], help="false positives under pure noise")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--kmx", type=int, default=10)

    s = sims.add_parser("tutorial", parents=[common], help="sparse model with correlated covariates")
    s.add_argument("--tutorial", type=int, choices=[1, 2], default=1)
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--k", type=int, default=1000)
    s.add_argument("--s", type=int, default=60)
    s.add_argument("--amplitude", type=float)
    s.add_argument("--rho", type=float, default=0.25)

    s = sims.add_parser("graph", parents=[common], help="bidiagonal precision graph recovery")
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--k", type=int, default=1000)
    s.add_argument("--rho", type=float, default=0.25)

    s = sims.add_parser("overfit", parents=[common], help="misclassification with noise covariates")
    s.add_argument("table")
    s.add_argument("--response")
    s.add_argument("--keep", help="comma-separated 1-based covariates kept from the data")
    s.add_argument("--kmax", type=int, required=True)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("runs", help="list stored runs")
    p.add_argument("--limit", type=int, default=50)
    p.add_argument("--format", choices=["text", "records"], default="text")
    p.set_defaults(handler=cmd_runs)

    p = sub.add_parser("serve", help="start the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=cmd_serve)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except (UsageError, ValidationError) as exc:
        print(f"covselect: {' '.join(str(exc).split())}", file=sys.stderr)
        return EXIT_USAGE
    except CovselectError as exc:
        print(f"covselect: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"covselect: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
