"""Command line: ``gen``, ``run``, ``table``, ``roc``.

Exit codes: 0 on success (per-cell numerical failures only produce warnings
in the report), 2 on an invalid or missing config or input file, 1 on any
other error.
"""

import argparse
import json
import sys
from pathlib import Path

from . import harness, io
from .errors import InvalidArgumentError, SparseCausalError
from .simulator import generate_process_spec, simulate, true_network


def _cmd_gen(args):
    spec = generate_process_spec(args.p, args.tau, args.n_links, rng_seed=args.seed,
                                 self_links=args.self_links)
    panel = simulate(spec, args.q + args.tau, rng_seed=args.seed + 1)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_spec(spec, out / "spec.txt")
    io.write_panel(panel, out / "panel.csv")
    io.write_network(true_network(spec), out / "truth.csv")
    print(f"wrote {out / 'spec.txt'}, {out / 'panel.csv'}, {out / 'truth.csv'}")
    return 0


def _load_config(args):
    if args.config is None:
        raise InvalidArgumentError("--config is required")
    path = Path(args.config)
    if not path.is_file():
        raise InvalidArgumentError(f"config file not found: {path}")
    cfg = harness.ExperimentConfig.from_json(path)
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.jobs is not None:
        cfg.n_jobs = args.jobs
    return cfg


def _cmd_run(args):
    cfg = _load_config(args)
    out = args.out or cfg.output_dir or "results"

    def progress(done, total):
        print(f"replicate {done}/{total}", file=sys.stderr)

    result = harness.run_experiment(cfg, progress=progress if args.verbose else None)
    harness.write_outputs(result, out)
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {out}/cells.csv, roc.csv, replicates.csv, report.txt "
          f"({len(result.cells)} cells, {result.wall_time:.1f} s)")
    return 0


def _read_cells(path):
    if not Path(path).is_file():
        raise InvalidArgumentError(f"input file not found: {path}")
    return harness.read_cells(path)


def _cmd_table(args):
    cells = _read_cells(args.inp)
    print(harness.format_table(cells, args.gamma, args.pv, mode=args.mode))
    return 0


def _cmd_roc(args):
    cells = _read_cells(args.inp)
    if args.out:
        harness.write_roc(cells, args.out)
    else:
        print(",".join(harness.ROC_FIELDS))
        for row in harness.roc_points(cells):
            print(",".join(harness.fmt(x) for x in row))
    return 0


def _cmd_schema(args):
    print(json.dumps(harness.CONFIG_SCHEMA, indent=2))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="sparsecausal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="draw a process spec and simulate one panel")
    g.add_argument("--p", type=int, default=20)
    g.add_argument("--tau", type=int, default=3)
    g.add_argument("--n-links", type=int, default=None)
    g.add_argument("--self-links", type=int, default=None,
                   help="variables with a lag-1 self coefficient (default: all)")
    g.add_argument("--q", type=int, default=1000, help="effective length (raw rows = q + tau)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=".")
    g.set_defaults(func=_cmd_gen)

    r = sub.add_parser("run", help="execute an experiment config (JSON)")
    r.add_argument("--config", required=False)
    r.add_argument("--seed", type=int, default=None, help="override master_seed")
    r.add_argument("--out", default=None)
    r.add_argument("--jobs", type=int, default=None)
    r.add_argument("-v", "--verbose", action="store_true")
    r.set_defaults(func=_cmd_run)

    t = sub.add_parser("table", help="format cells.csv like the results tables")
    t.add_argument("--in", dest="inp", required=True)
    t.add_argument("--gamma", type=float, default=0.1)
    t.add_argument("--pv", type=float, default=0.01)
    t.add_argument("--mode", default="conditional", choices=harness.MODES)
    t.set_defaults(func=_cmd_table)

    c = sub.add_parser("roc", help="emit ROC points (FP/m, TP/n) from cells.csv")
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--out", default=None)
    c.set_defaults(func=_cmd_roc)

    s = sub.add_parser("schema", help="print the JSON schema of experiment configs")
    s.set_defaults(func=_cmd_schema)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SparseCausalError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
