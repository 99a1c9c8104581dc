"""Command-line interface: a thin client over the compute service.

Subcommands mirror the service endpoints; table output is CSV with a
self-describing JSON header line, floats at 12 significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .client import ServiceClient, ServiceError
from .config import ExperimentConfig
from .harness import (
    GRAPH_COLUMNS,
    LATTICE_COLUMNS,
    PEEL_COLUMNS,
    SURFACE_COLUMNS,
    SWEEP_COLUMNS,
    fmt_value,
    render_csv,
)


def _common(parser):
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--emit", type=str, default=None, help="write CSV here (default stdout)")
    parser.add_argument("--config", type=str, default=None, help="JSON config file")
    parser.add_argument("--server", type=str, default=None, help="remote service URL (default in-process)")
    parser.add_argument("--timings", action="store_true", help="record wall-clock times (breaks byte reproducibility)")


def build_parser():
    p = argparse.ArgumentParser(prog="hypdiam", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("hexagon", help="hexagon constants as JSON")
    s.add_argument("--ell", type=float, required=True)
    _common(s)

    s = sub.add_parser("lattice", help="orbit-ball censuses on a radius grid")
    s.add_argument("--ell", type=float, required=True)
    s.add_argument("--radius", type=float, required=True)
    s.add_argument("--grid-step", type=float, default=None)
    _common(s)

    s = sub.add_parser("graph", help="configuration-model samples")
    s.add_argument("--genus", type=int, required=True)
    s.add_argument("--trials", type=int, default=1)
    _common(s)

    s = sub.add_parser("surface", help="diameter estimates on random surfaces")
    s.add_argument("--genus", type=int, required=True)
    s.add_argument("--ell", type=str, default="auto")
    s.add_argument("--trials", type=int, default=1)
    s.add_argument("--rcap", type=float, default=None)
    _common(s)

    s = sub.add_parser("peel", help="peeling exploration traces and audits")
    s.add_argument("--genus", type=int, required=True)
    s.add_argument("--ell", type=str, default="auto")
    s.add_argument("--epsilon", type=float, default=0.4)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--trials", type=int, default=1)
    _common(s)

    s = sub.add_parser("verify", help="run the invariant suites")
    s.add_argument("--suite", choices=["geometry", "counting", "peeling", "all"], default="all")
    _common(s)

    s = sub.add_parser("sweep", help="scaling sweep across genera")
    s.add_argument("--genus", type=str, default=None, help="comma-separated genus list")
    s.add_argument("--ell", type=str, default=None)
    s.add_argument("--trials", type=int, default=None)
    s.add_argument("--rcap", type=float, default=None)
    _common(s)

    s = sub.add_parser("serve", help="run the service under uvicorn")
    s.add_argument("--host", type=str, default="127.0.0.1")
    s.add_argument("--port", type=int, default=8000)
    return p


def _ell_arg(v):
    return v if v == "auto" else float(v)


def _emit(text, path):
    if path:
        with open(path, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _csv_out(args, command, config, columns, rows):
    _emit(render_csv(command, config, config.get("seed", 0), columns, rows), args.emit)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service.app import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    client = ServiceClient(args.server)
    try:
        return _dispatch(args, client)
    except ServiceError as exc:
        print(f"error: {exc.detail}", file=sys.stderr)
        return 2
    finally:
        client.close()


def _dispatch(args, client) -> int:
    if args.command == "hexagon":
        data = client.post("/hexagon", {"ell": args.ell})
        rounded = {k: float(fmt_value(float(v))) for k, v in data.items()}
        _emit(json.dumps(rounded, indent=2, sort_keys=True) + "\n", args.emit)
        return 0

    if args.command == "lattice":
        payload = {"ell": args.ell, "radius": args.radius, "grid_step": args.grid_step}
        data = client.post("/lattice", payload)
        _csv_out(args, "lattice", {**payload, "seed": args.seed}, LATTICE_COLUMNS, data["rows"])
        return 0

    if args.command == "graph":
        payload = {"genus": args.genus, "trials": args.trials, "seed": args.seed}
        data = client.post("/graph", payload)
        rows = data["rows"]
        for r in rows:
            if r["graph_diameter"] is None:
                r["graph_diameter"] = math.inf
        _csv_out(args, "graph", payload, GRAPH_COLUMNS, rows)
        return 0

    if args.command == "surface":
        payload = {
            "genus": args.genus, "ell": _ell_arg(args.ell), "trials": args.trials,
            "seed": args.seed, "rcap": args.rcap, "threads": args.threads,
            "timings": args.timings,
        }
        data = client.post("/surface", payload)
        _csv_out(args, "surface", payload, SURFACE_COLUMNS, data["rows"])
        return 0

    if args.command == "peel":
        payload = {
            "genus": args.genus, "ell": _ell_arg(args.ell), "epsilon": args.epsilon,
            "k": args.k, "trials": args.trials, "seed": args.seed,
            "threads": args.threads, "timings": args.timings,
        }
        data = client.post("/peel", payload)
        _csv_out(args, "peel", payload, PEEL_COLUMNS, data["rows"])
        return 0

    if args.command == "verify":
        data = client.post("/verify", {"suite": args.suite})
        lines = []
        for suite in data["suites"]:
            lines.append(f"suite {suite['suite']}: {'pass' if suite['passed'] else 'FAIL'}")
            for c in suite["checks"]:
                mark = "ok" if c["passed"] else "FAIL"
                detail = f"  {c['detail']}" if c["detail"] else ""
                lines.append(f"  [{mark:>4}] {c['name']}{detail}")
        lines.append("overall: " + ("pass" if data["passed"] else "FAIL"))
        _emit("\n".join(lines) + "\n", args.emit)
        return 0 if data["passed"] else 1

    if args.command == "sweep":
        cfg = _sweep_config(args)
        data = client.post("/sweep", cfg.model_dump())
        csv = render_csv("sweep", data["config"], cfg.seed, SWEEP_COLUMNS, data["rows"])
        _emit(csv, args.emit)
        print(json.dumps({"summary": data["summary"]}, sort_keys=True), file=sys.stderr)
        return 0

    raise AssertionError(f"unhandled command {args.command}")


def _sweep_config(args) -> ExperimentConfig:
    base = {}
    if args.config:
        with open(args.config) as f:
            base = json.load(f)
    if args.genus:
        base["genus"] = [int(x) for x in args.genus.split(",")]
    if args.ell is not None:
        base["ell"] = _ell_arg(args.ell)
    if args.trials is not None:
        base["trials"] = args.trials
    if args.rcap is not None:
        base["rcap"] = args.rcap
    if args.seed:
        base["seed"] = args.seed
    if args.threads != 1:
        base["threads"] = args.threads
    if args.timings:
        base["timings"] = True
    return ExperimentConfig(**base)


if __name__ == "__main__":
    raise SystemExit(main())
