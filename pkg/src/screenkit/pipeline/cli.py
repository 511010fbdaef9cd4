"""Command-line entry point. Every subcommand builds a job spec and runs it
through :func:`screenkit.pipeline.jobs.execute`, the same path the HTTP
service uses.

Exit codes: 0 success, 1 domain error (bad data, untrained model, ...),
2 usage error (bad flags or a spec that fails the schema).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .. import __version__
from .jobs import SCHEMA, JobError, SpecError, _TASK_RULES, execute, primary_artifact

BINARY = (".bin", ".png")


class UsageError(Exception):
    pass


def _add_common(p: argparse.ArgumentParser, out_required: bool = False, figure: bool = False):
    p.add_argument("--seed", type=int, default=0, help="seed for every random draw (default 0)")
    p.add_argument("--out", required=out_required, help="primary output file (stdout if omitted and textual)")
    if figure:
        p.add_argument("--figure", help="also render a PNG report figure to this path")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="screenkit", description="Molecular screening and generation toolkit.")
    ap.add_argument("--version", action="version", version=f"screenkit {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("parse", help="parse a SMILES list into JSONL records")
    p.add_argument("--in", dest="smiles", required=True)
    _add_common(p)

    p = sub.add_parser("sim", help="similarity matrix between two SMILES lists")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--metric", choices=["tanimoto", "edit", "wl"], default="tanimoto")
    _add_common(p, figure=True)

    mev = sub.add_parser("mevon", help="molecular evolution network").add_subparsers(dest="action", required=True)
    p = mev.add_parser("build", help="build the evolution graph")
    p.add_argument("--in", dest="molecules", required=True)
    p.add_argument("--labels", help="CSV with name,label columns")
    p.add_argument("--theta1", type=float, default=0.5)
    p.add_argument("--theta2", type=float, default=0.5)
    p.add_argument("--stage1-metric", choices=["fingerprint", "edit"], default="fingerprint")
    _add_common(p)
    p = mev.add_parser("predict", help="propagate labels to query molecules")
    p.add_argument("--graph", required=True)
    p.add_argument("--query", required=True)
    _add_common(p)

    kg = sub.add_parser("kg", help="numeric knowledge-graph embedding").add_subparsers(dest="action", required=True)
    p = kg.add_parser("train", help="train an embedding table")
    p.add_argument("--min", type=float, required=True)
    p.add_argument("--max", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--metric", choices=["l1", "l2"], default="l1")
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.01)
    _add_common(p, out_required=True, figure=True)

    dom = sub.add_parser("domains", help="source-domain selection").add_subparsers(dest="action", required=True)
    p = dom.add_parser("select", help="rank source sets by Wasserstein distance to a target set")
    p.add_argument("--target", required=True)
    p.add_argument("--sources", nargs="+", required=True)
    p.add_argument("-k", type=int, required=True)
    _add_common(p, figure=True)

    p = sub.add_parser("train", help="train a prediction head, score model or controller")
    p.add_argument("--task", dest="head", required=True, choices=["mpp", "dta", "ddi", "score", "controller"])
    p.add_argument("--data", help="dataset CSV (mpp/dta/ddi; smiles,label for controller)")
    p.add_argument("--molecules", help="SMILES list (score)")
    p.add_argument("--kg", help="embedding table for mpp value alignment")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--hidden", type=int)
    p.add_argument("--layers", type=int)
    p.add_argument("--mode", choices=["regression", "classification"])
    p.add_argument("--nodes", type=int, help="padded graph size for score/controller (default 9)")
    _add_common(p, out_required=True, figure=True)

    p = sub.add_parser("predict", help="predict with a trained head")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    _add_common(p)

    p = sub.add_parser("screen", help="rank a ligand library against a protein target")
    p.add_argument("--target", required=True, help="FASTA file with one sequence")
    p.add_argument("--library", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--top", type=int, required=True)
    _add_common(p, figure=True)

    p = sub.add_parser("generate", help="sample molecules from a score model")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--nodes", type=int)
    p.add_argument("--guide", help="controller checkpoint for guidance")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--reject-log", help="JSONL of quantization rejections")
    _add_common(p)

    p = sub.add_parser("optimize", help="guided or scaffold-constrained optimization")
    p.add_argument("--model", required=True)
    p.add_argument("--mode", choices=["guided", "scaffold"], default="guided")
    p.add_argument("--guide")
    p.add_argument("--before", help="starting molecules the result is compared against")
    p.add_argument("--template", help="template SMILES (scaffold mode)")
    p.add_argument("--mask", help="comma-separated node indices to regenerate (scaffold mode)")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    _add_common(p)

    met = sub.add_parser("metrics", help="generation metrics").add_subparsers(dest="metric", required=True)
    p = met.add_parser("mmd", help="MMD between two SMILES sets on graph statistics")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    _add_common(p)

    p = sub.add_parser("run", help="run a job spec JSON file, writing every artifact to a directory")
    p.add_argument("spec")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("schema", help="print the job spec JSON schema")

    p = sub.add_parser("serve", help="start the job service")
    p.add_argument("--workdir", default=os.environ.get("WORKDIR", "./screenkit-work"))
    p.add_argument("--port", type=int, default=int(os.environ.get("PORT", "8000")))
    p.add_argument("--host", default="127.0.0.1")
    return ap


def _drop_none(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}


def spec_from_args(args) -> dict:
    """Translate parsed flags into a job spec."""
    c = args.command
    inputs: dict = {}
    params: dict = {}
    if c == "parse":
        inputs = {"smiles": args.smiles}
    elif c == "sim":
        inputs, params = {"a": args.a, "b": args.b}, {"metric": args.metric}
    elif c == "mevon":
        params = {"action": args.action}
        if args.action == "build":
            inputs = _drop_none({"molecules": args.molecules, "labels": args.labels})
            params.update(theta1=args.theta1, theta2=args.theta2, stage1_metric=args.stage1_metric)
        else:
            inputs = {"graph": args.graph, "query": args.query}
        c = "mevon"
    elif c == "kg":
        params = {"min": args.min, "max": args.max, "step": args.step, "dim": args.dim, "gamma": args.gamma,
                  "metric": args.metric, "epochs": args.epochs, "lr": args.lr}
    elif c == "domains":
        inputs, params = {"target": args.target, "sources": list(args.sources)}, {"k": args.k}
    elif c == "train":
        inputs = _drop_none({"data": args.data, "molecules": args.molecules, "kg": args.kg})
        params = _drop_none({"head": args.head, "epochs": args.epochs, "lr": args.lr, "batch_size": args.batch_size,
                             "hidden": args.hidden, "layers": args.layers, "mode": args.mode, "nodes": args.nodes})
        if args.head == "score" and "molecules" not in inputs:
            raise UsageError("train --task score needs --molecules")
        if args.head != "score" and "data" not in inputs:
            raise UsageError(f"train --task {args.head} needs --data")
    elif c == "predict":
        inputs = {"model": args.model, "data": args.data}
    elif c == "screen":
        inputs, params = {"target": args.target, "library": args.library, "model": args.model}, {"top": args.top}
    elif c == "generate":
        inputs = _drop_none({"model": args.model, "guide": args.guide})
        params = _drop_none({"n": args.n, "nodes": args.nodes, "lambda": args.lam if args.guide else None})
    elif c == "optimize":
        inputs = _drop_none({"model": args.model, "guide": args.guide, "before": args.before})
        params = _drop_none({"mode": args.mode, "n": args.n, "lambda": args.lam, "template": args.template,
                             "mask": args.mask})
    elif c == "metrics":
        inputs, params = {"a": args.a, "b": args.b}, {"metric": args.metric}
    if getattr(args, "figure", None):
        params["figure"] = True
    return {"task": c, "inputs": inputs, "params": params, "seed": args.seed}


def _write(path: Path, data: bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)


def write_outputs(spec: dict, artifacts: dict[str, bytes], args):
    primary = primary_artifact(spec)
    out = Path(args.out) if args.out else None
    if out is not None:
        _write(out, artifacts[primary])
    elif primary.endswith(BINARY):
        raise UsageError(f"{spec['task']} writes a binary artifact; pass --out")
    else:
        sys.stdout.write(artifacts[primary].decode())
    figures = [n for n in artifacts if n.endswith(".png")]
    if getattr(args, "figure", None):
        fig = Path(args.figure)
        for k, name in enumerate(figures):
            _write(fig if k == 0 else fig.with_name(f"{fig.stem}-{Path(name).stem}{fig.suffix}"), artifacts[name])
    reject_log = getattr(args, "reject_log", None)
    if reject_log and "rejections.jsonl" in artifacts:
        _write(Path(reject_log), artifacts["rejections.jsonl"])
    if out is not None:
        for name, data in artifacts.items():
            if name == primary or name in figures or (reject_log and name == "rejections.jsonl"):
                continue
            _write(out.with_name(f"{out.stem}.{name}"), data)


def _schema_help(task: str | None) -> str:
    if task not in _TASK_RULES:
        return f"tasks: {', '.join(_TASK_RULES)}"
    req_in, opt_in, req_par, props = _TASK_RULES[task]
    return (f"task {task}: inputs {req_in} (optional {opt_in}); required params {req_par}; "
            f"known params {sorted(props)}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "schema":
        sys.stdout.write(json.dumps(SCHEMA, indent=1, sort_keys=True) + "\n")
        return 0
    if args.command == "serve":
        from .service import serve

        serve(args.workdir, args.port, args.host)
        return 0
    spec = None
    try:
        if args.command == "run":
            spec_path = Path(args.spec)
            try:
                spec = json.loads(spec_path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as err:
                raise UsageError(f"cannot read spec {spec_path}: {err}") from None
            artifacts = execute(spec, spec_path.parent)
            out_dir = Path(args.out_dir)
            for name, data in artifacts.items():
                _write(out_dir / name, data)
            return 0
        spec = spec_from_args(args)
        artifacts = execute(spec)
        write_outputs(spec, artifacts, args)
        return 0
    except (UsageError, SpecError) as err:
        parser.print_usage(sys.stderr)
        print(f"screenkit: usage error: {err}", file=sys.stderr)
        task = spec.get("task") if isinstance(spec, dict) else None
        print(_schema_help(task), file=sys.stderr)
        return 2
    except JobError as err:
        print(f"screenkit: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
