"""Job specifications, their schema, and the single execution path shared by
the CLI and the HTTP service.

A job is ``{"task", "inputs", "params", "seed"}``. ``execute`` turns a validated
spec into named artifacts (name -> bytes); callers decide where they go. The
spec hash covers task, params, seed and the *contents* of every input file, so
the same job over the same data hashes the same wherever the files live.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np
from scipy.stats import spearmanr

from ..chem import Molecule, SmilesError, has_substructure, parse_smiles, read_smiles_records, write_smiles
from ..chem.molecule import ChemError
from ..diffusion import (
    Controller,
    ControllerConfig,
    NoiseSchedule,
    Rejection,
    ScoreConfig,
    ScoreModel,
    edge_mask_from_nodes,
    encode_molecule,
    inpaint_sample,
    mmd_metric,
    optimize_success,
    quantize_batch,
    reverse_sample,
    train_controller,
    train_score,
)
from ..domains import fingerprint_domain, select_sources
from ..kg import MarginConfig, build_numeric_kg, directional_fraction, load_table, relation_projection, table_bytes, train_kg
from ..mevon import EvolutionConfig, EvolutionGraph, NoParentFound, build_graph, evo_predict
from ..nn import ModelParams, TrainConfig, load_dataset, predict, screen_library, train_head
from ..nn.protein import check_sequence
from ..similarity import edit_similarity, morgan_fingerprint, similarity_matrix, tanimoto, wl_similarity
from . import plotting
from .formats import csv_bytes, json_bytes, jsonl_bytes, meta, smiles_bytes

log = logging.getLogger("screenkit.jobs")

TASKS = ("parse", "sim", "mevon", "kg", "domains", "train", "predict", "screen", "generate", "optimize", "metrics")
HEADS = ("mpp", "dta", "ddi", "score", "controller")

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_count = {"type": "integer", "minimum": 1}
_epochs = {"type": "integer", "minimum": 0}
_unit = {"type": "number", "minimum": 0, "maximum": 1}
_path = {"type": "string", "minLength": 1}

# per-task: (required inputs, optional inputs, required params, param properties)
_TASK_RULES: dict[str, tuple[list[str], list[str], list[str], dict]] = {
    "parse": (["smiles"], [], [], {}),
    "sim": (["a", "b"], [], [], {
        "metric": {"enum": ["tanimoto", "edit", "wl"]}, "radius": {"type": "integer", "minimum": 0},
        "width": _count, "iterations": {"type": "integer", "minimum": 0},
    }),
    "mevon": ([], ["molecules", "labels", "graph", "query"], ["action"], {
        "action": {"enum": ["build", "predict"]}, "theta1": _unit, "theta2": _unit,
        "stage1_metric": {"enum": ["fingerprint", "edit"]},
    }),
    "kg": ([], [], ["min", "max", "step"], {
        "min": _num, "max": _num, "step": _pos, "dim": _count, "gamma": _pos,
        "metric": {"enum": ["l1", "l2", "L1", "L2"]}, "epochs": _epochs, "lr": _pos,
    }),
    "domains": (["target", "sources"], [], ["k"], {"k": _count, "radius": {"type": "integer", "minimum": 0},
                                                  "width": _count}),
    "train": ([], ["data", "molecules", "kg"], ["head"], {
        "head": {"enum": list(HEADS)}, "epochs": _epochs, "lr": _pos, "batch_size": _count, "hidden": _count,
        "layers": _count, "mode": {"enum": ["regression", "classification"]}, "nodes": _count,
    }),
    "predict": (["model", "data"], [], [], {}),
    "screen": (["target", "library", "model"], [], ["top"], {"top": _count}),
    "generate": (["model"], ["guide"], [], {"n": _count, "nodes": _count, "lambda": {"type": "number", "minimum": 0}}),
    "optimize": (["model"], ["guide", "before"], ["mode"], {
        "mode": {"enum": ["guided", "scaffold"]}, "n": _count, "lambda": {"type": "number", "minimum": 0},
        "template": {"type": "string", "minLength": 1}, "mask": {"type": "string", "pattern": r"^\d+(,\d+)*$"},
    }),
    "metrics": (["a", "b"], [], ["metric"], {"metric": {"enum": ["mmd"]}}),
}


def _task_schema(task: str) -> dict:
    req_in, opt_in, req_par, props = _TASK_RULES[task]
    inputs = {name: _path for name in req_in + opt_in}
    if task == "domains":
        inputs["sources"] = {"type": "array", "items": _path, "minItems": 1}
    return {
        "if": {"properties": {"task": {"const": task}}},
        "then": {
            "properties": {
                "inputs": {"properties": inputs, "required": req_in, "additionalProperties": False},
                "params": {"properties": {**props, "figure": {"type": "boolean"}}, "required": req_par,
                           "additionalProperties": False},
            }
        },
    }


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "screenkit job",
    "type": "object",
    "required": ["task", "seed"],
    "additionalProperties": False,
    "properties": {
        "task": {"enum": list(TASKS)},
        "inputs": {
            "type": "object",
            "additionalProperties": {"anyOf": [_path, {"type": "array", "items": _path}]},
        },
        "params": {
            "type": "object",
            "additionalProperties": {"type": ["string", "number", "boolean"]},
        },
        "seed": {"type": "integer", "minimum": 0},
    },
    "allOf": [_task_schema(t) for t in TASKS],
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


class SpecError(ValueError):
    """Schema violation; ``errors`` holds ``{"field", "message"}`` entries."""

    def __init__(self, errors: list[dict]):
        self.errors = errors
        super().__init__("; ".join(f"{e['field']}: {e['message']}" for e in errors))


class JobError(RuntimeError):
    """A valid spec that failed on its data (bad SMILES, untrained model, ...)."""


def validate(spec: dict) -> dict:
    """Check ``spec`` against SCHEMA and return it with defaults filled in."""
    if not isinstance(spec, dict):
        raise SpecError([{"field": "/", "message": "job spec must be a JSON object"}])
    errors = sorted(_VALIDATOR.iter_errors(spec), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        out = []
        for e in errors:
            where = "/" + "/".join(str(p) for p in e.absolute_path)
            if e.validator == "required":
                missing = e.message.split("'")[1]
                where = where.rstrip("/") + "/" + missing
            out.append({"field": where, "message": e.message})
        raise SpecError(out)
    return {"task": spec["task"], "inputs": dict(spec.get("inputs", {})), "params": dict(spec.get("params", {})),
            "seed": spec["seed"]}


def _file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def spec_hash(spec: dict, base: Path | None = None) -> str:
    """First 16 hex digits of SHA-256 over task, params, seed and input contents."""
    base = base or Path.cwd()
    digests = {}
    for name, value in sorted(spec["inputs"].items()):
        paths = value if isinstance(value, list) else [value]
        digests[name] = [_file_digest(base / p) for p in paths]
    doc = {"task": spec["task"], "params": spec["params"], "seed": spec["seed"], "inputs": digests}
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class _Ctx:
    spec: dict
    base: Path
    meta: dict
    artifacts: dict[str, bytes] = field(default_factory=dict)

    @property
    def params(self) -> dict:
        return self.spec["params"]

    @property
    def seed(self) -> int:
        return self.spec["seed"]

    @property
    def figure(self) -> bool:
        return bool(self.params.get("figure", False))

    def path(self, name: str) -> Path:
        value = self.spec["inputs"].get(name)
        if value is None:
            raise JobError(f"input {name!r} is required for this job")
        return self.base / value

    def has(self, name: str) -> bool:
        return name in self.spec["inputs"]

    def smiles(self, name: str) -> list[Molecule]:
        path = self.path(name)
        mols = []
        for k, (smi, label) in enumerate(read_smiles_records(path.read_text(encoding="utf-8").splitlines())):
            try:
                mols.append(parse_smiles(smi, name=label))
            except SmilesError as err:
                raise JobError(f"{path.name}: record {k + 1} ({label}): {err}") from None
        if not mols:
            raise JobError(f"{path.name}: no molecules")
        return mols

    def model(self, name: str) -> tuple[ModelParams, dict]:
        try:
            return ModelParams.from_bytes(self.path(name).read_bytes())
        except (ValueError, KeyError) as err:
            raise JobError(f"{self.path(name).name}: not a screenkit model ({err})") from None

    def description(self) -> str:
        return f"screenkit {self.meta['version']} spec={self.meta['spec_hash']} seed={self.meta['seed']}"


# -- tasks ----------------------------------------------------------------------------------------


def _parse(ctx: _Ctx):
    path = ctx.path("smiles")
    records = []
    for k, (smi, label) in enumerate(read_smiles_records(path.read_text(encoding="utf-8").splitlines())):
        rec = {"index": k, "name": label, "input": smi}
        try:
            mol = parse_smiles(smi, name=label)
            rec.update(canonical=write_smiles(mol), atoms=len(mol.atoms), bonds=len(mol.bonds),
                       heavy_atoms=mol.heavy_atom_count, rings=mol.ring_count)
        except SmilesError as err:
            rec.update(error=type(err).__name__, message=str(err), position=err.position)
        records.append(rec)
    ctx.artifacts["molecules.jsonl"] = jsonl_bytes(ctx.meta, records)


def _sim(ctx: _Ctx):
    a, b = ctx.smiles("a"), ctx.smiles("b")
    metric = ctx.params.get("metric", "tanimoto")
    if metric == "tanimoto":
        radius, width = int(ctx.params.get("radius", 2)), int(ctx.params.get("width", 2048))
        fa = [morgan_fingerprint(m, radius, width) for m in a]
        fb = [morgan_fingerprint(m, radius, width) for m in b]
        mat = similarity_matrix(fa, fb, tanimoto)
    elif metric == "edit":
        mat = similarity_matrix([write_smiles(m) for m in a], [write_smiles(m) for m in b], edit_similarity)
    else:
        it = int(ctx.params.get("iterations", 3))
        mat = similarity_matrix(a, b, lambda x, y: wl_similarity(x, y, it))
    rows = [[m.name, *map(float, mat[i])] for i, m in enumerate(a)]
    ctx.artifacts["similarity.csv"] = csv_bytes(ctx.meta, ["name", *[m.name for m in b]], rows)
    if ctx.figure:
        ctx.artifacts["similarity.png"] = plotting.heatmap(mat, ctx.description(), label=f"{metric} similarity")


def _labels_csv(path: Path) -> dict[str, float]:
    out = {}
    for k, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if parts[:2] == ["name", "label"]:
            continue
        try:
            out[parts[0]] = float(parts[1])
        except (IndexError, ValueError):
            raise JobError(f"{path.name}: line {k}: expected 'name,label'") from None
    return out


def _mevon(ctx: _Ctx):
    if ctx.params["action"] == "build":
        mols = ctx.smiles("molecules")
        labels = None
        if ctx.has("labels"):
            by_name = _labels_csv(ctx.path("labels"))
            labels = {k: by_name[m.name] for k, m in enumerate(mols) if m.name in by_name}
        cfg = EvolutionConfig(float(ctx.params.get("theta1", 0.5)), float(ctx.params.get("theta2", 0.5)),
                              ctx.params.get("stage1_metric", "fingerprint"))
        graph = build_graph(mols, cfg, labels)
        ctx.artifacts["graph.json"] = json_bytes(ctx.meta, graph.to_json())
        return
    doc = json.loads(ctx.path("graph").read_text(encoding="utf-8"))
    graph = EvolutionGraph.from_json(doc)
    records = []
    for q in ctx.smiles("query"):
        try:
            records.append({"name": q.name, "smiles": write_smiles(q), "prediction": evo_predict(graph, q)})
        except NoParentFound as err:
            records.append({"name": q.name, "smiles": write_smiles(q), "prediction": None, "error": str(err)})
    ctx.artifacts["predictions.jsonl"] = jsonl_bytes(ctx.meta, records)


def _kg(ctx: _Ctx):
    p = ctx.params
    graph = build_numeric_kg(float(p["min"]), float(p["max"]), float(p["step"]))
    cfg = MarginConfig(gamma=float(p.get("gamma", 1.0)), metric=str(p.get("metric", "l1")).upper(),
                       lr=float(p.get("lr", 0.01)), epochs=int(p.get("epochs", 500)), seed=ctx.seed,
                       dim=int(p.get("dim", 8)))
    emb = train_kg(graph, cfg)
    proj = relation_projection(emb)
    rho = float(spearmanr(graph.values, proj).statistic) if graph.n_entities > 2 else 1.0
    ctx.artifacts["table.bin"] = table_bytes(emb, graph, json.dumps(ctx.meta, sort_keys=True).encode())
    ctx.artifacts["kg_report.json"] = json_bytes(ctx.meta, {
        "entities": graph.n_entities, "dim": emb.dim, "final_loss": emb.loss_trace[-1] if emb.loss_trace else None,
        "directional_fraction": directional_fraction(graph, emb, cfg), "spearman": rho,
    })
    if ctx.figure:
        if emb.loss_trace:
            ctx.artifacts["loss.png"] = plotting.loss_curve(emb.loss_trace, ctx.description())
        ctx.artifacts["projection.png"] = plotting.projection_plot(graph.values, proj, ctx.description())


def _domains(ctx: _Ctx):
    radius, width = int(ctx.params.get("radius", 2)), int(ctx.params.get("width", 2048))
    target = fingerprint_domain(ctx.spec["inputs"]["target"], ctx.smiles("target"), radius, width)
    sources = []
    for rel in ctx.spec["inputs"]["sources"]:
        path = ctx.base / rel
        mols = _read_mols(path)
        sources.append(fingerprint_domain(Path(rel).stem, mols, radius, width))
    ranking = select_sources(target, sources, int(ctx.params["k"]))
    rows = [[r + 1, sid, float(d)] for r, (sid, d) in enumerate(ranking)]
    ctx.artifacts["ranking.csv"] = csv_bytes(ctx.meta, ["rank", "id", "distance"], rows)
    if ctx.figure:
        ctx.artifacts["ranking.png"] = plotting.ranking_bars([r[1] for r in rows], [r[2] for r in rows],
                                                             ctx.description())


def _read_mols(path: Path) -> list[Molecule]:
    mols = []
    for smi, label in read_smiles_records(path.read_text(encoding="utf-8").splitlines()):
        try:
            mols.append(parse_smiles(smi, name=label))
        except SmilesError as err:
            raise JobError(f"{path.name}: {label}: {err}") from None
    if not mols:
        raise JobError(f"{path.name}: no molecules")
    return mols


def _encode_all(mols: list[Molecule], nodes: int):
    states = []
    for m in mols:
        try:
            states.append(encode_molecule(m, nodes))
        except (ValueError, ChemError) as err:
            raise JobError(f"molecule {m.name!r} cannot be encoded for generation: {err}") from None
    return states


def _train(ctx: _Ctx):
    p = ctx.params
    head = p["head"]
    if head in ("score", "controller"):
        _train_generative(ctx, head)
        return
    data = load_dataset(head, ctx.path("data"))
    model_opts = {k: p[k] for k in ("hidden", "layers", "mode") if k in p}
    cfg = TrainConfig(seed=ctx.seed, epochs=int(p.get("epochs", 30)), lr=float(p.get("lr", 1e-3)),
                      batch_size=int(p.get("batch_size", 32)), model=model_opts)
    kg = load_table(ctx.path("kg")) if head == "mpp" and ctx.has("kg") else None
    params, trace = train_head(head, data, cfg, kg)
    log.info("trained %s head for %d epochs, final loss %.6g", head, cfg.epochs, trace[-1] if trace else float("nan"))
    _emit_model(ctx, params, trace)


def _train_generative(ctx: _Ctx, head: str):
    p = ctx.params
    nodes = int(p.get("nodes", 9))
    schedule = NoiseSchedule.linear()
    if head == "score":
        states = _encode_all(ctx.smiles("molecules"), nodes)
        cfg = ScoreConfig(seed=ctx.seed, epochs=int(p.get("epochs", 200)), lr=float(p.get("lr", 2e-3)),
                          batch_size=int(p.get("batch_size", 32)), hidden=int(p.get("hidden", 64)),
                          layers=int(p.get("layers", 3)))
        model, trace = train_score(states, schedule, cfg)
        params = model.params
    else:
        data = load_dataset("mpp", ctx.path("data"))
        states = _encode_all(data.mols, nodes)
        cfg = ControllerConfig(seed=ctx.seed, epochs=int(p.get("epochs", 300)), lr=float(p.get("lr", 3e-3)),
                               batch_size=int(p.get("batch_size", 32)), hidden=int(p.get("hidden", 32)))
        ctl, trace = train_controller(states, data.labels, schedule, cfg)
        params = ctl.params
    log.info("trained %s for %d epochs, final loss %.6g", head, len(trace), trace[-1] if trace else float("nan"))
    _emit_model(ctx, params, trace)


def _emit_model(ctx: _Ctx, params: ModelParams, trace: list[float]):
    ctx.artifacts["model.bin"] = params.to_bytes(ctx.meta)
    ctx.artifacts["trace.csv"] = csv_bytes(ctx.meta, ["epoch", "loss"], [[k + 1, float(v)] for k, v in enumerate(trace)])
    if ctx.figure and trace:
        ctx.artifacts["loss.png"] = plotting.loss_curve(trace, ctx.description())


def _predict(ctx: _Ctx):
    params, _ = ctx.model("model")
    task = params.config.get("task")
    if task not in ("mpp", "dta", "ddi"):
        raise JobError("predict needs an mpp, dta or ddi model")
    if not params.trained:
        raise JobError("model has not been trained")
    data = load_dataset(task, ctx.path("data"), require_labels=False)
    out = predict(params, data)
    probs = task == "ddi" or params.config.get("mode") == "classification"
    records = []
    for k, v in enumerate(out):
        rec = {"row": k + 1, "prediction": float(v)}
        if probs:
            rec["probability"] = float(0.5 * (1.0 + np.tanh(0.5 * v)))
        label = data.labels[k]
        if np.isfinite(label):
            rec["label"] = float(label)
        records.append(rec)
    ctx.artifacts["predictions.jsonl"] = jsonl_bytes(ctx.meta, records)


def read_fasta(path: Path) -> tuple[str, str]:
    """The single record of a FASTA file as (header, sequence)."""
    header, seq, count = "", [], 0
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith(";"):
            continue
        if line.startswith(">"):
            count += 1
            if count > 1:
                raise JobError(f"{path.name}: expected one sequence, found several")
            header = line[1:].strip()
        else:
            seq.append(line)
    if not seq:
        raise JobError(f"{path.name}: no sequence")
    return header, "".join(seq)


def _screen(ctx: _Ctx):
    header, seq = read_fasta(ctx.path("target"))
    params, _ = ctx.model("model")
    library = ctx.smiles("library")
    ranked = screen_library(library, check_sequence(seq), params, int(ctx.params["top"]))
    smiles = {m.name: write_smiles(m) for m in library}
    records = [{"rank": r + 1, "name": name, "smiles": smiles[name], "score": score, "target": header}
               for r, (name, score) in enumerate(ranked)]
    ctx.artifacts["ranking.jsonl"] = jsonl_bytes(ctx.meta, records)
    if ctx.figure and records:
        ctx.artifacts["scores.png"] = plotting.score_histogram([r["score"] for r in records], ctx.description())


def _score_model(ctx: _Ctx) -> ScoreModel:
    params, _ = ctx.model("model")
    if params.config.get("kind") != "score":
        raise JobError("model is not a score model")
    return ScoreModel.from_params(params)


def _controller(ctx: _Ctx) -> Controller | None:
    if not ctx.has("guide"):
        return None
    params, _ = ctx.model("guide")
    if params.config.get("kind") != "controller":
        raise JobError("guide is not a controller")
    return Controller.from_params(params, float(ctx.params.get("lambda", 1.0)))


def _decode(ctx: _Ctx, states, prefix: str, protected=None):
    mols, stats = quantize_batch(states, protected=protected)
    entries, rejects = [], []
    for k, m in enumerate(mols):
        if isinstance(m, Rejection):
            rejects.append({"sample": k, "reason": m.reason, "detail": m.detail})
        else:
            entries.append((write_smiles(m), f"{prefix}{k}"))
    return [m for m in mols if not isinstance(m, Rejection)], entries, rejects, stats


def _generate(ctx: _Ctx):
    model = _score_model(ctx)
    nodes = int(ctx.params.get("nodes", model.n_nodes))
    run = reverse_sample(model, model.schedule, nodes, _controller(ctx), ctx.seed, int(ctx.params.get("n", 100)))
    _, entries, rejects, stats = _decode(ctx, run.states, "sample")
    ctx.artifacts["samples.smi"] = smiles_bytes(ctx.meta, entries)
    ctx.artifacts["rejections.jsonl"] = jsonl_bytes(ctx.meta, rejects)
    ctx.artifacts["summary.json"] = json_bytes(ctx.meta, {"quantization": stats})


def _scaffold_of(template, mask: np.ndarray, vocab) -> Molecule:
    keep = [i for i in range(len(mask)) if not mask[i] and template.X[i].argmax() < len(vocab)]
    index = {old: new for new, old in enumerate(keep)}
    elements = [vocab[template.X[i].argmax()] for i in keep]
    bonds = [(index[i], index[j], float(template.A[i, j])) for i in keep for j in keep if i < j and template.A[i, j] > 0]
    return Molecule.from_graph(elements, bonds, "scaffold")


def _optimize(ctx: _Ctx):
    model = _score_model(ctx)
    controller = _controller(ctx)
    n = int(ctx.params.get("n", 8))
    summary: dict = {"mode": ctx.params["mode"]}
    if ctx.params["mode"] == "guided":
        if controller is None or not ctx.has("before"):
            raise JobError("guided optimization needs a guide controller and a 'before' set")
        run = reverse_sample(model, model.schedule, model.n_nodes, controller, ctx.seed, n)
        after, entries, rejects, stats = _decode(ctx, run.states, "opt")
    else:
        if "template" not in ctx.params or "mask" not in ctx.params:
            raise JobError("scaffold optimization needs 'template' and 'mask' params")
        try:
            template = encode_molecule(parse_smiles(ctx.params["template"]), model.n_nodes, model.vocab)
        except (ValueError, ChemError) as err:
            raise JobError(f"template: {err}") from None
        mask = np.zeros(model.n_nodes, dtype=bool)
        idx = [int(v) for v in str(ctx.params["mask"]).split(",")]
        if max(idx) >= model.n_nodes:
            raise JobError(f"mask index {max(idx)} outside the {model.n_nodes}-node template")
        mask[idx] = True
        run = inpaint_sample(model, model.schedule, template, mask, controller=controller, seed=ctx.seed, n_samples=n)
        after, entries, rejects, stats = _decode(ctx, run.states, "opt", ~edge_mask_from_nodes(mask))
        scaffold = _scaffold_of(template, mask, model.vocab)
        summary["scaffold"] = write_smiles(scaffold)
        summary["scaffold_preserved"] = sum(has_substructure(m, scaffold) for m in after)
    summary.update(quantization=stats, accepted=len(after), rejections=rejects)
    if controller is not None and ctx.has("before") and after:
        res = optimize_success(ctx.smiles("before"), after, controller)
        summary.update(success=res.success, improvement=res.improvement, threshold=res.threshold,
                       best_after=res.best_after)
    ctx.artifacts["optimized.smi"] = smiles_bytes(ctx.meta, entries)
    ctx.artifacts["summary.json"] = json_bytes(ctx.meta, summary)


def _metrics(ctx: _Ctx):
    a, b = ctx.smiles("a"), ctx.smiles("b")
    value = mmd_metric(a, b)
    ctx.artifacts["mmd.json"] = json_bytes(ctx.meta, {"metric": "mmd", "value": value, "n_a": len(a), "n_b": len(b)})


_RUNNERS = {
    "parse": _parse, "sim": _sim, "mevon": _mevon, "kg": _kg, "domains": _domains, "train": _train,
    "predict": _predict, "screen": _screen, "generate": _generate, "optimize": _optimize, "metrics": _metrics,
}

# artifact a CLI ``--out`` refers to, per task (train/mevon vary by params)
PRIMARY = {
    "parse": "molecules.jsonl", "sim": "similarity.csv", "kg": "table.bin", "domains": "ranking.csv",
    "train": "model.bin", "predict": "predictions.jsonl", "screen": "ranking.jsonl", "generate": "samples.smi",
    "optimize": "optimized.smi", "metrics": "mmd.json",
}


def primary_artifact(spec: dict) -> str:
    if spec["task"] == "mevon":
        return "graph.json" if spec["params"]["action"] == "build" else "predictions.jsonl"
    return PRIMARY[spec["task"]]


DOMAIN_ERRORS = (JobError, SmilesError, ChemError, ValueError, LookupError, RuntimeError, OSError)


def execute(spec: dict, base: str | Path | None = None) -> dict[str, bytes]:
    """Validate and run one job; returns artifact name -> bytes.

    Raises SpecError for schema violations and JobError for everything that
    goes wrong on the data itself.
    """
    spec = validate(spec)
    base = Path(base) if base is not None else Path.cwd()
    try:
        h = spec_hash(spec, base)
    except OSError as err:
        raise JobError(f"cannot read input: {err}") from None
    ctx = _Ctx(spec, base, meta(h, spec["seed"]))
    log.info("running %s job %s", spec["task"], h)
    try:
        _RUNNERS[spec["task"]](ctx)
    except JobError:
        raise
    except DOMAIN_ERRORS as err:
        raise JobError(f"{type(err).__name__}: {err}") from err
    return ctx.artifacts
