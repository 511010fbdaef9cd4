"""Evolutionary network over molecules layered by heavy-atom count.

A child in layer n+1 links to parents in layer n in two stages: candidate
parents must reach ``theta1`` on the stage-1 similarity (fingerprint
Tanimoto or SMILES edit similarity) and only the per-child best-scoring
candidates are kept (ties all kept); those must then reach ``theta2`` on the
normalized WL kernel.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from .chem.molecule import Molecule
from .chem.smiles import parse_smiles, write_smiles
from .similarity import edit_similarity, morgan_fingerprint, tanimoto, wl_similarity


class NoParentFound(LookupError):
    pass


@dataclass(frozen=True)
class EvolutionConfig:
    theta1: float = 0.5
    theta2: float = 0.5
    stage1_metric: str = "fingerprint"
    wl_iterations: int = 3

    def __post_init__(self):
        for name in ("theta1", "theta2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.stage1_metric not in ("fingerprint", "edit"):
            raise ValueError(f"unknown stage-1 metric {self.stage1_metric!r}")


@dataclass(frozen=True)
class Edge:
    parent: int
    child: int
    stage1: float
    stage2: float


@dataclass
class EvolutionGraph:
    molecules: list[Molecule]
    layers: dict[int, list[int]]
    edges: list[Edge]
    config: EvolutionConfig
    labels: dict[int, float] = field(default_factory=dict)
    isolated: list[int] = field(default_factory=list)

    def parents_of(self, child: int) -> list[Edge]:
        return [e for e in self.edges if e.child == child]

    def delta(self, e: Edge) -> float | None:
        if e.parent in self.labels and e.child in self.labels:
            return self.labels[e.child] - self.labels[e.parent]
        return None

    def mean_incoming_delta(self, node: int) -> float:
        ds = [d for e in self.parents_of(node) if (d := self.delta(e)) is not None]
        return math.fsum(ds) / len(ds) if ds else 0.0

    def edge_set(self) -> set[tuple[int, int]]:
        return {(e.parent, e.child) for e in self.edges}

    def to_json(self) -> dict:
        return {
            "config": asdict(self.config),
            "nodes": [
                {
                    "id": k,
                    "name": m.name,
                    "smiles": write_smiles(m),
                    "heavy_atoms": m.heavy_atom_count,
                    "label": self.labels.get(k),
                }
                for k, m in enumerate(self.molecules)
            ],
            "layers": {str(n): ids for n, ids in self.layers.items()},
            "edges": [
                {"parent": e.parent, "child": e.child, "stage1": e.stage1, "stage2": e.stage2, "delta": self.delta(e)}
                for e in self.edges
            ],
            "stats": {"n_nodes": len(self.molecules), "n_edges": len(self.edges), "isolated": self.isolated},
        }

    @classmethod
    def from_json(cls, doc: dict) -> EvolutionGraph:
        mols = [parse_smiles(n["smiles"], name=n["name"]) for n in doc["nodes"]]
        labels = {n["id"]: n["label"] for n in doc["nodes"] if n["label"] is not None}
        edges = [Edge(e["parent"], e["child"], e["stage1"], e["stage2"]) for e in doc["edges"]]
        layers = {int(k): v for k, v in doc["layers"].items()}
        return cls(mols, layers, edges, EvolutionConfig(**doc["config"]), labels, doc["stats"]["isolated"])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


def build_hierarchy(mols: list[Molecule]) -> dict[int, list[int]]:
    """Indices of ``mols`` grouped by heavy-atom count, ascending keys."""
    if not mols:
        raise ValueError("no molecules given")
    layers: dict[int, list[int]] = {}
    for k, m in enumerate(mols):
        layers.setdefault(m.heavy_atom_count, []).append(k)
    return dict(sorted(layers.items()))


class _Scorer:
    """Caches fingerprints, canonical text and WL scores per molecule."""

    def __init__(self, cfg: EvolutionConfig):
        self.cfg = cfg
        self._fp: dict[int, object] = {}
        self._smi: dict[int, str] = {}

    def stage1(self, a: Molecule, b: Molecule) -> float:
        if self.cfg.stage1_metric == "edit":
            return edit_similarity(self._text(a), self._text(b))
        return tanimoto(self._fingerprint(a), self._fingerprint(b))

    def stage2(self, a: Molecule, b: Molecule) -> float:
        return wl_similarity(a, b, self.cfg.wl_iterations)

    def _fingerprint(self, m):
        key = id(m)
        if key not in self._fp:
            self._fp[key] = morgan_fingerprint(m)
        return self._fp[key]

    def _text(self, m):
        key = id(m)
        if key not in self._smi:
            self._smi[key] = write_smiles(m)
        return self._smi[key]


def _select_parents(scorer: _Scorer, child: Molecule, parents: list[tuple[int, Molecule]]) -> list[Edge]:
    cfg = scorer.cfg
    scored = [(p, scorer.stage1(m, child), m) for p, m in parents]
    cands = [c for c in scored if c[1] >= cfg.theta1]
    if not cands:
        return []
    best = max(c[1] for c in cands)
    out = []
    for p, s1, m in cands:
        if s1 != best:
            continue
        s2 = scorer.stage2(m, child)
        if s2 >= cfg.theta2:
            out.append(Edge(p, -1, s1, s2))
    return out


def link_pairs(
    mols: list[Molecule],
    layers: dict[int, list[int]],
    cfg: EvolutionConfig = EvolutionConfig(),
    labels: dict[int, float] | None = None,
) -> EvolutionGraph:
    scorer = _Scorer(cfg)
    edges: list[Edge] = []
    isolated = []
    for n, children in layers.items():
        parents = layers.get(n - 1)
        for c in children:
            found = []
            if parents:
                found = _select_parents(scorer, mols[c], [(p, mols[p]) for p in parents])
            if not found:
                isolated.append(c)
            edges.extend(Edge(e.parent, c, e.stage1, e.stage2) for e in found)
    return EvolutionGraph(list(mols), layers, edges, cfg, dict(labels or {}), isolated)


def build_graph(mols: list[Molecule], cfg: EvolutionConfig = EvolutionConfig(), labels=None) -> EvolutionGraph:
    return link_pairs(mols, build_hierarchy(mols), cfg, labels)


def evo_predict(graph: EvolutionGraph, query: Molecule, labels: dict[int, float] | None = None) -> float:
    """Propagation baseline: score-weighted parent labels plus their mean incoming delta."""
    if labels is not None:
        graph = EvolutionGraph(graph.molecules, graph.layers, graph.edges, graph.config, dict(labels), graph.isolated)
    layer = graph.layers.get(query.heavy_atom_count - 1, [])
    scorer = _Scorer(graph.config)
    found = _select_parents(scorer, query, [(p, graph.molecules[p]) for p in layer])
    found = sorted((e for e in found if e.parent in graph.labels), key=lambda e: e.parent)
    if not found:
        raise NoParentFound("query does not attach to any labeled parent")
    total = math.fsum(e.stage1 for e in found)
    if total > 0:
        weights = [e.stage1 / total for e in found]
    else:
        weights = [1.0 / len(found)] * len(found)
    return math.fsum(
        w * (graph.labels[e.parent] + graph.mean_incoming_delta(e.parent)) for w, e in zip(weights, found)
    )
