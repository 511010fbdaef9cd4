"""Labeled dataset CSVs for the three prediction tasks.

mpp: ``smiles,label`` (optional extra numeric columns named ``feat_*``)
dta: ``smiles,sequence,label``
ddi: ``smiles_a,smiles_b,label``
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..chem.molecule import Molecule
from ..chem.smiles import SmilesError, parse_smiles
from .protein import BadSequence, check_sequence

COLUMNS = {
    "mpp": ("smiles", "label"),
    "dta": ("smiles", "sequence", "label"),
    "ddi": ("smiles_a", "smiles_b", "label"),
}


class SchemaError(ValueError):
    pass


class EmptyDataset(ValueError):
    pass


@dataclass
class MppData:
    mols: list[Molecule]
    labels: np.ndarray
    extra: np.ndarray | None = None


@dataclass
class DtaData:
    mols: list[Molecule]
    sequences: list[str]
    labels: np.ndarray


@dataclass
class DdiData:
    mols_a: list[Molecule]
    mols_b: list[Molecule]
    labels: np.ndarray


def _rows(path) -> tuple[list[str], list[tuple[int, dict]]]:
    """Header and (file line number, row) pairs; '#' lines and blank lines skipped."""
    with open(path, newline="", encoding="utf-8") as fh:
        kept = [(k, line) for k, line in enumerate(fh.read().splitlines(), 1)
                if line.strip() and not line.startswith("#")]
    if not kept:
        return [], []
    parsed = list(csv.reader([line for _, line in kept]))
    header = [h.strip() for h in parsed[0]]
    rows = []
    for (lineno, _), values in zip(kept[1:], parsed[1:]):
        if len(values) != len(header):
            raise SchemaError(f"line {lineno}: expected {len(header)} fields, found {len(values)}")
        rows.append((lineno, dict(zip(header, values))))
    return header, rows


def _label(row: dict, line: int) -> float:
    try:
        return float(row["label"])
    except (TypeError, ValueError):
        raise SchemaError(f"line {line}: label {row['label']!r} is not a number") from None


def _mol(text: str, line: int, column: str) -> Molecule:
    try:
        return parse_smiles(text.strip(), name=f"row{line}")
    except SmilesError as err:
        raise SchemaError(f"line {line}, column {column}: {err}") from None


def load_dataset(task: str, path, require_labels: bool = True) -> MppData | DtaData | DdiData:
    """Read a task CSV. Without ``require_labels`` the label column may be
    absent (prediction inputs); labels are then NaN."""
    if task not in COLUMNS:
        raise ValueError(f"unknown task {task!r}")
    header, rows = _rows(path)
    needed = COLUMNS[task] if require_labels else COLUMNS[task][:-1]
    missing = [c for c in needed if c not in header]
    if missing:
        raise SchemaError(f"{Path(path).name}: missing column(s) {', '.join(missing)} for task {task}")
    if not rows:
        raise EmptyDataset(f"{Path(path).name} has no data rows")
    if "label" in header:
        labels = np.array([_label(r, n) for n, r in rows])
    else:
        labels = np.full(len(rows), np.nan)
    if task == "mpp":
        feats = [h for h in header if h.startswith("feat_")]
        extra = None
        if feats:
            try:
                extra = np.array([[float(r[f]) for f in feats] for _, r in rows])
            except (TypeError, ValueError):
                raise SchemaError("feat_* columns must be numeric") from None
        return MppData([_mol(r["smiles"], n, "smiles") for n, r in rows], labels, extra)
    if task == "dta":
        seqs = []
        for n, r in rows:
            try:
                seqs.append(check_sequence(r["sequence"]))
            except BadSequence as err:
                raise SchemaError(f"line {n}: {err}") from None
        return DtaData([_mol(r["smiles"], n, "smiles") for n, r in rows], seqs, labels)
    return DdiData(
        [_mol(r["smiles_a"], n, "smiles_a") for n, r in rows],
        [_mol(r["smiles_b"], n, "smiles_b") for n, r in rows],
        labels,
    )
