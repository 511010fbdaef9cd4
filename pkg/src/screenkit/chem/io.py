"""SMILES list files: one record per line, optional tab-separated name."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .molecule import Molecule
from .smiles import SmilesError, parse_smiles


def read_smiles_records(lines) -> list[tuple[str, str]]:
    out = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if "\t" in line:
            smi, name = line.split("\t", 1)
            name = name.strip()
        else:
            parts = line.split(None, 1)
            smi = parts[0]
            name = parts[1].strip() if len(parts) > 1 else f"mol{lineno}"
        out.append((smi.strip(), name))
    return out


def read_smiles_file(path: str | Path) -> list[Molecule]:
    """Parse a SMILES list file; errors name the offending line."""
    text = Path(path).read_text(encoding="utf-8")
    mols = []
    for smi, name in read_smiles_records(text.splitlines()):
        try:
            mols.append(parse_smiles(smi, name=name))
        except SmilesError as exc:
            raise SmilesError(f"{path}: {name}: {exc}", exc.position) from None
    return mols


def load_corpus() -> list[Molecule]:
    """The bundled molecule corpus."""
    text = resources.files("screenkit.data").joinpath("corpus.smi").read_text(encoding="utf-8")
    return [parse_smiles(s, name=n) for s, n in read_smiles_records(text.splitlines())]
