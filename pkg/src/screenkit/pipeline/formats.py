"""Artifact serialization with the provenance header every output carries.

CSV and SMILES files start with ``# screenkit <version> spec=<hash> seed=<seed>``,
JSONL files with a ``{"_meta": ...}`` record, JSON documents with a top-level
``meta`` key. Binary formats embed the same dictionary in their own header.
"""

from __future__ import annotations

import csv
import io
import json

from .. import __version__


def meta(spec_hash: str, seed: int) -> dict:
    return {"tool": "screenkit", "version": __version__, "spec_hash": spec_hash, "seed": seed}


def comment_header(m: dict) -> str:
    return f"# screenkit {m['version']} spec={m['spec_hash']} seed={m['seed']}\n"


def _num(v):
    if isinstance(v, float):
        return format(v, ".10g")
    return v


def csv_bytes(m: dict, header: list[str], rows) -> bytes:
    buf = io.StringIO()
    buf.write(comment_header(m))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) for v in row])
    return buf.getvalue().encode()


def jsonl_bytes(m: dict, records) -> bytes:
    lines = [json.dumps({"_meta": m}, sort_keys=True)]
    lines += [json.dumps(r, sort_keys=True) for r in records]
    return ("\n".join(lines) + "\n").encode()


def json_bytes(m: dict, doc: dict) -> bytes:
    return (json.dumps({"meta": m, **doc}, indent=1, sort_keys=True) + "\n").encode()


def smiles_bytes(m: dict, entries: list[tuple[str, str]]) -> bytes:
    body = "".join(f"{smi}\t{name}\n" for smi, name in entries)
    return (comment_header(m) + body).encode()


def read_jsonl(data: bytes) -> tuple[dict, list[dict]]:
    rows = [json.loads(line) for line in data.decode().splitlines() if line.strip()]
    head = rows[0].get("_meta", {}) if rows else {}
    return head, rows[1:] if head else rows
