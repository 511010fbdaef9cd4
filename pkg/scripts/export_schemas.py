"""Write the job spec schema served at GET /schema into docs/schemas/."""

import json
from pathlib import Path

from screenkit.pipeline import SCHEMA

out = Path(__file__).resolve().parent.parent / "docs" / "schemas" / "jobspec.schema.json"
out.write_text(json.dumps(SCHEMA, indent=1, sort_keys=True) + "\n", encoding="utf-8")
print(f"wrote {out}")
