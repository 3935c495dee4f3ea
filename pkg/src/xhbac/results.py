"""Tabular results with a machine-readable metadata header.

Tables serialize to CSV with a single leading '#' line holding a JSON
metadata block (config echo, version, truncation diagnostics).  Floats are
printed with 12 significant digits; identical inputs produce byte-identical
bodies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.12g}"
    return str(value)


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def append(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} cells, expected {len(self.columns)}")
        self.rows.append(tuple(values))

    def body_csv(self) -> str:
        lines = [",".join(self.columns)]
        lines.extend(",".join(format_cell(v) for v in row) for row in self.rows)
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        header = "# " + json.dumps(self.metadata, sort_keys=True)
        return header + "\n" + self.body_csv()

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv())

    @staticmethod
    def parse_metadata(text: str) -> dict:
        first = text.splitlines()[0]
        if not first.startswith("# "):
            raise ValueError("missing metadata header line")
        return json.loads(first[2:])
