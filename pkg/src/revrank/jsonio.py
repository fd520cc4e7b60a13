"""JSON / JSON Lines helpers with canonical (diff-stable) serialization."""

from __future__ import annotations

import json
from typing import Any, Iterable, Iterator

from .errors import ParseError


def read_jsonl(path) -> Iterator[tuple[int, dict]]:
    """Yield (line_no, record) for every non-blank line; bad lines raise."""
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, line_no, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise ParseError(path, line_no, "expected a JSON object")
            yield line_no, obj


def canonical_line(obj: Any) -> str:
    """One-line canonical JSON: sorted keys, compact separators."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_report(obj: Any) -> str:
    """Multi-line canonical JSON for reports: sorted keys, fixed indent."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_jsonl(path, records: Iterable[Any]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(canonical_line(record))
            fh.write("\n")
