"""Reading JSON specs and count tables, writing CSV tables and JSON summaries."""

import os
from typing import Any, Dict, List, Tuple

import orjson
import pandas as pd

from mimlab.errors import ValidationError

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY


def read_text(path: str) -> str:
    if not os.path.isfile(path):
        raise ValidationError(f"No such file: {path}", field="path")
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def read_json_source(source: str, field: str = "input") -> Dict[str, Any]:
    """
    Decode a JSON object given inline or as a path to a file.

    Text starting with '{' is parsed directly; anything else is treated as a
    file path.
    """
    text = source if source.lstrip().startswith("{") else read_text(source)
    try:
        data = orjson.loads(text)
    except orjson.JSONDecodeError as e:
        raise ValidationError(f"invalid JSON: {e}", field=field) from None
    if not isinstance(data, dict):
        raise ValidationError("expected a JSON object", field=field)
    return data


def dumps_json(data: Any) -> str:
    return orjson.dumps(data, option=JSON_OPTIONS).decode("utf-8")


def write_json(data: Any, path: str) -> None:
    with open(path, "wb") as f:
        f.write(orjson.dumps(data, option=JSON_OPTIONS))
        f.write(b"\n")


def table_to_csv(table: pd.DataFrame) -> str:
    # repr-style floats, empty field for missing values, '\n' line endings
    return table.to_csv(index=False, na_rep="", lineterminator="\n")


def write_table(table: pd.DataFrame, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(table_to_csv(table))


def read_counts(path: str) -> List[Tuple[int, int]]:
    """Read observed batch counts from a CSV with delta_n and delta_N columns."""
    if not os.path.isfile(path):
        raise ValidationError(f"No such file: {path}", field="counts")
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ValidationError(f"unreadable CSV: {e}", field="counts") from None
    missing = [c for c in ("delta_n", "delta_N") if c not in frame.columns]
    if missing:
        raise ValidationError(f"missing column(s) {', '.join(missing)}", field="counts")
    rows = []
    for position, (dn, dN) in enumerate(zip(frame["delta_n"], frame["delta_N"])):
        try:
            pair = (_as_int(dn), _as_int(dN))
        except ValueError:
            raise ValidationError(
                f"row {position + 1} is not a pair of integers", field="counts"
            ) from None
        rows.append(pair)
    return rows


def _as_int(value: Any) -> int:
    number = float(value)
    if number != int(number):
        raise ValueError(value)
    return int(number)


def ensure_directory(path: str) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise ValidationError(f"cannot create output directory: {e}", field="out")
    return path
