"""
CSV and JSON writers for the command-line tools.

CSV goes through pandas with a fixed float format; JSON reports carry a
schema version. Both are byte-stable for identical input.
"""

import json
import logging
import math
import os
import sys
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from solvegeo.config.settings import Config

logger = logging.getLogger(__name__)


def float_format() -> str:
    return f"%.{Config.CSV_SIGNIFICANT_DIGITS}g"


def to_frame(rows: Iterable[Mapping[str, Any]], columns: Optional[Sequence[str]] = None) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=list(columns) if columns else None)


def csv_text(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=float_format(), lineterminator="\n")


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(f"{value:.{Config.CSV_SIGNIFICANT_DIGITS}g}")
    return value


def json_text(payload: Dict[str, Any], kind: str) -> str:
    document = {"schema_version": Config.REPORT_SCHEMA_VERSION, "kind": kind}
    document.update(_jsonable(payload))
    return json.dumps(document, indent=2, sort_keys=True, allow_nan=False) + "\n"


def emit(text: str, out: Optional[str] = None):
    """Write text to a file, or to stdout when out is None or '-'"""
    if out in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(out))
    os.makedirs(directory, exist_ok=True)
    with open(out, "w", newline="\n", encoding="utf-8") as f:
        f.write(text)
    logger.info(f"Wrote {out}")


def write_table(rows: Iterable[Mapping[str, Any]], out: Optional[str], fmt: str = "csv",
                kind: str = "table", columns: Optional[Sequence[str]] = None):
    frame = to_frame(rows, columns)
    if fmt == "json":
        emit(json_text({"rows": frame.to_dict(orient="records")}, kind), out)
    else:
        emit(csv_text(frame), out)
