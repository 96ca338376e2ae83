import csv
import io
import json
import logging
import sys
from typing import Any, Mapping, Optional, Sequence

import numpy as np
from tabulate import tabulate

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "{:.17g}"


def to_builtin(value: Any) -> Any:
    """Convert numpy scalars/arrays and complex numbers to JSON-ready values"""
    if isinstance(value, Mapping):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def format_float(value: float) -> str:
    return FLOAT_FORMAT.format(value)


def render_json(report: Mapping[str, Any]) -> str:
    # Python floats serialize to their shortest round-tripping repr.
    return json.dumps(to_builtin(report), indent=2)


def render_csv(header: Sequence[str], rows: Sequence[Sequence[float]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) for v in row])
    return buffer.getvalue()


def emit(text: str, out: Optional[str] = None):
    """Write a rendered report to the output path, or stdout without one"""
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        sys.stdout.flush()
        return
    with open(out, "w", newline="") as f:
        f.write(text if text.endswith("\n") else text + "\n")
    logger.info(f"Report written to {out}")


def _flatten(data: Mapping[str, Any], prefix: str = ""):
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            yield from _flatten(value, f"{name}.")
        elif isinstance(value, list) and len(value) > 6:
            yield name, f"[{len(value)} values]"
        else:
            yield name, value


def log_dict_as_table(data_dict: Mapping[str, Any], logger=logger):
    headers = ['Attribute', 'Value']
    table_data = [[k, v] for k, v in _flatten(to_builtin(data_dict))]
    table = tabulate(
        table_data,
        headers=headers,
        tablefmt='grid',
        numalign='left',
        stralign='left'
    )

    separator = '-' * 80
    logger.info(f"\n{separator}\n{table}\n{separator}")
