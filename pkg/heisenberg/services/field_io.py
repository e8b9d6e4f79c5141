"""
CSV/JSON emission for sampled fields, kernel profiles, scans and verification reports.

Floats are written with 17 significant digits so a value survives a write/read cycle
exactly; writers never depend on dict ordering or worker scheduling, so equal inputs
give byte-identical files.
"""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from heisenberg.config import settings
from heisenberg.models.field import Lattice, SampledField
from heisenberg.services.error_service import ErrorCategory, handle_errors

logger = logging.getLogger(__name__)


class FieldIOError(Exception):
    """Raised when a field file cannot be written or parsed"""
    pass


def format_float(value: float) -> str:
    return f"{float(value):.17g}"


def _resolve(path: str) -> Path:
    target = Path(path)
    if not target.is_absolute() and settings.output_dir:
        target = Path(settings.output_dir) / target
    return target


def field_to_csv(field: SampledField) -> str:
    """Rows axis0..axisK,re,im in C order of the lattice"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([f"axis{k}" for k in range(field.lattice.ndim)] + ["re", "im"])
    points = field.lattice.points()
    values = field.values.ravel()
    for point, value in zip(points, values):
        writer.writerow([format_float(c) for c in point] + [format_float(value.real), format_float(value.imag)])
    return buffer.getvalue()


@handle_errors(ErrorCategory.IO)
def write_field(field: SampledField, path: str) -> Path:
    """Write the CSV and its sidecar descriptor <path>.json; returns the CSV path"""
    target = _resolve(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(field_to_csv(field), encoding="utf-8")
        sidecar = target.with_suffix(target.suffix + ".json")
        sidecar.write_text(json.dumps(field.descriptor(), indent=2, sort_keys=True), encoding="utf-8")
    except OSError as e:
        raise FieldIOError(f"Failed to write field to {target}: {str(e)}")
    logger.info(f"Wrote {field.lattice.size} samples to {target}")
    return target


@handle_errors(ErrorCategory.IO)
def read_field(path: str) -> SampledField:
    """Load a field written by write_field; needs the sidecar descriptor next to the CSV"""
    target = _resolve(path)
    sidecar = target.with_suffix(target.suffix + ".json")
    try:
        descriptor = json.loads(sidecar.read_text(encoding="utf-8"))
        with open(target, "r", encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
    except (OSError, json.JSONDecodeError) as e:
        raise FieldIOError(f"Failed to read field {target}: {str(e)}")

    header, body = rows[0], rows[1:]
    if header[-2:] != ["re", "im"]:
        raise FieldIOError(f"{target}: header must end with re,im")
    lattice = Lattice(origin=descriptor["origin"], spacing=descriptor["spacings"], counts=descriptor["counts"])
    if len(header) != lattice.ndim + 2:
        raise FieldIOError(f"{target}: {len(header) - 2} axis columns for a {lattice.ndim}-axis lattice")
    if len(body) != lattice.size:
        raise FieldIOError(f"{target}: {len(body)} rows for a lattice of {lattice.size} nodes")
    values = np.array([complex(float(row[-2]), float(row[-1])) for row in body])
    return SampledField(lattice=lattice, values=values, n=descriptor["n"],
                        t=descriptor.get("t"), lam=descriptor.get("lambda"))


def table_to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Generic numeric table; floats at 17 significant digits, other cells verbatim"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([format_float(c) if isinstance(c, (float, np.floating)) else c for c in row])
    return buffer.getvalue()


def profile_to_csv(coordinates: np.ndarray, values: np.ndarray,
                   names: Optional[List[str]] = None) -> str:
    """Kernel profile as coord...,value; complex values add a value_im column"""
    coordinates = np.atleast_2d(np.asarray(coordinates, dtype=float))
    if coordinates.shape[0] != len(values) and coordinates.shape[1] == len(values):
        coordinates = coordinates.T
    names = names or [f"coord{k}" for k in range(coordinates.shape[1])]
    values = np.asarray(values)
    if np.iscomplexobj(values):
        header = names + ["value", "value_im"]
        rows = [list(c) + [float(v.real), float(v.imag)] for c, v in zip(coordinates.tolist(), values)]
    else:
        header = names + ["value"]
        rows = [list(c) + [float(v)] for c, v in zip(coordinates.tolist(), values)]
    return table_to_csv(header, rows)


def reports_to_json(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def emit(text: str, out: Optional[str], stream) -> None:
    """Write text to `out` (relative to settings.output_dir) or to the given stream"""
    if out is None:
        stream.write(text)
        return
    target = _resolve(out)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
    except OSError as e:
        raise FieldIOError(f"Failed to write {target}: {str(e)}")
    logger.info(f"Wrote {target}")
