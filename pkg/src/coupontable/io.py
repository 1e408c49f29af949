"""Reading specs and writing CSV/JSON outputs (UTF-8, LF line endings)."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import SpecError
from .exact import Pmf
from .model import GrowthSpec, GrowthTable, MarginTable, MarginVector


def fraction_str(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _default(obj):
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "value"):
        return obj.value
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"


def load_spec(path: str | os.PathLike):
    """Parse a spec file into a MarginVector, MarginTable, GrowthSpec or GrowthTable."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise SpecError(f"spec file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc})") from None
    return parse_spec(data)


def parse_spec(data: dict):
    if not isinstance(data, dict):
        raise SpecError("spec JSON must be an object")
    if "collectors" in data:
        return GrowthSpec.from_dict(data)
    if "margins" in data and "shape" in data:
        rows = data["margins"]
        symbolic = any(isinstance(x, dict) for row in rows for x in row)
        return GrowthTable.from_dict(data) if symbolic else MarginTable.from_dict(data)
    if "a" in data and "n" in data:
        return MarginVector.from_dict(data)
    raise SpecError("unrecognised spec: expected keys a/n, shape/n/margins, or collectors")


def pmf_rows(p: Pmf) -> list[tuple[int, str]]:
    if p.exact:
        return [(x, fraction_str(q)) for x, q in zip(p.support(), p.probs)]
    return [(x, repr(float(q))) for x, q in zip(p.support(), p.probs)]


def pmf_to_csv(p: Pmf) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "prob"])
    w.writerows(pmf_rows(p))
    return buf.getvalue()


def pmf_to_dict(p: Pmf) -> dict:
    return {
        "offset": p.offset,
        "mode": p.mode,
        "probs": [q for _, q in pmf_rows(p)] if p.exact else [float(q) for q in p.probs],
        "truncated_mass": p.truncated_mass,
    }


def pmf_from_dict(d: dict) -> Pmf:
    if d["mode"] == "exact":
        probs = [Fraction(q) for q in d["probs"]]
    else:
        probs = np.asarray(d["probs"], dtype=float)
    return Pmf(d["offset"], probs, d["mode"], d.get("truncated_mass", 0.0))


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_outputs(files: dict[Path, str]) -> None:
    """Write every file or none: stage to temporaries, then rename."""
    staged = []
    try:
        for path, text in files.items():
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            staged.append((tmp, path))
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, path in staged:
        os.replace(tmp, path)
