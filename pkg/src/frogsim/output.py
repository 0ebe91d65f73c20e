"""Deterministic artifact writing: canonical CSV/JSON, atomic renames, config hashes."""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def _canon(value):
    """JSON-serializable canonical form; floats via repr for byte stability."""
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_canon(x) for x in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_canon(x) for x in value]
    if isinstance(value, dict):
        return {str(k): _canon(v) for k, v in value.items()}
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    return value


def canonical_json(obj) -> str:
    return json.dumps(_canon(obj), sort_keys=True, indent=2) + "\n"


def config_hash(config: dict) -> str:
    payload = json.dumps(_canon(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt_float(x) -> str:
    """Shortest round-trip decimal form, stable across runs."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_float(v) if isinstance(v, (float, np.floating)) else str(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


@dataclass
class Verdict:
    """One estimator outcome with its uncertainty and pass/fail."""

    name: str
    value: float
    target: str
    passed: bool
    ci: tuple[float, float] | None = None
    n: int | None = None
    extra: dict = field(default_factory=dict)

    def row(self) -> dict:
        return {
            "name": self.name,
            "value": _canon(self.value),
            "ci": _canon(self.ci) if self.ci is not None else None,
            "target": self.target,
            "passed": bool(self.passed),
            "n": self.n,
            "extra": _canon(self.extra),
        }


def format_verdict_line(v: Verdict) -> str:
    ci = f" ± {(v.ci[1] - v.ci[0]) / 2:.4g}" if v.ci else ""
    status = "PASS" if v.passed else "FAIL"
    return f"{v.name}: {v.value:.6g}{ci}  [{v.target}]  {status}"
