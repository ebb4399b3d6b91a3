# symuniv/utils.py
import hashlib
import json
import os
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

CACHE_ENV_VAR = "SYMUNIV_CACHE"


def ensure_directory(directory: str) -> None:
    """Create directory if it doesn't exist."""
    os.makedirs(directory, exist_ok=True)


def default_cache_dir() -> str:
    """Cache directory from $SYMUNIV_CACHE, else ~/.cache/symuniv."""
    return os.environ.get(CACHE_ENV_VAR) or os.path.join(
        os.path.expanduser("~"), ".cache", "symuniv")


def file_sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and complex numbers to JSON-friendly values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def dumps_json(payload: Dict) -> str:
    """Deterministic JSON text: sorted keys, fixed indentation."""
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2)


def write_json(path: str, payload: Dict) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    ensure_directory(parent)
    Path(path).write_text(dumps_json(payload) + "\n", encoding="utf-8")


def provenance(
    weight: int,
    kind: Optional[str],
    n_coeffs: int,
    seed: Optional[int] = None
) -> Dict:
    """Provenance block embedded in every artifact."""
    from . import __version__
    return {
        "weight": weight,
        "kind": kind,
        "N": n_coeffs,
        "seed": seed,
        "software": "symuniv",
        "version": __version__,
    }
