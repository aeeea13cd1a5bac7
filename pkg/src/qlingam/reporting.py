"""Output writers, run manifests and the shipped JSON schemas."""

from __future__ import annotations

import csv
import hashlib
import json
import platform
from importlib import resources

import numpy as np

from . import __version__

SCHEMAS = ("causal_model", "table1_report", "gram_sidecar", "manifest")


def dumps(obj):
    # json writes floats with repr, i.e. the shortest string that round-trips
    return json.dumps(obj, indent=2) + "\n"


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def write_matrix_csv(path, matrix):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in np.asarray(matrix, dtype=float):
            writer.writerow([repr(float(v)) for v in row])


def read_matrix_csv(path):
    with open(path, newline="") as fh:
        return np.array([[float(c) for c in row] for row in csv.reader(fh) if row])


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest_path(out_path):
    return f"{out_path}.manifest.json"


def build_manifest(command, config, seed, inputs, outputs, duration):
    return {
        "command": command,
        "config": config,
        "master_seed": seed,
        "tool_version": __version__,
        "python": platform.python_version(),
        "inputs": [{"path": str(p), "sha256": file_digest(p)} for p in inputs],
        "outputs": [str(p) for p in outputs],
        "wall_clock_seconds": duration,
    }


def load_schema(name):
    text = resources.files("qlingam.schemas").joinpath(f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(obj, name):
    """Validate ``obj`` against a shipped schema; needs the optional ``jsonschema`` package."""
    import jsonschema

    jsonschema.validate(obj, load_schema(name))
