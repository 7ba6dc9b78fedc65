"""Certificate checks, report serialization, and deterministic CSV output."""

import json
import math
import os
from dataclasses import asdict, dataclass, is_dataclass

import numpy as np


@dataclass
class Check:
    """One named hypothesis check inside a certificate."""

    name: str
    value: float
    threshold: float
    passed: bool
    direction: str = "<="

    @classmethod
    def leq(cls, name, value, threshold):
        return cls(name, float(value), float(threshold), bool(value <= threshold), "<=")

    @classmethod
    def lt(cls, name, value, threshold):
        return cls(name, float(value), float(threshold), bool(value < threshold), "<")

    @classmethod
    def geq(cls, name, value, threshold):
        return cls(name, float(value), float(threshold), bool(value >= threshold), ">=")


def all_passed(checks):
    return all(c.passed for c in checks)


def jsonify(obj):
    """Recursively convert numpy scalars/arrays and dataclasses to plain
    JSON-serializable values; non-finite floats become strings."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return jsonify(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonify(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_csv(path, header, columns):
    """CSV with a mandatory header row and repr-stable float formatting;
    byte-identical across runs for identical data."""
    cols = [np.asarray(c) for c in columns]
    if len(set(len(c) for c in cols)) > 1:
        raise ValueError("CSV columns must have equal length")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(len(cols[0])):
            fh.write(",".join(f"{c[i]:.17g}" for c in cols) + "\n")
    return path


def write_report(path, report):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(jsonify(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
