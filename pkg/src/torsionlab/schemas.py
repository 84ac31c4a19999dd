"""JSON documents for complexes, boundary models, spectra and reports.

Every document carries ``"schema": "torsionlab/1"`` and a ``"kind"``.
Complex numbers are ``[re, im]`` pairs; real numbers are accepted on input.
Canonical output sorts keys and rounds floats to 15 significant digits.
"""

from __future__ import annotations

import json
import math
from importlib import resources
from typing import Any, Mapping

import numpy as np

__all__ = [
    "SCHEMA_VERSION",
    "SchemaError",
    "encode",
    "decode_matrix",
    "decode_complex",
    "canonical_json",
    "load_document",
    "complex_from_doc",
    "complex_to_doc",
    "boundary_model_from_doc",
    "boundary_model_to_doc",
    "spectrum_from_doc",
    "spectrum_to_doc",
    "twisted_from_doc",
    "twisted_to_doc",
    "fixture_path",
    "load_fixture",
]

SCHEMA_VERSION = "torsionlab/1"
REPORT_SCHEMA = "torsionlab.report/1"


class SchemaError(ValueError):
    """A document does not match the expected layout."""


def _round(x: float) -> float:
    if not math.isfinite(x):
        raise SchemaError(f"non-finite float {x!r} cannot be serialized")
    y = float(f"{x:.15g}")
    return 0.0 if y == 0 else y


def encode(obj: Any) -> Any:
    """Convert numpy arrays, complex numbers and dataclass-like dicts to JSON values."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [_round(obj.real), _round(obj.imag)]
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, Mapping):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if obj is None or isinstance(obj, str):
        return obj
    raise SchemaError(f"cannot encode {type(obj).__name__}")


def canonical_json(obj: Any) -> str:
    """Sorted keys, 15 significant digits, two-space indent, trailing newline."""
    return json.dumps(encode(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def decode_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise SchemaError(f"complex entries are [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    raise SchemaError(f"not a number: {v!r}")


def decode_matrix(rows, shape: tuple | None = None, name: str = "matrix") -> np.ndarray:
    """Nested rows of numbers or ``[re, im]`` pairs; ``[]`` is an empty block."""
    if not isinstance(rows, list):
        raise SchemaError(f"{name} must be a list of rows")
    if len(rows) == 0 or all(isinstance(r, list) and len(r) == 0 for r in rows):
        out = np.zeros(shape if shape is not None else (len(rows), 0), dtype=complex)
        return out
    try:
        M = np.array([[decode_complex(v) for v in row] for row in rows], dtype=complex)
    except TypeError as exc:
        raise SchemaError(f"{name}: {exc}") from None
    if M.ndim != 2:
        raise SchemaError(f"{name} rows have unequal lengths")
    if shape is not None and M.shape != tuple(shape):
        raise SchemaError(f"{name} has shape {M.shape}, expected {tuple(shape)}")
    return M


def _require(doc: Mapping, *keys):
    missing = [k for k in keys if k not in doc]
    if missing:
        raise SchemaError(f"missing field(s): {', '.join(missing)}")


def _check_kind(doc: Mapping, kind: str):
    if not isinstance(doc, Mapping):
        raise SchemaError("document must be a JSON object")
    schema = doc.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema {schema!r}")
    if doc.get("kind", kind) != kind:
        raise SchemaError(f"expected a {kind!r} document, got {doc.get('kind')!r}")


def load_document(path) -> dict:
    """Read a UTF-8 JSON file; any failure becomes :class:`SchemaError`."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    return doc


def _graded_blocks(doc: Mapping, dims, key: str, shape_of) -> list | None:
    if doc.get(key) is None:
        return None
    return [decode_matrix(M, shape_of(q), f"{key}[{q}]") for q, M in enumerate(doc[key])]


def complex_from_doc(doc: Mapping):
    """Build a :class:`~torsionlab.graded_complex.GradedChainComplex` (no validation)."""
    from .graded_complex import GradedChainComplex

    _check_kind(doc, "complex")
    _require(doc, "dims", "nabla")
    dims = [int(d) for d in doc["dims"]]
    m = len(dims) - 1
    nabla = _graded_blocks(doc, dims, "nabla", lambda q: (dims[q + 1], dims[q]))
    gamma = _graded_blocks(doc, dims, "gamma", lambda q: (dims[m - q], dims[q]))
    inner = _graded_blocks(doc, dims, "inner", lambda q: (dims[q], dims[q]))
    return GradedChainComplex(tuple(dims), tuple(nabla), None if gamma is None else tuple(gamma), None if inner is None else tuple(inner))


def complex_to_doc(C) -> dict:
    doc = {"schema": SCHEMA_VERSION, "kind": "complex", "dims": list(C.dims), "nabla": [encode(D) for D in C.nabla]}
    if C.gamma is not None:
        doc["gamma"] = [encode(G) for G in C.gamma]
    if C.inner is not None:
        doc["inner"] = [encode(G) for G in C.inner]
    return doc


def boundary_model_from_doc(doc: Mapping):
    from .boundary_model import BoundaryModel

    _check_kind(doc, "boundary_model")
    _require(doc, "dims", "nabla", "gamma")
    dims = [int(d) for d in doc["dims"]]
    n = len(dims) - 1
    nabla = _graded_blocks(doc, dims, "nabla", lambda p: (dims[p + 1], dims[p]))
    gamma = _graded_blocks(doc, dims, "gamma", lambda p: (dims[n - p], dims[p]))
    inner = _graded_blocks(doc, dims, "inner", lambda p: (dims[p], dims[p]))
    return BoundaryModel(tuple(dims), tuple(nabla), tuple(gamma), None if inner is None else tuple(inner))


def boundary_model_to_doc(M) -> dict:
    doc = {"schema": SCHEMA_VERSION, "kind": "boundary_model", "dims": list(M.dims),
           "nabla": [encode(D) for D in M.nabla], "gamma": [encode(G) for G in M.gamma]}
    if M.inner is not None:
        doc["inner"] = [encode(G) for G in M.inner]
    return doc


def spectrum_from_doc(doc: Mapping):
    from .cylinder_heat import BoundarySpectralModel

    _check_kind(doc, "boundary_spectrum")
    _require(doc, "m", "minus", "plus", "l_minus", "l_plus")
    try:
        return BoundarySpectralModel.from_dict(doc)
    except (KeyError, TypeError, IndexError) as exc:
        raise SchemaError(f"boundary spectrum: {exc}") from None


def spectrum_to_doc(model) -> dict:
    return {"schema": SCHEMA_VERSION, "kind": "boundary_spectrum", **encode(model.to_dict())}


def twisted_from_doc(doc: Mapping):
    from .twisted_cochain import TwistedComplexSpec

    _check_kind(doc, "twisted_complex")
    _require(doc, "cells")
    try:
        return TwistedComplexSpec.from_dict(doc)
    except (KeyError, TypeError, IndexError) as exc:
        raise SchemaError(f"twisted complex: {exc}") from None


def twisted_to_doc(spec) -> dict:
    return {"schema": SCHEMA_VERSION, **encode(spec.to_dict())}


def fixture_path(name: str):
    """Path of a bundled fixture (``name`` without the ``.json`` suffix)."""
    ref = resources.files("torsionlab") / "fixtures" / f"{name}.json"
    if not ref.is_file():
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return ref


def load_fixture(name: str) -> dict:
    return json.loads(fixture_path(name).read_text(encoding="utf-8"))
