"""File formats and deterministic JSON output.

Complex numbers are ``[re, im]`` pairs; floats are written with 17
significant digits so every double survives a round trip exactly.  Keys are
emitted in insertion order, which callers fix.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from sicqb import __version__
from sicqb.weyl_heisenberg import TAU_CONVENTION

ARTIFACT_VERSION = f"sicqb {__version__}"


class FormatError(ValueError):
    """Malformed input file; the message carries the location."""


# --------------------------------------------------------------------------- #
# Canonical JSON
# --------------------------------------------------------------------------- #

def _float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _emit(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _emit(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_emit(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _emit(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, complex):
        return _emit([obj.real, obj.imag], indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    return _emit(obj, indent, 0) + "\n"


def load_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"{path}: cannot read file: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


# --------------------------------------------------------------------------- #
# Complex arrays
# --------------------------------------------------------------------------- #

def complex_to_pairs(a) -> list:
    a = np.asarray(a, dtype=np.complex128)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def pairs_to_complex(data, where: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: expected numeric [re, im] pairs") from exc
    if arr.ndim == 0 or arr.shape[-1] != 2:
        raise FormatError(f"{where}: complex entries must be [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _field(doc: dict, key: str, where: str):
    if not isinstance(doc, dict):
        raise FormatError(f"{where}: top level must be a JSON object")
    if key not in doc:
        raise FormatError(f"{where}: missing field {key!r}")
    return doc[key]


def _dim(doc: dict, where: str) -> int:
    d = _field(doc, "d", where)
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise FormatError(f"{where}: field 'd' must be a positive integer, got {d!r}")
    return d


# --------------------------------------------------------------------------- #
# Fiducial files
# --------------------------------------------------------------------------- #

def fiducial_document(fiducial, residual: float, extra: dict | None = None) -> dict:
    fiducial = np.asarray(fiducial, dtype=np.complex128)
    doc = {
        "d": int(fiducial.size),
        "fiducial": complex_to_pairs(fiducial),
        "tau_convention": TAU_CONVENTION,
        "residual": float(residual),
    }
    doc.update(extra or {})
    return doc


def read_fiducial(path: str | Path) -> np.ndarray:
    where = str(path)
    doc = load_json(path)
    d = _dim(doc, where)
    vec = pairs_to_complex(_field(doc, "fiducial", where), f"{where}: field 'fiducial'")
    if vec.shape != (d,):
        raise FormatError(f"{where}: field 'fiducial' has {vec.size} entries, expected d = {d}")
    convention = doc.get("tau_convention", TAU_CONVENTION)
    if convention != TAU_CONVENTION:
        raise FormatError(f"{where}: unsupported tau_convention {convention!r}")
    return vec


# --------------------------------------------------------------------------- #
# States, probability vectors, mixtures
# --------------------------------------------------------------------------- #

def state_document(rho, extra: dict | None = None) -> dict:
    rho = np.asarray(rho, dtype=np.complex128)
    doc = {"d": int(rho.shape[0]), "rho": complex_to_pairs(rho)}
    doc.update(extra or {})
    return doc


def parse_state(doc, where: str) -> np.ndarray:
    d = _dim(doc, where)
    rho = pairs_to_complex(_field(doc, "rho", where), f"{where}: field 'rho'")
    if rho.shape != (d, d):
        raise FormatError(f"{where}: field 'rho' has shape {rho.shape[:2]}, expected ({d}, {d})")
    return rho


def probs_document(d: int, probs, extra: dict | None = None) -> dict:
    doc = {"d": int(d), "probs": [float(p) for p in probs]}
    doc.update(extra or {})
    return doc


def parse_probs(doc, where: str) -> tuple[int, np.ndarray]:
    d = _dim(doc, where)
    raw = _field(doc, "probs", where)
    try:
        probs = np.asarray(raw, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: field 'probs' must be a list of numbers") from exc
    if probs.shape != (d * d,):
        raise FormatError(f"{where}: field 'probs' has {probs.size} entries, expected d^2 = {d * d}")
    return d, probs


def mixture_document(weights, components, extra: dict | None = None) -> dict:
    comps = [np.asarray(c, dtype=np.complex128) for c in components]
    doc = {
        "d": int(comps[0].shape[0]),
        "weights": [float(w) for w in weights],
        "components": [complex_to_pairs(c) for c in comps],
    }
    doc.update(extra or {})
    return doc


def parse_mixture(doc, where: str) -> tuple[int, np.ndarray, list[np.ndarray]]:
    d = _dim(doc, where)
    try:
        weights = np.asarray(_field(doc, "weights", where), dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: field 'weights' must be a list of numbers") from exc
    raw = _field(doc, "components", where)
    if not isinstance(raw, list) or weights.ndim != 1 or len(raw) != weights.size:
        raise FormatError(f"{where}: 'weights' and 'components' must be lists of equal length")
    comps = []
    for k, c in enumerate(raw):
        m = pairs_to_complex(c, f"{where}: components[{k}]")
        if m.shape != (d, d):
            raise FormatError(f"{where}: components[{k}] has shape {m.shape[:2]}, expected ({d}, {d})")
        comps.append(m)
    return d, weights, comps
