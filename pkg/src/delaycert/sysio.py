"""JSON system description files.

Layout::

    {"n": 3, "m": 1, "r": 1, "tau": 1.0,
     "a_atoms": [{"theta": 0.0, "matrix": [[...], ...]}],
     "a_density": [{"interval": [l, u], "coeffs": [M0, M1, ...]}],
     "b": [[1.0], [0.0], [0.0]],
     "c_atoms": [...], "c_density": [...],
     "nonlinearity": {"kind": "expression", "params": {"expr": "tanh(sigma)"},
                      "sector": [0, 1], "lipschitz": {"lambda": 1, "incremental": true}}}

Matrices are nested row-major lists; density coefficients are listed
lowest degree first.  Python's float repr round-trips doubles exactly.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .core import DelayMeasure, DelaySystem, Nonlinearity
from .errors import ConfigError

__all__ = ["load_system", "save_system", "system_to_dict", "system_from_dict", "SCHEMA"]


def _load_schema():
    with resources.files("delaycert").joinpath("system.schema.json").open() as fh:
        return json.load(fh)


SCHEMA = _load_schema()


def _matrix(value, shape, what):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: not a numeric matrix") from exc
    if arr.ndim == 1 and shape[0] == 1:
        arr = arr[None, :]
    if arr.shape != tuple(shape):
        raise ConfigError(f"{what}: expected shape {tuple(shape)}, got {arr.shape}")
    return arr


def _measure(atoms, density, shape, what):
    atom_list = [(float(item["theta"]), _matrix(item["matrix"], shape, f"{what} atom"))
                 for item in atoms]
    pieces = []
    for item in density:
        lo, hi = item["interval"]
        coeffs = [_matrix(c, shape, f"{what} density") for c in item["coeffs"]]
        if not coeffs:
            raise ConfigError(f"{what} density piece has no coefficients")
        pieces.append((float(lo), float(hi), np.stack(coeffs)))
    return DelayMeasure(shape, atoms=tuple(atom_list), density=tuple(pieces))


def _validate(data):
    try:
        import jsonschema
    except ImportError:  # pragma: no cover - optional
        return
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"system file invalid at {where}: {exc.message}") from None


def system_from_dict(data, validate=True):
    """Build ``(DelaySystem, Nonlinearity or None)`` from parsed JSON."""
    if validate:
        _validate(data)
    try:
        n, m, r = int(data["n"]), int(data["m"]), int(data["r"])
        a = _measure(data.get("a_atoms", []), data.get("a_density", []), (n, n), "a")
        c = _measure(data.get("c_atoms", []), data.get("c_density", []), (r, n), "c")
        b = _matrix(data["b"], (n, m), "b")
        sys = DelaySystem(float(data["tau"]), a, b, c)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"system file: missing or malformed field {exc}") from None
    entry = data.get("nonlinearity")
    nl = None
    if entry is not None:
        lip = entry.get("lipschitz")
        nl = Nonlinearity(
            entry["kind"], dict(entry.get("params", {})),
            sector=tuple(entry["sector"]) if entry.get("sector") is not None else None,
            lipschitz=(lip["lambda"], lip.get("incremental", False)) if lip else None)
        if nl.dims != (m, r):
            raise ConfigError(f"nonlinearity maps R^{nl.dims[1]} -> R^{nl.dims[0]}, "
                              f"plant needs R^{r} -> R^{m}")
    return sys, nl


def _atoms_out(mu):
    return [{"theta": t, "matrix": mat.tolist()} for t, mat in mu.atoms]


def _density_out(mu):
    return [{"interval": [lo, hi], "coeffs": [c.tolist() for c in coeffs]}
            for lo, hi, coeffs in mu.density]


def system_to_dict(sys, nonlinearity=None):
    out = {
        "n": sys.n, "m": sys.m, "r": sys.r, "tau": sys.tau,
        "a_atoms": _atoms_out(sys.a), "a_density": _density_out(sys.a),
        "b": sys.b_tilde.tolist(),
        "c_atoms": _atoms_out(sys.c), "c_density": _density_out(sys.c),
    }
    if nonlinearity is not None:
        params = {}
        for key, val in nonlinearity.params.items():
            params[key] = val.tolist() if isinstance(val, np.ndarray) else val
        entry = {"kind": nonlinearity.kind, "params": params}
        if nonlinearity.sector is not None:
            entry["sector"] = list(nonlinearity.sector)
        if nonlinearity.lipschitz is not None:
            lam, inc = nonlinearity.lipschitz
            entry["lipschitz"] = {"lambda": lam, "incremental": inc}
        out["nonlinearity"] = entry
    return out


def load_system(path, validate=True):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read system file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from None
    return system_from_dict(data, validate)


def save_system(path, sys, nonlinearity=None):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(system_to_dict(sys, nonlinearity), fh, indent=2)
        fh.write("\n")
