"""JSON file formats for systems, generators, and matrices.

All files are UTF-8 JSON with expression strings in the textual dialect of
:mod:`cmlie.expr`:

    system    {"states": ["y1", ...], "params": ["k1", ...],
               "rhs": {"y1": "<expr>", ...}}
    generator {"xi": "<expr>", "eta": {"y1": "<expr>", ...}}
    matrix    {"rows": [["<expr>", ...], ...]}

Loading then saving a file is lossless up to expression rendering, and the
rendered expressions re-parse to equal values.
"""

from __future__ import annotations

import json
import os
from typing import Mapping

from .algebra import PolyMatrix
from .expr import parse_expr
from .odesys import OdeSystem
from .symmetry import Generator


class FileFormatError(ValueError):
    """Input file does not match the expected JSON schema."""


def _load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise FileFormatError(f"{path}: expected a JSON object at top level")
    return data


def _require(data: Mapping, key: str, path) -> object:
    if key not in data:
        raise FileFormatError(f"{path}: missing required key {key!r}")
    return data[key]


def load_system(path) -> OdeSystem:
    data = _load_json(path)
    states = _require(data, "states", path)
    params = data.get("params", [])
    rhs_map = _require(data, "rhs", path)
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        raise FileFormatError(f"{path}: 'states' must be a list of names")
    if not isinstance(params, list) or not all(isinstance(s, str) for s in params):
        raise FileFormatError(f"{path}: 'params' must be a list of names")
    if not isinstance(rhs_map, dict):
        raise FileFormatError(f"{path}: 'rhs' must map state names to expressions")
    missing = [s for s in states if s not in rhs_map]
    if missing:
        raise FileFormatError(f"{path}: 'rhs' missing entries for {missing}")
    extra = [s for s in rhs_map if s not in states]
    if extra:
        raise FileFormatError(f"{path}: 'rhs' has entries for unknown states {extra}")
    ambient = ("t",) + tuple(states) + tuple(params)
    rhs = tuple(parse_expr(str(rhs_map[s]), ambient) for s in states)
    return OdeSystem(tuple(states), tuple(params), rhs)


def save_system(sys: OdeSystem, path) -> None:
    data = {
        "states": list(sys.state_syms),
        "params": list(sys.param_syms),
        "rhs": {name: str(f) for name, f in zip(sys.state_syms, sys.rhs)},
    }
    _dump(data, path)


def load_generator(path, sys: OdeSystem) -> Generator:
    data = _load_json(path)
    xi = str(_require(data, "xi", path))
    eta_map = _require(data, "eta", path)
    if not isinstance(eta_map, dict):
        raise FileFormatError(f"{path}: 'eta' must map state names to expressions")
    missing = [s for s in sys.state_syms if s not in eta_map]
    if missing:
        raise FileFormatError(f"{path}: 'eta' missing entries for {missing}")
    extra = [s for s in eta_map if s not in sys.state_syms]
    if extra:
        raise FileFormatError(f"{path}: 'eta' has entries for unknown states {extra}")
    return Generator.from_strings(sys, xi, [str(eta_map[s]) for s in sys.state_syms])


def save_generator(gen: Generator, state_names, path) -> None:
    data = {
        "xi": str(gen.xi),
        "eta": {name: str(e) for name, e in zip(state_names, gen.etas)},
    }
    _dump(data, path)


def load_matrix(path, sys: OdeSystem) -> PolyMatrix:
    data = _load_json(path)
    rows = _require(data, "rows", path)
    if (
        not isinstance(rows, list)
        or not rows
        or not all(isinstance(r, list) and r for r in rows)
    ):
        raise FileFormatError(f"{path}: 'rows' must be a non-empty list of non-empty lists")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise FileFormatError(f"{path}: ragged matrix rows")
    parsed = [[parse_expr(str(e), sys.symbols) for e in row] for row in rows]
    return PolyMatrix.from_rows(parsed)


def save_matrix(m: PolyMatrix, path) -> None:
    data = {"rows": [[str(e) for e in m.row(i)] for i in range(m.rows)]}
    _dump(data, path)


def save_manifold_map(mapping: Mapping[str, str], path) -> None:
    """Serialize a center-manifold map {hyperbolic var -> expression}."""
    _dump(dict(mapping), path)


def _dump(data: dict, path) -> None:
    text = json.dumps(data, indent=2) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def export_case(tag: str, directory) -> list[str]:
    """Write a built-in case as standard system/matrix/generator files.

    Returns the list of file names written (relative to ``directory``).
    """
    from .models import paper_case

    case = paper_case(tag)
    os.makedirs(directory, exist_ok=True)
    written = []

    def put(name, writer):
        full = os.path.join(directory, name)
        writer(full)
        written.append(name)

    put("system.json", lambda p: save_system(case.system, p))
    put("matrix.json", lambda p: save_matrix(case.transform, p))
    put("system_normal.json", lambda p: save_system(case.normal_system, p))
    for i, gen in enumerate(case.generators_original, start=1):
        put(
            f"generator_original_{i}.json",
            lambda p, g=gen: save_generator(g, case.system.state_syms, p),
        )
    for i, gen in enumerate(case.generators_normal, start=1):
        put(
            f"generator_normal_{i}.json",
            lambda p, g=gen: save_generator(g, case.normal_system.state_syms, p),
        )
    return written
