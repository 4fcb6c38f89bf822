"""JSON scenario documents for the exact engine.

Shape (``schema`` is required)::

    {
      "schema": "compatlab.scenario/1",
      "atoms": [...], "weights": ["1/4", ...],          # or "measure": [[x, y, "p/q"], ...]
      "rvs": {"X": [...], "Y": [...]},                   # one value per atom; lists become tuples
      "structure": {"prefix": 2}                         # or {"x_coords": {...}, "y_coords": {...}}
      "h_values": [[0, 1], ...],                         # optional: partial check on these indicators
      "checks": ["compatibility", "dual", "adapted", "strong"]
    }

Weights may be ``"p/q"`` strings, integers or floats (floats switch to tolerance mode).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .compat import CompatStructure, check_adapted, check_compatibility, check_dual, is_function_of
from .measures import JointMeasure
from .space import FiniteSpace, Rv, as_weight, fmt_number

SCHEMA = "compatlab.scenario/1"
CHECKS = ("compatibility", "dual", "adapted", "strong")


class ScenarioError(ValueError):
    pass


def _tup(v):
    return tuple(_tup(x) for x in v) if isinstance(v, list) else v


@dataclass
class Scenario:
    space: FiniteSpace
    X: Rv
    Y: Rv
    structure: CompatStructure
    checks: tuple


def _structure(doc, h_set):
    st = doc.get("structure")
    if not isinstance(st, dict):
        raise ScenarioError("'structure' must be an object")
    if "prefix" in st:
        return CompatStructure.prefix(int(st["prefix"]), h_set=h_set)
    try:
        xc = {k: tuple(v) for k, v in st["x_coords"].items()}
        yc = {k: tuple(v) for k, v in st["y_coords"].items()}
    except (KeyError, AttributeError, TypeError) as exc:
        raise ScenarioError("structure needs 'prefix' or 'x_coords' and 'y_coords'") from exc
    return CompatStructure.coordinates(xc, yc, h_set=h_set)


def parse_scenario(doc: dict) -> Scenario:
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise ScenarioError(f"scenario must declare schema {SCHEMA!r}")
    try:
        if "measure" in doc:
            rows = [(_tup(x), _tup(y), as_weight(w)) for x, y, w in doc["measure"]]
            xs = tuple(dict.fromkeys(r[0] for r in rows))
            ys = tuple(dict.fromkeys(r[1] for r in rows))
            mass = {}
            for x, y, w in rows:
                mass[(x, y)] = mass.get((x, y), 0) + w
            space, X, Y = JointMeasure(xs, ys, mass).to_space()
        else:
            atoms = [_tup(a) for a in doc["atoms"]]
            space, keep = FiniteSpace.from_weights(atoms, doc["weights"])
            rv = doc["rvs"]
            X = Rv(space, [_tup(rv["X"][i]) for i in keep])
            Y = Rv(space, [_tup(rv["Y"][i]) for i in keep])
        h_set = None
        if "h_values" in doc:
            h_set = tuple((repr(_tup(v)), (lambda y, v=_tup(v): int(y == v))) for v in doc["h_values"])
        C = _structure(doc, h_set)
        checks = tuple(doc.get("checks", ("compatibility",)))
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError, IndexError, ZeroDivisionError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc
    bad = set(checks) - set(CHECKS)
    if bad:
        raise ScenarioError(f"unknown checks {sorted(bad)}")
    return Scenario(space, X, Y, C, checks)


def load_scenario(path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
    return parse_scenario(doc)


def run_scenario(sc: Scenario) -> dict:
    """Run the requested checks; ``passed`` is the conjunction of their outcomes."""
    out = {}
    for name in sc.checks:
        if name == "compatibility":
            out[name] = check_compatibility(sc.X, sc.Y, sc.structure).to_json()
        elif name == "dual":
            out[name] = check_dual(sc.X, sc.Y, sc.structure).to_json()
        elif name == "adapted":
            flags = check_adapted(sc.X, sc.Y, sc.structure)
            out[name] = {"passed": all(flags.values()), "per_alpha": {str(a): f for a, f in flags.items()}}
        else:
            out[name] = {"passed": is_function_of(sc.X, sc.Y)}
    return {"schema": SCHEMA + "-report", "atoms": len(sc.space), "exact": sc.space.exact,
            "passed": all(r["passed"] for r in out.values()), "checks": out}


__all__ = ["SCHEMA", "Scenario", "ScenarioError", "fmt_number", "load_scenario", "parse_scenario",
           "run_scenario"]
