"""Scenario files: JSON descriptions of a crossed product plus run parameters.

Schema ``crossfree.scenario/1``::

    {
      "schema": "crossfree.scenario/1",
      "name": "f2_diag2",
      "group": {"free_group": 2}            # or {"factors": ["Z2", "Z3"]}
      "coefficients": {"shape": "diag", "dimension": 2, "mode": "exact"},
      "action": {"kind": "permutation",     # images of 1..d, one list per generator
                 "generators": [[2, 1], [1, 2]]},
      "tolerance": 1e-9,
      "seed": 7,
      "splits": [[[0], [1]]],               # factor-index families to test for freeness
      "freeness": {"max_order": 4, "trials": 100, "spot_order": 5, "spot_trials": 20},
      "checks": {...},                      # sample counts for verify-paper
      "elements": [{"terms": [{"word": "g0", "matrix": ["1", "2"]}]}, ...],
      "partition": "{(1,2),(3)}"
    }

Exact scalars are written as strings (``"1/2-3*i"``); float scalars as
numbers or ``[re, im]`` pairs. Unitary generators are full matrices.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .coeffalgebra import DEFAULT_TOL, DIAG, EXACT, MODES, SHAPES
from .crossedalg import PERMUTATION, ActionSpec, CrossedElement, CrossedProduct
from .errors import DomainError
from .groupwords import GroupSpec
from .nclattice import NCPartition, parse_partition

SCHEMA = "crossfree.scenario/1"

DEFAULT_CHECKS = {
    "word_tuples": 500,
    "monomial_tuples": 500,
    "partition_tuples": 50,
    "cumulant_tuples": 200,
    "roundtrip_inputs": 200,
    "oracle_tuples": 200,
    "algebra_samples": 100,
}
DEFAULT_FREENESS = {"max_order": 4, "trials": 100, "spot_order": 5, "spot_trials": 20}


@dataclass
class Scenario:
    name: str
    algebra: CrossedProduct
    tolerance: float
    seed: int
    splits: list[list[list[int]]]
    freeness: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_FREENESS))
    checks: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_CHECKS))
    elements: list[CrossedElement] = field(default_factory=list)
    partition: NCPartition | None = None
    description: str = ""

    @property
    def group(self) -> GroupSpec:
        return self.algebra.group

    def is_free_group(self) -> bool:
        return all(k == 0 for k in self.group.orders)


def _group(data: Any) -> GroupSpec:
    if not isinstance(data, dict):
        raise DomainError("'group' must be an object")
    if "free_group" in data:
        n = data["free_group"]
        if not isinstance(n, int) or n < 1:
            raise DomainError("'free_group' must be a positive integer")
        return GroupSpec.free_group(n)
    if "factors" in data:
        return GroupSpec.from_factors(data["factors"])
    raise DomainError("'group' needs 'free_group' or 'factors'")


def _require(data: dict, key: str) -> Any:
    if key not in data:
        raise DomainError(f"scenario is missing {key!r}")
    return data[key]


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise DomainError("scenario must be a JSON object")
    if data.get("schema") != SCHEMA:
        raise DomainError(f"unsupported scenario schema {data.get('schema')!r}; expected {SCHEMA!r}")
    group = _group(_require(data, "group"))
    coeffs = _require(data, "coefficients")
    shape = coeffs.get("shape", DIAG)
    mode = coeffs.get("mode", EXACT)
    d = coeffs.get("dimension")
    if shape not in SHAPES or mode not in MODES or not isinstance(d, int) or d < 1:
        raise DomainError(f"bad coefficient description {coeffs!r}")
    action = _require(data, "action")
    kind = action.get("kind")
    gens = action.get("generators")
    if not isinstance(gens, list) or len(gens) != group.rank:
        raise DomainError(f"action must list one generator for each of the {group.rank} factors")
    if mode == EXACT and kind != PERMUTATION:
        raise DomainError("exact scalar mode requires a permutation action")
    if kind == PERMUTATION:
        try:
            gens = [[int(x) - 1 for x in p] for p in gens]
        except (TypeError, ValueError) as exc:
            raise DomainError("permutation generators must list images of 1..d") from exc
    tol = float(data.get("tolerance", DEFAULT_TOL))
    if tol < 0:
        raise DomainError("tolerance must be nonnegative")
    algebra = CrossedProduct(ActionSpec(group, shape, d, mode, kind, gens, tol))
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise DomainError("seed must be a 64-bit unsigned integer")
    splits = data.get("splits", [])
    for split in splits:
        if not isinstance(split, list) or len(split) < 2:
            raise DomainError(f"bad split {split!r}")
    elements = [algebra.element_from_json(e) for e in data.get("elements", [])]
    partition = data.get("partition")
    return Scenario(
        name=data.get("name", "scenario"),
        algebra=algebra,
        tolerance=tol,
        seed=seed,
        splits=splits,
        freeness={**DEFAULT_FREENESS, **data.get("freeness", {})},
        checks={**DEFAULT_CHECKS, **data.get("checks", {})},
        elements=elements,
        partition=parse_partition(partition) if partition else None,
        description=data.get("description", ""),
    )


def bundled_fixtures() -> list[str]:
    root = resources.files("crossfree") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_scenario(ref: str | Path) -> Scenario:
    """Load a scenario from a path, or a bundled fixture by name (``f2_diag2`` or ``f2_diag2.json``)."""
    path = Path(ref)
    if path.is_file():
        text = path.read_text()
    else:
        name = path.name[:-5] if path.name.endswith(".json") else path.name
        res = resources.files("crossfree") / "fixtures" / f"{name}.json"
        if not res.is_file():
            raise DomainError(f"no scenario file or bundled fixture named {str(ref)!r}")
        text = res.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"scenario is not valid JSON: {exc}") from exc
    return scenario_from_dict(data)
