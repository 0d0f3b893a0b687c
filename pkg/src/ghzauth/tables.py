"""Regenerate the GHZ transformation table and swap supports from the
state-vector engine and compare them with the golden fixture."""

from __future__ import annotations

import itertools
import json
from importlib import resources
from pathlib import Path
from typing import Any

from .entanglement import GhzLabel, swap_distribution, transform_label
from .statevec import PauliChoice

PROB_TOL = 1e-9


def load_fixture(path: str | Path | None = None) -> dict[str, Any]:
    if path is None:
        text = resources.files("ghzauth").joinpath("data/tables.json").read_text()
    else:
        text = Path(path).read_text()
    return json.loads(text)


def transformation_table() -> dict[str, list[str]]:
    """Psi index -> operator triple, for every triple applied to Psi_1."""
    table: dict[str, list[str]] = {}
    for ops in itertools.product(PauliChoice, repeat=3):
        k = transform_label(ops, 3).psi_index
        if str(k) in table:
            raise AssertionError(f"Psi{k} reached by two operator triples")
        table[str(k)] = [str(o) for o in ops]
    return dict(sorted(table.items(), key=lambda kv: int(kv[0])))


def _label(spec) -> GhzLabel:
    if spec == "phi+":
        return GhzLabel((0, 0), 0)
    return GhzLabel.psi(int(spec))


def _support_entry(p, q) -> dict[str, Any]:
    dist = swap_distribution(_label(p), _label(q))
    probs = sorted(set(round(v, 12) for v in dist.values()))
    return {
        "p": p,
        "q": q,
        "probability": probs[0] if len(probs) == 1 else probs,
        "support": dist.labels(),
    }


def regenerate() -> dict[str, Any]:
    return {
        "transformations": transformation_table(),
        "pair_swap": _support_entry("phi+", "phi+"),
        "swap_psi1_psi1": _support_entry(1, 1),
        "swap_psi7_psi1": _support_entry(7, 1),
    }


def compare(generated: dict[str, Any], golden: dict[str, Any]) -> list[str]:
    """Human-readable differences; empty when everything matches."""
    problems = []
    if generated["transformations"] != golden.get("transformations"):
        problems.append("transformation table differs")
    for key in ("pair_swap", "swap_psi1_psi1", "swap_psi7_psi1"):
        want = golden.get(key, {})
        got = generated[key]
        if sorted(want.get("support", [])) != got["support"]:
            problems.append(f"{key} support differs")
        prob = got["probability"]
        if not isinstance(prob, float) or abs(prob - float(want.get("probability", -1))) > PROB_TOL:
            problems.append(f"{key} probability {prob} != {want.get('probability')}")
    return problems


def render(tables: dict[str, Any]) -> str:
    lines = ["GHZ transformation table (operators on T, A1, A2 applied to Psi1):"]
    for k, ops in tables["transformations"].items():
        lines.append(f"  Psi{k}  <-  {' x '.join(ops)}")
    names = {"pair_swap": "phi+ (x) phi+", "swap_psi1_psi1": "Psi1 (x) Psi1", "swap_psi7_psi1": "Psi7 (x) Psi1"}
    for key, title in names.items():
        entry = tables[key]
        lines.append(f"Swap support of {title} (each with probability {entry['probability']}):")
        for row in entry["support"]:
            lines.append("  " + " ".join(row))
    return "\n".join(lines)
