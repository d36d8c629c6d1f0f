"""Canonical JSON documents for trees and populations.

Serialization is byte-stable: keys sorted, compact separators, trailing
newline. A neuron document holds every tree decomposed from one SWC file; a
population file is JSONL with one tree document per line (practical for
10^5-tree virtual populations).
"""

from __future__ import annotations

import json
from pathlib import Path

from .tree import SCHEMA_VERSION, Tree


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def neuron_document(trees, source=None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "source": source,
        "trees": [t.to_dict() for t in trees],
    }


def write_neuron_json(path, trees, source=None) -> None:
    Path(path).write_text(dumps_canonical(neuron_document(trees, source)),
                          encoding="utf-8")


def read_neuron_json(path) -> list:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    source = doc.get("source")
    trees = [Tree.from_dict(d) for d in doc["trees"]]
    for t in trees:
        t.source = source
    return trees


def write_population_jsonl(path, trees) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in trees:
            d = t.to_dict()
            d["schema_version"] = SCHEMA_VERSION
            fh.write(dumps_canonical(d))


def read_population_jsonl(path) -> list:
    trees = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                trees.append(Tree.from_dict(json.loads(line)))
    return trees


def read_trees(path) -> list:
    """Read trees from either a neuron .json document or a .jsonl population."""
    path = Path(path)
    if path.suffix == ".jsonl":
        return read_population_jsonl(path)
    return read_neuron_json(path)
