"""JSON readers and writers for Hamiltonians, hardware graphs and embeddings.

Labels are normalized to strings so that the three files of one instance
always agree. Errors carry the file path and, where it can be located, the
line of the offending entry.
"""

from __future__ import annotations

import json
import numbers
from pathlib import Path

from .embedding import Embedding, HardwareGraph
from .errors import HamiltonianError, ParameterError, ParseError
from .ising_core import IsingHamiltonian

_decoder = json.JSONDecoder()


def _read(path) -> tuple[str, object]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(path, f"cannot read file ({exc.strerror or exc})") from None
    try:
        return text, json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.msg, exc.lineno) from None


def _array_item_lines(text: str, key: str) -> list[int]:
    """Line number of each element of the top-level array stored under ``key``."""
    needle = json.dumps(key)
    start = text.find(needle)
    if start < 0:
        return []
    pos = text.find("[", start + len(needle))
    if pos < 0:
        return []
    pos += 1
    lines = []
    while pos < len(text):
        while pos < len(text) and text[pos] in " \t\r\n,":
            pos += 1
        if pos >= len(text) or text[pos] == "]":
            break
        lines.append(text.count("\n", 0, pos) + 1)
        try:
            _, pos = _decoder.raw_decode(text, pos)
        except json.JSONDecodeError:
            break
    return lines


def _key_line(text: str, key: str) -> int | None:
    pos = text.find(json.dumps(key))
    return None if pos < 0 else text.count("\n", 0, pos) + 1


def _label(value, path, line=None) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ParseError(path, f"label {value!r} must be a string or integer", line)
    return str(value)


def _number(value, path, what: str, line=None) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ParseError(path, f"{what} {value!r} is not a number", line)
    return float(value)


def _require_object(data, path, keys):
    if not isinstance(data, dict):
        raise ParseError(path, "top-level value must be a JSON object", 1)
    missing = [k for k in keys if k not in data]
    if missing:
        raise ParseError(path, f"missing required key(s) {missing}")


def load_hamiltonian(path) -> IsingHamiltonian:
    """Read ``{"nodes": [...], "h": {label: value}, "J": [[a, b, value], ...]}``."""
    text, data = _read(path)
    _require_object(data, path, ["J"])
    nodes = None
    if "nodes" in data:
        if not isinstance(data["nodes"], list):
            raise ParseError(path, "'nodes' must be a list", _key_line(text, "nodes"))
        nodes = [_label(x, path, _key_line(text, "nodes")) for x in data["nodes"]]
    h_raw = data.get("h", {})
    if not isinstance(h_raw, dict):
        raise ParseError(path, "'h' must be an object", _key_line(text, "h"))
    h = {str(k): _number(v, path, f"bias of {k!r}", _key_line(text, str(k))) for k, v in h_raw.items()}
    if not isinstance(data["J"], list):
        raise ParseError(path, "'J' must be a list of [a, b, value] triples", _key_line(text, "J"))
    lines = _array_item_lines(text, "J")
    seen = {}
    triples = []
    for k, item in enumerate(data["J"]):
        line = lines[k] if k < len(lines) else None
        if not isinstance(item, list) or len(item) != 3:
            raise ParseError(path, f"coupling entry {item!r} is not an [a, b, value] triple", line)
        a, b = _label(item[0], path, line), _label(item[1], path, line)
        if a == b:
            raise ParseError(path, f"self-loop on {a!r}", line)
        key = frozenset((a, b))
        if key in seen:
            raise ParseError(path, f"duplicate coupling ({a!r}, {b!r}), first given on line {seen[key]}", line)
        seen[key] = line
        triples.append((a, b, _number(item[2], path, "coupling", line)))
    try:
        return IsingHamiltonian(h, triples, nodes=nodes)
    except HamiltonianError as exc:
        raise ParseError(path, str(exc)) from None


def load_hardware(path) -> HardwareGraph:
    """Read ``{"nodes": [...], "edges": [[a, b], ...]}``."""
    text, data = _read(path)
    _require_object(data, path, ["edges"])
    lines = _array_item_lines(text, "edges")
    edges = []
    for k, item in enumerate(data["edges"]):
        line = lines[k] if k < len(lines) else None
        if not isinstance(item, list) or len(item) != 2:
            raise ParseError(path, f"edge entry {item!r} is not an [a, b] pair", line)
        edges.append((_label(item[0], path, line), _label(item[1], path, line)))
    nodes = [_label(x, path) for x in data.get("nodes", [])]
    try:
        return HardwareGraph.from_edges(edges, nodes=nodes)
    except ParameterError as exc:
        raise ParseError(path, str(exc)) from None


def load_embedding(path) -> Embedding:
    """Read ``{"chains": {logical_label: [physical_label, ...]}}``."""
    text, data = _read(path)
    _require_object(data, path, ["chains"])
    chains_raw = data["chains"]
    if not isinstance(chains_raw, dict):
        raise ParseError(path, "'chains' must be an object", _key_line(text, "chains"))
    chains = {}
    for label, qubits in chains_raw.items():
        line = _key_line(text, label)
        if not isinstance(qubits, list) or not qubits:
            raise ParseError(path, f"chain of {label!r} must be a non-empty list", line)
        chains[str(label)] = tuple(_label(u, path, line) for u in qubits)
    return Embedding(chains)


def hamiltonian_to_json(H: IsingHamiltonian) -> dict:
    return {
        "nodes": [str(u) for u in H.nodes],
        "h": {str(u): v for u, v in H.h.items()},
        "J": [[str(a), str(b), v] for (a, b), v in H.J.items()],
    }


def hardware_to_json(hw: HardwareGraph) -> dict:
    return {"nodes": [str(u) for u in hw.nodes], "edges": [[str(a), str(b)] for a, b in hw.edges]}


def embedding_to_json(emb: Embedding) -> dict:
    return {"chains": {str(k): [str(u) for u in v] for k, v in emb.chains.items()}}


def write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
