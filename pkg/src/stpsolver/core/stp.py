"""SteinLib ``.stp`` reading and writing, plus the solution text format."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable

from .instance import Instance, SteinerTree

INF = float("inf")
STP_MAGIC = "33D32945 STP File, STP Format Version 1.0"


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _int_token(tok: str, what: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {tok!r}", lineno) from None


def parse_stp(text: str | bytes, name: str = "") -> Instance:
    """Parse SteinLib text into an :class:`Instance` with 0-based vertex ids.

    Only the Graph and Terminals sections are interpreted; Comment,
    Coordinates and any other sections are skipped.  Declared counts must
    match the number of ``E``/``T`` lines.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    lines = text.splitlines()

    header_seen = False
    section: str | None = None
    nodes: int | None = None
    declared_edges: int | None = None
    declared_terms: int | None = None
    edges: list[tuple[int, int, int]] = []
    terminals: list[int] = []
    graph_end = terms_end = 0
    saw_terminals = False
    eof = False

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if "STP" not in line.upper() or not (line.startswith("33D32945") or "STP FILE" in line.upper()):
                raise ParseError("malformed header (expected '33D32945 STP File ...')", lineno)
            header_seen = True
            continue
        toks = line.split()
        key = toks[0].upper()
        if eof:
            break
        if section is None:
            if key == "SECTION":
                if len(toks) < 2:
                    raise ParseError("SECTION without a name", lineno)
                section = toks[1].upper()
                if section == "TERMINALS":
                    saw_terminals = True
            elif key == "EOF":
                eof = True
            else:
                raise ParseError(f"unexpected line outside a section: {line!r}", lineno)
            continue
        if key == "END":
            if section == "GRAPH":
                graph_end = lineno
            elif section == "TERMINALS":
                terms_end = lineno
            section = None
            continue

        if section == "GRAPH":
            if key == "NODES":
                nodes = _int_token(toks[1] if len(toks) > 1 else "", "Nodes", lineno)
                if nodes < 1:
                    raise ParseError("Nodes must be positive", lineno)
            elif key == "EDGES":
                declared_edges = _int_token(toks[1] if len(toks) > 1 else "", "Edges", lineno)
            elif key == "E":
                if nodes is None:
                    raise ParseError("edge line before Nodes", lineno)
                if len(toks) != 4:
                    raise ParseError(f"edge line needs 'E u v cost', got {line!r}", lineno)
                u = _int_token(toks[1], "edge endpoint", lineno)
                v = _int_token(toks[2], "edge endpoint", lineno)
                c = _int_token(toks[3], "edge cost", lineno)
                if not (1 <= u <= nodes and 1 <= v <= nodes):
                    raise ParseError(f"edge endpoint out of range 1..{nodes}", lineno)
                if c < 0:
                    raise ParseError(f"negative edge cost {c}", lineno)
                edges.append((u - 1, v - 1, c))
            elif key in ("ARCS", "A"):
                raise ParseError("directed instances (Arcs) are not supported", lineno)
            else:
                raise ParseError(f"unknown Graph keyword {toks[0]!r}", lineno)
        elif section == "TERMINALS":
            if key == "TERMINALS":
                declared_terms = _int_token(toks[1] if len(toks) > 1 else "", "Terminals", lineno)
            elif key == "T":
                if nodes is None:
                    raise ParseError("terminal before the Graph section", lineno)
                t = _int_token(toks[1] if len(toks) > 1 else "", "terminal", lineno)
                if not 1 <= t <= nodes:
                    raise ParseError(f"terminal {t} out of range 1..{nodes}", lineno)
                terminals.append(t - 1)
            elif key in ("ROOT", "ROOTP", "TP"):
                pass
            else:
                raise ParseError(f"unknown Terminals keyword {toks[0]!r}", lineno)
        # other sections (Comment, Coordinates, MaximumDegrees, ...) are ignored

    last = len(lines)
    if not header_seen:
        raise ParseError("malformed header (empty input)", 1)
    if section is not None:
        raise ParseError(f"section {section} not closed by END", last)
    if nodes is None:
        raise ParseError("missing Graph section or Nodes line", last)
    if declared_edges is not None and declared_edges != len(edges):
        raise ParseError(f"edge count mismatch (declared {declared_edges}, found {len(edges)})",
                         graph_end or last)
    if not saw_terminals:
        raise ParseError("missing Terminals section", last)
    if declared_terms is not None and declared_terms != len(terminals):
        raise ParseError(f"terminal count mismatch (declared {declared_terms}, found {len(terminals)})",
                         terms_end or last)
    if not terminals:
        raise ParseError("no terminals", terms_end or last)
    return Instance(nodes, edges, terminals, name=name)


def read_stp(path: str | Path) -> Instance:
    path = Path(path)
    return parse_stp(path.read_bytes(), name=path.stem)


def format_stp(instance: Instance, comment: str | None = None) -> str:
    out = [STP_MAGIC, ""]
    out += ["SECTION Comment", f'Name "{instance.name or "instance"}"']
    if comment:
        out.append(f'Remark "{comment}"')
    out += ["END", "", "SECTION Graph", f"Nodes {instance.n}", f"Edges {instance.m}"]
    out += [f"E {u + 1} {v + 1} {c}" for u, v, c in instance.edges()]
    out += ["END", "", "SECTION Terminals", f"Terminals {len(instance.terminals)}"]
    out += [f"T {t + 1}" for t in sorted(instance.terminals)]
    out += ["END", "", "EOF", ""]
    return "\n".join(out)


def format_solution(instance: Instance, tree: SteinerTree) -> str:
    lines = [f"VALUE {tree.cost}"]
    pairs = []
    for e in tree.edges:
        u, v = instance.tails[e] + 1, instance.heads[e] + 1
        pairs.append((min(u, v), max(u, v)))
    lines += [f"E {u} {v}" for u, v in sorted(pairs)]
    return "\n".join(lines) + "\n"


def parse_solution(text: str, instance: Instance) -> SteinerTree:
    """Read back a solution written by :func:`format_solution`."""
    value = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = raw.split()
        if not toks:
            continue
        if toks[0] == "VALUE":
            value = _int_token(toks[1], "VALUE", lineno)
        elif toks[0] == "E":
            u, v = (_int_token(t, "edge endpoint", lineno) - 1 for t in toks[1:3])
            e = instance.edge_id(u, v)
            if e is None:
                raise ParseError(f"edge ({u + 1}, {v + 1}) not in instance", lineno)
            edges.append(e)
        else:
            raise ParseError(f"unexpected line {raw!r}", lineno)
    tree = SteinerTree.from_edges(instance, edges)
    if value is not None and value != tree.cost:
        raise ParseError(f"VALUE {value} disagrees with edge costs ({tree.cost})")
    return tree


STATS_KEYS = ("mode", "seed", "iterations", "cost", "lower_bound", "nodes", "wall_ms")


def format_stats(stats: dict[str, Any]) -> str:
    """JSON stats record; the standard keys come first, extras after."""
    ordered = {k: stats.get(k) for k in STATS_KEYS}
    ordered.update({k: v for k, v in stats.items() if k not in ordered})
    ordered = {k: (None if isinstance(v, float) and (v != v or v in (INF, -INF)) else v)
               for k, v in ordered.items()}
    return json.dumps(ordered, indent=2, default=_jsonable) + "\n"


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    return str(obj)


def write_lines(path: str | Path, lines: Iterable[str]) -> None:
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
