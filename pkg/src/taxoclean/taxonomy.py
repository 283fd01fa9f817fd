"""Cleaned class taxonomies: model, CSV/JSON serialization and entity search."""

from __future__ import annotations

import csv
import io
import json
import unicodedata
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

ORIGINAL = "original"
WORDNET = "wordnet"
FORMAT_VERSION = 1
MAX_ANSWERS = 10


class TaxonomyError(ValueError):
    pass


@dataclass(frozen=True)
class ClassNode:
    name: str
    origin: str = ORIGINAL
    synset: str | None = None


@dataclass
class Taxonomy:
    classes: dict[str, ClassNode] = field(default_factory=dict)
    entities: set[str] = field(default_factory=set)
    subclass_edges: dict[tuple[str, str], float | None] = field(default_factory=dict)
    instance_edges: dict[tuple[str, str], float | None] = field(default_factory=dict)

    def copy(self) -> "Taxonomy":
        return Taxonomy(
            dict(self.classes),
            set(self.entities),
            dict(self.subclass_edges),
            dict(self.instance_edges),
        )

    def parents(self, cls: str) -> list[str]:
        return sorted(p for c, p in self.subclass_edges if c == cls)

    def children(self, cls: str) -> list[str]:
        return sorted(c for c, p in self.subclass_edges if p == cls)

    def _index(self):
        up: dict[str, set[str]] = {c: set() for c in self.classes}
        down: dict[str, set[str]] = {c: set() for c in self.classes}
        for c, p in self.subclass_edges:
            up.setdefault(c, set()).add(p)
            down.setdefault(p, set()).add(c)
        return up, down

    def find_cycle(self) -> list[str] | None:
        up, _ = self._index()
        color: dict[str, int] = {}
        for start in sorted(up):
            if start in color:
                continue
            path = [start]
            color[start] = 1
            stack = [iter(sorted(up[start]))]
            while stack:
                nxt = next(stack[-1], None)
                if nxt is None:
                    stack.pop()
                    color[path.pop()] = 2
                    continue
                state = color.get(nxt, 0)
                if state == 1:
                    return path[path.index(nxt):] + [nxt]
                if state == 0:
                    color[nxt] = 1
                    path.append(nxt)
                    stack.append(iter(sorted(up.get(nxt, ()))))
        return None

    def ancestors(self, cls: str) -> set[str]:
        up, _ = self._index()
        seen: set[str] = set()
        todo = list(up.get(cls, ()))
        while todo:
            n = todo.pop()
            if n not in seen:
                seen.add(n)
                todo.extend(up.get(n, ()))
        return seen

    def validate(self) -> None:
        overlap = set(self.classes) & self.entities
        if overlap:
            raise TaxonomyError(f"names used for both classes and entities: {sorted(overlap)}")
        for name, node in self.classes.items():
            if node.name != name or node.origin not in (ORIGINAL, WORDNET):
                raise TaxonomyError(f"bad class record for {name!r}")
        dangling = []
        for c, p in self.subclass_edges:
            if c == p:
                raise TaxonomyError(f"self-loop on {c!r}")
            for n in (c, p):
                if n not in self.classes:
                    kind = "entity" if n in self.entities else "unknown node"
                    dangling.append(f"subclass edge {c!r} -> {p!r}: {kind} {n!r}")
        for e, c in self.instance_edges:
            if e not in self.entities:
                dangling.append(f"instance edge {e!r} -> {c!r}: {e!r} is not an entity")
            if c not in self.classes:
                dangling.append(f"instance edge {e!r} -> {c!r}: {c!r} is not a class")
        if dangling:
            raise TaxonomyError("dangling references:\n  " + "\n  ".join(sorted(dangling)))
        cycle = self.find_cycle()
        if cycle:
            raise TaxonomyError("cycle: " + " -> ".join(cycle))

    def stats(self) -> dict[str, int]:
        return {
            "classes": len(self.classes),
            "original_classes": sum(1 for c in self.classes.values() if c.origin == ORIGINAL),
            "wordnet_classes": sum(1 for c in self.classes.values() if c.origin == WORDNET),
            "entities": len(self.entities),
            "subclass_edges": len(self.subclass_edges),
            "instance_edges": len(self.instance_edges),
        }


# Serialization

def _score_text(score: float | None) -> str:
    return "" if score is None else repr(float(score))


def _score_value(text: str, where: str) -> float | None:
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        raise TaxonomyError(f"{where}: bad score {text!r}") from None


def to_csv(tax: Taxonomy) -> str:
    """Rows ``kind,child,parent,score``.

    Node rows: ``class``/``wnclass`` (name, synset id or empty) and
    ``entity`` (name).  Edge rows: ``subclass`` and ``instance``.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "child", "parent", "score"])
    for name in sorted(tax.classes):
        node = tax.classes[name]
        kind = "class" if node.origin == ORIGINAL else "wnclass"
        w.writerow([kind, name, node.synset or "", ""])
    for e in sorted(tax.entities):
        w.writerow(["entity", e, "", ""])
    for (c, p), s in sorted(tax.subclass_edges.items()):
        w.writerow(["subclass", c, p, _score_text(s)])
    for (e, c), s in sorted(tax.instance_edges.items()):
        w.writerow(["instance", e, c, _score_text(s)])
    return buf.getvalue()


def from_csv(text: str) -> Taxonomy:
    tax = Taxonomy()
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header != ["kind", "child", "parent", "score"]:
        raise TaxonomyError("line 1: expected header kind,child,parent,score")
    for lineno, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != 4:
            raise TaxonomyError(f"line {lineno}: expected 4 columns")
        kind, child, parent, score = row
        where = f"line {lineno}"
        if kind in ("class", "wnclass"):
            origin = ORIGINAL if kind == "class" else WORDNET
            tax.classes[child] = ClassNode(child, origin, parent or None)
        elif kind == "entity":
            tax.entities.add(child)
        elif kind == "subclass":
            tax.subclass_edges[(child, parent)] = _score_value(score, where)
        elif kind == "instance":
            tax.instance_edges[(child, parent)] = _score_value(score, where)
        else:
            raise TaxonomyError(f"{where}: unknown row kind {kind!r}")
    tax.validate()
    return tax


def to_json(tax: Taxonomy) -> str:
    obj = {
        "format_version": FORMAT_VERSION,
        "classes": [
            {"name": n.name, "origin": n.origin, "synset": n.synset}
            for n in sorted(tax.classes.values(), key=lambda n: n.name)
        ],
        "entities": sorted(tax.entities),
        "subclass_edges": [
            {"child": c, "parent": p, "score": s}
            for (c, p), s in sorted(tax.subclass_edges.items())
        ],
        "instance_edges": [
            {"entity": e, "class": c, "score": s}
            for (e, c), s in sorted(tax.instance_edges.items())
        ],
    }
    return json.dumps(obj, indent=1, ensure_ascii=False) + "\n"


def from_json(text: str) -> Taxonomy:
    obj = json.loads(text)
    if obj.get("format_version") != FORMAT_VERSION:
        raise TaxonomyError(f"unsupported taxonomy format {obj.get('format_version')!r}")
    try:
        tax = Taxonomy(
            classes={
                c["name"]: ClassNode(c["name"], c["origin"], c.get("synset"))
                for c in obj["classes"]
            },
            entities=set(obj["entities"]),
            subclass_edges={(e["child"], e["parent"]): e.get("score") for e in obj["subclass_edges"]},
            instance_edges={(e["entity"], e["class"]): e.get("score") for e in obj["instance_edges"]},
        )
    except (KeyError, TypeError) as exc:
        raise TaxonomyError(f"malformed taxonomy JSON: {exc}") from None
    tax.validate()
    return tax


def serialize(tax: Taxonomy, format: str = "csv") -> str:
    if format == "csv":
        return to_csv(tax)
    if format == "json":
        return to_json(tax)
    raise ValueError(f"unknown taxonomy format {format!r}")


def deserialize(text: str, format: str = "csv") -> Taxonomy:
    if format == "csv":
        return from_csv(text)
    if format == "json":
        return from_json(text)
    raise ValueError(f"unknown taxonomy format {format!r}")


# Entity search

def _fold(text: str) -> str:
    decomposed = unicodedata.normalize("NFKD", text.casefold())
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


def match_classes(tax: Taxonomy, phrase: str) -> set[str]:
    """Classes whose name contains ``phrase``, ignoring case and accents."""
    needle = _fold(phrase.strip())
    if not needle:
        raise ValueError("empty query phrase")
    return {name for name in tax.classes if needle in _fold(name)}


class SearchIndex:
    """Adjacency built once for repeated read-only queries."""

    def __init__(self, tax: Taxonomy):
        self.tax = tax
        self.down: dict[str, list[str]] = {c: [] for c in tax.classes}
        for c, p in tax.subclass_edges:
            self.down[p].append(c)
        for kids in self.down.values():
            kids.sort()
        self.instances: dict[str, list[str]] = {c: [] for c in tax.classes}
        for e, c in tax.instance_edges:
            self.instances[c].append(e)
        for es in self.instances.values():
            es.sort()

    def extent(self, phrase: str) -> list[str]:
        """All entities under the matched classes, in (BFS level, name) order."""
        level: dict[str, int] = {}
        queue = deque()
        for c in sorted(match_classes(self.tax, phrase)):
            level[c] = 0
            queue.append(c)
        while queue:
            node = queue.popleft()
            for child in self.down[node]:
                if child not in level:
                    level[child] = level[node] + 1
                    queue.append(child)
        found: dict[str, int] = {}
        for cls, lv in level.items():
            for e in self.instances[cls]:
                if lv < found.get(e, lv + 1):
                    found[e] = lv
        return sorted(found, key=lambda e: (found[e], e))

    def single(self, t: str, limit: int = MAX_ANSWERS) -> list[str]:
        return self.extent(t)[:limit]

    def intersection(self, t1: str, t2: str, limit: int = MAX_ANSWERS) -> list[str]:
        other = set(self.extent(t2))
        return [e for e in self.extent(t1) if e in other][:limit]

    def difference(self, t1: str, t2: str, limit: int = MAX_ANSWERS) -> list[str]:
        other = set(self.extent(t2))
        return [e for e in self.extent(t1) if e not in other][:limit]


def query_single(tax: Taxonomy, t: str) -> list[str]:
    return SearchIndex(tax).single(t)


def query_intersection(tax: Taxonomy, t1: str, t2: str) -> list[str]:
    return SearchIndex(tax).intersection(t1, t2)


def query_difference(tax: Taxonomy, t1: str, t2: str) -> list[str]:
    return SearchIndex(tax).difference(t1, t2)


QUERY_KINDS = {"single": 1, "and": 2, "diff": 2}


def run_query(index: SearchIndex, kind: str, terms: Iterable[str]) -> dict:
    """Execute one query; the result is the JSON-lines answer record."""
    terms = list(terms)
    if QUERY_KINDS.get(kind) != len(terms):
        raise ValueError(f"query {kind!r} takes {QUERY_KINDS.get(kind, '?')} class phrase(s)")
    if kind == "single":
        answers = index.single(terms[0])
    elif kind == "and":
        answers = index.intersection(*terms)
    else:
        answers = index.difference(*terms)
    return {
        "query": {"kind": kind, "terms": terms},
        "answers": answers,
        "class_matches": [sorted(match_classes(index.tax, t)) for t in terms],
    }
