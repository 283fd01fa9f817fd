"""Input category networks and auxiliary resources.

Two equivalent line formats are accepted for networks (see FORMATS.md):
a tab-separated form keyed by a one-letter record kind, and a JSON-lines
form with a ``type`` field.  Identifiers are display names compared by
exact string equality after whitespace trimming.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, Mapping

FORMATS = ("tsv", "jsonl")

_JSON_KINDS = {
    "category": "C",
    "entity": "E",
    "subcat": "S",
    "member": "M",
    "sentence": "F",
}


class NetworkFormatError(ValueError):
    """Raised for malformed or inconsistent input files."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class CategoryNetwork:
    categories: frozenset[str] = frozenset()
    entities: frozenset[str] = frozenset()
    subcat_edges: frozenset[tuple[str, str]] = frozenset()
    membership_edges: frozenset[tuple[str, str]] = frozenset()
    first_sentence: Mapping[str, str] = field(default_factory=dict)

    __hash__ = None  # type: ignore[assignment]

    @cached_property
    def _parents(self) -> dict[str, set[str]]:
        index: dict[str, set[str]] = defaultdict(set)
        for child, parent in self.subcat_edges:
            index[child].add(parent)
        return index

    @cached_property
    def _children(self) -> dict[str, set[str]]:
        index: dict[str, set[str]] = defaultdict(set)
        for child, parent in self.subcat_edges:
            index[parent].add(child)
        return index

    @cached_property
    def _members(self) -> dict[str, set[str]]:
        index: dict[str, set[str]] = defaultdict(set)
        for entity, category in self.membership_edges:
            index[category].add(entity)
        return index

    def require(self, cat: str) -> None:
        if cat not in self.categories:
            raise KeyError(f"unknown category: {cat!r}")

    def parents(self, cat: str) -> frozenset[str]:
        return frozenset(self._parents.get(cat, ()))

    def subcategories(self, cat: str) -> frozenset[str]:
        return frozenset(self._children.get(cat, ()))

    def members(self, cat: str) -> frozenset[str]:
        return frozenset(self._members.get(cat, ()))

    def restrict(self, keep: Iterable[str]) -> "CategoryNetwork":
        """Drop categories outside ``keep`` together with every incident edge.

        Entities are retained even if they lose all memberships.
        """
        kept = frozenset(keep) & self.categories
        return CategoryNetwork(
            categories=kept,
            entities=self.entities,
            subcat_edges=frozenset(
                (c, p) for c, p in self.subcat_edges if c in kept and p in kept
            ),
            membership_edges=frozenset(
                (e, c) for e, c in self.membership_edges if c in kept
            ),
            first_sentence={
                c: s for c, s in self.first_sentence.items() if c in kept
            },
        )

    def with_subcat_edges(self, edges: Iterable[tuple[str, str]]) -> "CategoryNetwork":
        edges = frozenset(edges)
        extra = edges - self.subcat_edges
        if extra:
            raise ValueError(f"edges not in network: {sorted(extra)[:5]}")
        return CategoryNetwork(
            self.categories,
            self.entities,
            edges,
            self.membership_edges,
            dict(self.first_sentence),
        )


@dataclass(frozen=True)
class StatsSummary:
    categories: int
    entities: int
    subcat_edges: int
    membership_edges: int
    roots: int
    leaves: int

    def as_dict(self) -> dict[str, int]:
        return {
            "categories": self.categories,
            "entities": self.entities,
            "subcat_edges": self.subcat_edges,
            "membership_edges": self.membership_edges,
            "roots": self.roots,
            "leaves": self.leaves,
        }


def _records_tsv(stream: IO[str]):
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = [p.strip() for p in line.split("\t")]
        kind, args = parts[0], parts[1:]
        yield lineno, kind, args


def _records_jsonl(stream: IO[str]):
    for lineno, raw in enumerate(stream, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise NetworkFormatError(f"invalid JSON ({exc.msg})", lineno) from None
        if not isinstance(obj, dict) or obj.get("type") not in _JSON_KINDS:
            raise NetworkFormatError("record needs a known 'type' field", lineno)
        kind = _JSON_KINDS[obj["type"]]
        keys = {
            "C": ("name",),
            "E": ("name",),
            "S": ("child", "parent"),
            "M": ("entity", "category"),
            "F": ("category", "text"),
        }[kind]
        missing = [k for k in keys if not isinstance(obj.get(k), str)]
        if missing:
            raise NetworkFormatError(f"missing string field(s) {missing}", lineno)
        yield lineno, kind, [obj[k].strip() for k in keys]


_ARITY = {"C": 1, "E": 1, "S": 2, "M": 2, "F": 2}


def parse_network(stream: IO[str], format: str = "tsv") -> CategoryNetwork:
    if format not in FORMATS:
        raise ValueError(f"unknown network format {format!r}; expected one of {FORMATS}")
    records = _records_tsv(stream) if format == "tsv" else _records_jsonl(stream)

    categories: set[str] = set()
    entities: set[str] = set()
    subcats: dict[tuple[str, str], int] = {}
    members: dict[tuple[str, str], int] = {}
    sentences: dict[str, tuple[int, str]] = {}

    for lineno, kind, args in records:
        if kind not in _ARITY:
            raise NetworkFormatError(f"unknown record kind {kind!r}", lineno)
        if len(args) != _ARITY[kind]:
            raise NetworkFormatError(
                f"record {kind} expects {_ARITY[kind]} field(s), got {len(args)}", lineno
            )
        if any(not a for a in args):
            raise NetworkFormatError("empty identifier", lineno)
        if kind == "C":
            categories.add(args[0])
        elif kind == "E":
            entities.add(args[0])
        elif kind == "S":
            child, parent = args
            if child == parent:
                raise NetworkFormatError(f"self-loop on {child!r}", lineno)
            subcats.setdefault((child, parent), lineno)
        elif kind == "M":
            members.setdefault((args[0], args[1]), lineno)
        else:
            sentences[args[0]] = (lineno, args[1])

    overlap = categories & entities
    if overlap:
        raise NetworkFormatError(
            f"identifiers declared as both category and entity: {sorted(overlap)}"
        )

    offenders = []
    for (child, parent), lineno in sorted(subcats.items(), key=lambda kv: kv[1]):
        for node in (child, parent):
            if node not in categories:
                offenders.append(f"line {lineno}: {node!r} is not a declared category")
    for (entity, cat), lineno in sorted(members.items(), key=lambda kv: kv[1]):
        if entity not in entities:
            offenders.append(f"line {lineno}: {entity!r} is not a declared entity")
        if cat not in categories:
            offenders.append(f"line {lineno}: {cat!r} is not a declared category")
    for cat, (lineno, _) in sorted(sentences.items(), key=lambda kv: kv[1][0]):
        if cat not in categories:
            offenders.append(f"line {lineno}: {cat!r} is not a declared category")
    if offenders:
        raise NetworkFormatError("undeclared node(s):\n  " + "\n  ".join(offenders))

    return CategoryNetwork(
        categories=frozenset(categories),
        entities=frozenset(entities),
        subcat_edges=frozenset(subcats),
        membership_edges=frozenset(members),
        first_sentence={c: s for c, (_, s) in sentences.items()},
    )


def serialize_network(net: CategoryNetwork, format: str = "tsv") -> str:
    """Canonical text form; ``parse_network`` inverts it."""
    rows: list[tuple[str, ...]] = []
    rows += [("C", c) for c in sorted(net.categories)]
    rows += [("E", e) for e in sorted(net.entities)]
    rows += [("S", c, p) for c, p in sorted(net.subcat_edges)]
    rows += [("M", e, c) for e, c in sorted(net.membership_edges)]
    rows += [("F", c, s) for c, s in sorted(net.first_sentence.items())]
    if format == "tsv":
        return "".join("\t".join(r) + "\n" for r in rows)
    if format == "jsonl":
        names = {v: k for k, v in _JSON_KINDS.items()}
        fields = {
            "C": ("name",),
            "E": ("name",),
            "S": ("child", "parent"),
            "M": ("entity", "category"),
            "F": ("category", "text"),
        }
        out = []
        for kind, *args in rows:
            obj = {"type": names[kind], **dict(zip(fields[kind], args))}
            out.append(json.dumps(obj, ensure_ascii=False) + "\n")
        return "".join(out)
    raise ValueError(f"unknown network format {format!r}")


def network_stats(net: CategoryNetwork) -> StatsSummary:
    has_parent = {c for c, _ in net.subcat_edges}
    has_child = {p for _, p in net.subcat_edges}
    return StatsSummary(
        categories=len(net.categories),
        entities=len(net.entities),
        subcat_edges=len(net.subcat_edges),
        membership_edges=len(net.membership_edges),
        roots=len(net.categories - has_parent),
        leaves=len(net.categories - has_child),
    )


# Relation lookup (instance-of / subclass-of assertions from an external KB)

RelationLookup = dict[str, frozenset[str]]


def parse_relation_lookup(stream: IO[str]) -> RelationLookup:
    lookup: dict[str, set[str]] = defaultdict(set)
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise NetworkFormatError("expected 'subject<TAB>class'", lineno)
        subject, cls = (p.strip() for p in parts)
        if not subject or not cls:
            raise NetworkFormatError("blank subject or class", lineno)
        lookup[subject].add(cls)
    return {k: frozenset(v) for k, v in lookup.items()}


# Label files

@dataclass(frozen=True)
class Labels:
    """Binary gold labels for categories and/or subcategory edges."""

    categories: Mapping[str, int] = field(default_factory=dict)
    edges: Mapping[tuple[str, str], int] = field(default_factory=dict)


def parse_labels(stream: IO[str], net: CategoryNetwork | None = None) -> Labels:
    """Read ``category<TAB>label`` and ``child<TAB>parent<TAB>label`` rows.

    Both row shapes may be mixed in one file.  With ``net`` given, every
    referenced category or edge must exist in it.
    """
    cats: dict[str, int] = {}
    edges: dict[tuple[str, str], int] = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = [p.strip() for p in line.split("\t")]
        if len(parts) not in (2, 3):
            raise NetworkFormatError("expected 2 or 3 tab-separated fields", lineno)
        if parts[-1] not in ("0", "1"):
            raise NetworkFormatError(f"label must be 0 or 1, got {parts[-1]!r}", lineno)
        label = int(parts[-1])
        if len(parts) == 2:
            if net is not None and parts[0] not in net.categories:
                raise NetworkFormatError(f"unknown category {parts[0]!r}", lineno)
            cats[parts[0]] = label
        else:
            edge = (parts[0], parts[1])
            if net is not None and edge not in net.subcat_edges:
                raise NetworkFormatError(f"unknown subcategory edge {edge!r}", lineno)
            edges[edge] = label
    return Labels(cats, edges)


def serialize_labels(labels: Labels) -> str:
    lines = [f"{c}\t{v}\n" for c, v in sorted(labels.categories.items())]
    lines += [f"{c}\t{p}\t{v}\n" for (c, p), v in sorted(labels.edges.items())]
    return "".join(lines)
