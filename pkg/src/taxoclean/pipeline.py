"""Feature assembly, the two cleaning stages and top-level construction."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from taxoclean import graph_features as gf
from taxoclean.classifier import FeatureRow, LogRegModel, predict_proba
from taxoclean.embeddings import EmbeddingTable, hypervec_score
from taxoclean.lexical import (
    COPULAS,
    NameParts,
    _data_text,
    decompose_name,
    default_meta_terms,
    head_lemma,
    is_meta_category,
    is_plural_head,
    leading_np_heads,
    sentence_tokens,
    singularize,
    starts_capitalized,
)
from taxoclean.network import CategoryNetwork, RelationLookup
from taxoclean.taxonomy import ORIGINAL, WORDNET, ClassNode, Taxonomy, TaxonomyError
from taxoclean.wordnet import (
    WordNetDb,
    context_vector,
    gloss_head_nouns,
    hypernym_chain,
    is_hypernym,
    link_synset,
    wu_palmer,
)

CATEGORY_FEATURES = (
    "meta",
    "plural_head",
    "capitalized",
    "instance_count",
    "supercat_count",
    "subcat_count",
    "average_depth",
    "connected_subgraph_size",
)

EDGE_FEATURES = (
    "head_subclass",
    "head_not_subclass",
    "only_plural_parent",
    "wn_hypernym",
    "wn_hypernym_present",
    "wikidata_hypernym",
    "wikidata_hypernym_present",
    "page_type_match",
    "page_type_match_present",
    "gloss_type_match",
    "gloss_type_match_present",
    "wu_palmer",
    "wu_palmer_present",
    "hypervec",
    "hypervec_present",
    "common_children_support",
    "children_depth_ratio",
)


# Syntactic edge rules

class HeadMatch(enum.Enum):
    SUBCLASS = "Subclass"
    NOT_SUBCLASS = "NotSubclass"
    UNKNOWN = "Unknown"


def _words(text: str) -> list[str]:
    return text.lower().split()


def headword_match(child: NameParts, parent: NameParts) -> HeadMatch:
    """Head-word rules for a candidate edge child -> parent."""
    h1, h2 = child.head.lower(), parent.head.lower()
    if h1 == h2:
        pre1, pre2 = set(_words(child.pre)), set(_words(parent.pre))
        pos1, pos2 = set(_words(child.pos)), set(_words(parent.pos))
        same_tail = _words(child.pos) == _words(parent.pos)
        same_front = _words(child.pre) == _words(parent.pre)
        if same_tail and pre2 <= pre1:
            return HeadMatch.SUBCLASS
        if same_front and pos2 <= pos1:
            return HeadMatch.SUBCLASS
        return HeadMatch.UNKNOWN
    if h2 in _words(child.pre) or h2 in _words(child.pos):
        return HeadMatch.NOT_SUBCLASS
    return HeadMatch.UNKNOWN


def only_plural_parent(net: CategoryNetwork, c1: str, c2: str) -> bool:
    if (c1, c2) not in net.subcat_edges:
        raise KeyError(f"not a subcategory edge: {c1!r} -> {c2!r}")
    return len(net.parents(c1)) == 1 and is_plural_head(c2)


def page_hypernyms(sentence: str) -> list[str]:
    """Singular heads of the noun phrase after the first copula."""
    tokens = sentence_tokens(sentence)
    for i, tok in enumerate(tokens):
        if tok in COPULAS and i > 0:
            return leading_np_heads(tokens[i + 1 :])
    return []


# Category features (stage 1)

def _meta_terms(meta_terms: Iterable[str] | None) -> tuple[str, ...]:
    return tuple(default_meta_terms() if meta_terms is None else meta_terms)


class CategoryFeaturizer:
    def __init__(self, net: CategoryNetwork, meta_terms: Iterable[str] | None = None):
        self.net = net
        self.meta_terms = _meta_terms(meta_terms)
        self.depths = gf.DepthTable(net)
        self.components = gf.component_sizes(net)

    def row(self, cat: str, label: int | None = None) -> FeatureRow:
        net = self.net
        net.require(cat)
        supers, subs = gf.degree_counts(net, cat)
        values = (
            float(is_meta_category(cat, self.meta_terms)),
            float(is_plural_head(cat)),
            float(starts_capitalized(cat)),
            float(gf.instance_count(net, cat)),
            float(supers),
            float(subs),
            self.depths[cat],
            float(self.components[cat]),
        )
        return FeatureRow(cat, CATEGORY_FEATURES, values, label)


def category_features(
    net: CategoryNetwork, cat: str, meta_terms: Iterable[str] | None = None
) -> FeatureRow:
    return CategoryFeaturizer(net, meta_terms).row(cat)


def clean_categories(
    net: CategoryNetwork,
    model: LogRegModel,
    threshold: float = 0.5,
    meta_terms: Iterable[str] | None = None,
) -> tuple[frozenset[str], CategoryNetwork, dict[str, float]]:
    """Keep categories scoring at least ``threshold``; removed ones lose all edges."""
    feats = CategoryFeaturizer(net, meta_terms)
    cats = sorted(net.categories)
    scores = {}
    if cats:
        probs = predict_proba(model, [feats.row(c).values for c in cats])
        scores = {c: float(p) for c, p in zip(cats, probs)}
    kept = frozenset(c for c in cats if scores[c] >= threshold)
    return kept, net.restrict(kept), scores


# Edge features (stage 2)

def category_context(net: CategoryNetwork, cat: str):
    """Bag of words from the first sentence and parent/child category names."""
    parts = [net.first_sentence.get(cat, "")]
    parts += sorted(net.parents(cat))
    parts += sorted(net.subcategories(cat))
    return context_vector(" ".join(parts))


def link_categories(
    net: CategoryNetwork,
    db: WordNetDb | None,
    corrections: Mapping[str, str | None] | None = None,
) -> dict[str, str | None]:
    links: dict[str, str | None] = {}
    corrections = corrections or {}
    for cat in sorted(net.categories):
        if cat in corrections:
            links[cat] = corrections[cat]
            continue
        if db is None:
            links[cat] = None
            continue
        found = link_synset(db, cat, category_context(net, cat))
        links[cat] = found[0] if found else None
    return links


@dataclass
class EdgeContext:
    network: CategoryNetwork
    wordnet: WordNetDb | None = None
    embeddings: EmbeddingTable | None = None
    relations: RelationLookup = field(default_factory=dict)
    synset_links: dict[str, str | None] = field(default_factory=dict)
    corrections: Mapping[str, str | None] = field(default_factory=dict)

    def __post_init__(self):
        if not self.synset_links:
            self.synset_links = link_categories(self.network, self.wordnet, self.corrections)
        extra = set(self.synset_links) - set(self.network.categories)
        if extra:
            raise ValueError(f"synset links for unknown categories: {sorted(extra)[:5]}")
        self.depths = gf.DepthTable(self.network)
        self._relations_folded = {k.casefold(): v for k, v in self.relations.items()}

    def relation_classes(self, cat: str) -> frozenset[str] | None:
        if cat in self.relations:
            return self.relations[cat]
        return self._relations_folded.get(cat.casefold())

    def link(self, cat: str) -> str | None:
        sid = self.synset_links.get(cat)
        if sid is None or self.wordnet is None or sid not in self.wordnet.synsets:
            return None
        return sid


def edge_features(ctx: EdgeContext, c1: str, c2: str, label: int | None = None) -> FeatureRow:
    net = ctx.network
    if (c1, c2) not in net.subcat_edges:
        raise KeyError(f"not a subcategory edge: {c1!r} -> {c2!r}")
    p1, p2 = decompose_name(c1), decompose_name(c2)
    verdict = headword_match(p1, p2)
    parent_head = head_lemma(c2)

    def heads_match(lemmas: Iterable[str]) -> bool:
        return any(singularize(w) == parent_head for w in lemmas)

    s1, s2 = ctx.link(c1), ctx.link(c2)
    both_linked = s1 is not None and s2 is not None
    db = ctx.wordnet

    wn_hyp = float(both_linked and is_hypernym(db, s1, s2))
    wp = wu_palmer(db, s1, s2) if both_linked else 0.0

    classes = ctx.relation_classes(c1)
    wikidata = float(classes is not None and any(head_lemma(k) == parent_head for k in classes))

    sentence = net.first_sentence.get(c1)
    page = float(sentence is not None and heads_match(page_hypernyms(sentence)))

    gloss = float(s1 is not None and heads_match(gloss_head_nouns(db, s1)))

    hv = hypervec_score(ctx.embeddings, c1, c2) if ctx.embeddings is not None else None

    values = (
        float(verdict is HeadMatch.SUBCLASS),
        float(verdict is HeadMatch.NOT_SUBCLASS),
        float(only_plural_parent(net, c1, c2)),
        wn_hyp,
        float(both_linked),
        wikidata,
        float(classes is not None),
        page,
        float(sentence is not None),
        gloss,
        float(s1 is not None),
        wp,
        float(both_linked),
        0.0 if hv is None else hv,
        float(hv is not None),
        float(gf.common_children_support(net, c1, c2)),
        gf.children_depth_ratio(net, c2, ctx.depths),
    )
    return FeatureRow(f"{c1}\t{c2}", EDGE_FEATURES, values, label)


def clean_edges(
    ctx: EdgeContext, model: LogRegModel, threshold: float = 0.5
) -> tuple[frozenset[tuple[str, str]], dict[tuple[str, str], float]]:
    edges = sorted(ctx.network.subcat_edges)
    scores: dict[tuple[str, str], float] = {}
    if edges:
        probs = predict_proba(model, [edge_features(ctx, c, p).values for c, p in edges])
        scores = {e: float(s) for e, s in zip(edges, probs)}
    kept = frozenset(e for e in edges if scores[e] >= threshold)
    return kept, scores


# Top-level construction (stage 3)

def load_blacklist(path: str | Path | None = None) -> frozenset[str]:
    text = _data_text("blacklist.txt") if path is None else Path(path).read_text("utf-8")
    ids = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            ids.append(line)
    return frozenset(ids)


def parse_corrections(text: str) -> dict[str, str | None]:
    out: dict[str, str | None] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split("\t")]
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ValueError(f"corrections line {lineno}: expected 'category<TAB>synset-id|none'")
        out[parts[0]] = None if parts[1].lower() == "none" else parts[1]
    return out


def taxonomy_from_network(
    net: CategoryNetwork,
    edges: Iterable[tuple[str, str]] | None = None,
    scores: Mapping[tuple[str, str], float] | None = None,
) -> Taxonomy:
    """Class DAG from kept categories and edges.

    Cycles are broken by dropping the lowest-scored edge of each cycle
    found (ties: lexicographically smallest edge).
    """
    scores = scores or {}
    edges = set(net.subcat_edges if edges is None else edges)
    tax = Taxonomy(
        classes={c: ClassNode(c, ORIGINAL) for c in net.categories},
        entities=set(net.entities),
        subclass_edges={e: scores.get(e) for e in sorted(edges)},
        instance_edges={(e, c): None for e, c in net.membership_edges},
    )
    while True:
        cycle = tax.find_cycle()
        if not cycle:
            break
        cyc_edges = list(zip(cycle, cycle[1:]))
        worst = min(cyc_edges, key=lambda e: (scores.get(e, float("inf")), e))
        del tax.subclass_edges[worst]
    return tax


def compress_chains(tax: Taxonomy) -> Taxonomy:
    """Splice out WordNet-derived classes with exactly one parent and one child.

    Original classes are never removed; entities only attach to original
    classes, so instance edges are untouched.
    """
    out = tax.copy()
    up: dict[str, set[str]] = {c: set() for c in out.classes}
    down: dict[str, set[str]] = {c: set() for c in out.classes}
    for c, p in out.subclass_edges:
        up[c].add(p)
        down[p].add(c)
    changed = True
    while changed:
        changed = False
        for name in sorted(out.classes):
            node = out.classes[name]
            if node.origin != WORDNET or len(up[name]) != 1 or len(down[name]) != 1:
                continue
            (parent,) = up[name]
            (child,) = down[name]
            del out.subclass_edges[(child, name)]
            del out.subclass_edges[(name, parent)]
            out.subclass_edges.setdefault((child, parent), None)
            up[child].discard(name)
            up[child].add(parent)
            down[parent].discard(name)
            down[parent].add(child)
            del up[name], down[name], out.classes[name]
            changed = True
    return out


def remove_blacklisted(tax: Taxonomy, blacklist: Iterable[str]) -> Taxonomy:
    """Delete WordNet-derived classes whose synset is blacklisted.

    Children of a removed class are attached to its parents, transitively
    through consecutive blacklisted classes.
    """
    black = set(blacklist)
    doomed = {
        n for n, node in tax.classes.items() if node.origin == WORDNET and node.synset in black
    }
    if not doomed:
        return tax.copy()
    up: dict[str, set[str]] = {}
    for c, p in tax.subclass_edges:
        up.setdefault(c, set()).add(p)

    def surviving(node: str, seen: set[str]) -> set[str]:
        result = set()
        for p in up.get(node, ()):
            if p in seen:
                continue
            seen.add(p)
            if p in doomed:
                result |= surviving(p, seen)
            else:
                result.add(p)
        return result

    out = Taxonomy(
        classes={n: c for n, c in tax.classes.items() if n not in doomed},
        entities=set(tax.entities),
        subclass_edges={},
        instance_edges=dict(tax.instance_edges),
    )
    for (c, p), s in sorted(tax.subclass_edges.items()):
        if c in doomed:
            continue
        if p not in doomed:
            out.subclass_edges[(c, p)] = s
        else:
            for q in sorted(surviving(p, {p})):
                out.subclass_edges.setdefault((c, q), None)
    return out


def _wn_name(db: WordNetDb, sid: str, taken: set[str]) -> str:
    base = "wn_" + db.synsets[sid].lemmas[0]
    name, n = base, 2
    while name in taken:
        name = f"{base}_{n}"
        n += 1
    return name


@dataclass
class TopLevelReport:
    linked: dict[str, str] = field(default_factory=dict)
    skipped: list[str] = field(default_factory=list)
    wordnet_nodes_added: int = 0


def insert_hypernyms(
    tax: Taxonomy,
    db: WordNetDb,
    links: Mapping[str, str | None],
    corrected: Iterable[str] = (),
    report: TopLevelReport | None = None,
) -> Taxonomy:
    """Add each linked class's WordNet hypernym chain as superclasses.

    A synset linked by an original class is represented by that class
    (the lexicographically first one if several share it), which is how
    two previously unrelated classes become connected.
    """
    report = report if report is not None else TopLevelReport()
    corrected = set(corrected)
    out = tax.copy()
    rep: dict[str, str] = {}
    for cls in sorted(links):
        sid = links[cls]
        if sid is not None and cls in out.classes and sid in db.synsets:
            rep.setdefault(sid, cls)
    by_synset = {n.synset: name for name, n in out.classes.items() if n.origin == WORDNET}

    up: dict[str, set[str]] = {c: set() for c in out.classes}
    for c, p in out.subclass_edges:
        up[c].add(p)

    def reaches(start: str, goal: str) -> list[str] | None:
        """Upward path start -> ... -> goal, if any."""
        prev = {start: None}
        todo = [start]
        while todo:
            n = todo.pop()
            if n == goal:
                path = [n]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                return path[::-1]
            for p in up.get(n, ()):
                if p not in prev:
                    prev[p] = n
                    todo.append(p)
        return None

    def node_for(sid: str) -> str:
        if sid in rep:
            return rep[sid]
        if sid not in by_synset:
            name = _wn_name(db, sid, set(out.classes) | set(out.entities))
            out.classes[name] = ClassNode(name, WORDNET, sid)
            up[name] = set()
            by_synset[sid] = name
            report.wordnet_nodes_added += 1
        return by_synset[sid]

    for cls in sorted(links):
        sid = links[cls]
        if sid is None or cls not in out.classes:
            continue
        if sid not in db.synsets:
            raise TaxonomyError(f"class {cls!r} linked to unknown synset {sid!r}")
        report.linked[cls] = sid
        chain = [node_for(s) for s in hypernym_chain(db, sid)]
        steps = list(zip([cls] + chain, chain))
        for child, parent in steps:
            if child == parent or parent in up[child]:
                continue
            back = reaches(parent, child)
            if back is not None:
                cycle = [child] + back
                if cls in corrected:
                    raise TaxonomyError(
                        f"correction for {cls!r} introduces a cycle: " + " -> ".join(cycle)
                    )
                report.skipped.append(f"{cls}: {' -> '.join(cycle)}")
                break
            out.subclass_edges[(child, parent)] = None
            up[child].add(parent)
    # drop WordNet nodes left without any child after skipped chains
    while True:
        has_child = {p for _, p in out.subclass_edges}
        orphans = [
            n for n, c in out.classes.items() if c.origin == WORDNET and n not in has_child
        ]
        if not orphans:
            break
        for n in orphans:
            del out.classes[n]
        out.subclass_edges = {
            e: s for e, s in out.subclass_edges.items() if e[0] not in orphans and e[1] not in orphans
        }
    return out


def build_top_level(
    tax: Taxonomy,
    db: WordNetDb,
    links: Mapping[str, str | None],
    blacklist: Iterable[str] = (),
    corrections: Mapping[str, str | None] | None = None,
    report: TopLevelReport | None = None,
) -> Taxonomy:
    """Insert WordNet hypernym chains, compress them, then drop blacklisted synsets."""
    corrections = dict(corrections or {})
    merged = {c: links.get(c) for c in tax.classes if tax.classes[c].origin == ORIGINAL}
    for cls, sid in corrections.items():
        if cls in merged:
            merged[cls] = sid
    out = insert_hypernyms(tax, db, merged, corrected=corrections, report=report)
    out = compress_chains(out)
    out = remove_blacklisted(out, blacklist)
    out = compress_chains(out)
    out.validate()
    return out


def default_blacklist() -> frozenset[str]:
    return load_blacklist(None)

