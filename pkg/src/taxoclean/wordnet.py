"""Noun WordNet: loading, sense linking, hypernymy and Wu-Palmer similarity.

Two on-disk layouts are understood:

* the WordNet 3.x flat files ``data.noun`` and ``index.noun`` in a directory;
* a compact TSV, one synset per line:
  ``id<TAB>rank<TAB>lemma,lemma<TAB>hypernym,hypernym<TAB>gloss``.

A virtual root sits above every parentless synset so that depths and least
common subsumers are defined for every pair.  Depth is the shortest
hypernym distance to that root, so a parentless synset has depth 1.
"""

from __future__ import annotations

import math
import re
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping

from taxoclean.lexical import (
    _data_text,
    decompose_name,
    leading_np_heads,
    read_term_list,
    sentence_tokens,
    singularize,
)

ROOT = "<root>"


class WordNetError(ValueError):
    pass


@dataclass(frozen=True)
class Synset:
    id: str
    lemmas: tuple[str, ...]
    gloss: str
    rank: int
    hypernyms: tuple[str, ...]


@dataclass(frozen=True)
class WordNetDb:
    synsets: Mapping[str, Synset]
    lemma_index: Mapping[str, tuple[str, ...]]
    root: str = ROOT
    _depth: dict[str, int] = field(default_factory=dict, compare=False, repr=False)
    _ancestors: dict[str, frozenset[str]] = field(
        default_factory=dict, compare=False, repr=False
    )

    __hash__ = None  # type: ignore[assignment]

    def __post_init__(self):
        self._validate()
        self._depth.update(self._compute_depths())

    def __len__(self) -> int:
        return len(self.synsets)

    def _validate(self) -> None:
        for s in self.synsets.values():
            if s.rank < 1:
                raise WordNetError(f"synset {s.id}: rank must be >= 1")
            for h in s.hypernyms:
                if h not in self.synsets:
                    raise WordNetError(f"synset {s.id}: unresolvable hypernym {h!r}")
        cycle = _find_cycle(self.synsets)
        if cycle:
            raise WordNetError("cyclic hypernymy: " + " -> ".join(cycle))

    def _compute_depths(self) -> dict[str, int]:
        children: dict[str, list[str]] = {}
        tops = []
        for s in self.synsets.values():
            if not s.hypernyms:
                tops.append(s.id)
            for h in s.hypernyms:
                children.setdefault(h, []).append(s.id)
        depth = {self.root: 0}
        queue = deque()
        for t in sorted(tops):
            depth[t] = 1
            queue.append(t)
        while queue:
            node = queue.popleft()
            for child in children.get(node, ()):
                if child not in depth:
                    depth[child] = depth[node] + 1
                    queue.append(child)
        return depth

    def require(self, sid: str) -> None:
        if sid != self.root and sid not in self.synsets:
            raise KeyError(f"unknown synset: {sid!r}")

    def lookup(self, lemma: str) -> tuple[str, ...]:
        """Synset ids for a lemma, most frequent sense first."""
        return self.lemma_index.get(lemma, ())

    def parents(self, sid: str) -> tuple[str, ...]:
        if sid == self.root:
            return ()
        hyps = self.synsets[sid].hypernyms
        return hyps if hyps else (self.root,)

    def depth(self, sid: str) -> int:
        self.require(sid)
        return self._depth[sid]

    def ancestors(self, sid: str) -> frozenset[str]:
        """Proper ancestors, virtual root included."""
        self.require(sid)
        cached = self._ancestors.get(sid)
        if cached is not None:
            return cached
        seen: set[str] = set()
        todo = list(self.parents(sid))
        while todo:
            node = todo.pop()
            if node in seen:
                continue
            seen.add(node)
            todo.extend(self.parents(node))
        result = frozenset(seen)
        self._ancestors[sid] = result
        return result


def _find_cycle(synsets: Mapping[str, Synset]) -> list[str] | None:
    color: dict[str, int] = {}
    for start in sorted(synsets):
        if start in color:
            continue
        path = [start]
        color[start] = 1
        stack = [iter(synsets[start].hypernyms)]
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
                stack.append(iter(synsets[nxt].hypernyms))
    return None


def _build(synsets: Iterable[Synset]) -> WordNetDb:
    by_id: dict[str, Synset] = {}
    for s in synsets:
        if s.id in by_id:
            raise WordNetError(f"duplicate synset id {s.id!r}")
        by_id[s.id] = s
    senses: dict[str, list[tuple[int, str]]] = {}
    for s in by_id.values():
        for lemma in s.lemmas:
            senses.setdefault(lemma, []).append((s.rank, s.id))
    index = {lemma: tuple(sid for _, sid in sorted(v)) for lemma, v in senses.items()}
    return WordNetDb(by_id, index)


def parse_wordnet_tsv(text: str, source: str = "<tsv>") -> WordNetDb:
    synsets = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise WordNetError(f"{source}:{lineno}: expected 5 tab-separated fields")
        sid, rank, lemmas, hyps, gloss = parts
        try:
            rank_i = int(rank)
        except ValueError:
            raise WordNetError(f"{source}:{lineno}: rank must be an integer") from None
        synsets.append(
            Synset(
                id=sid.strip(),
                lemmas=tuple(l.strip().lower() for l in lemmas.split(",") if l.strip()),
                gloss=gloss.strip(),
                rank=rank_i,
                hypernyms=tuple(h.strip() for h in hyps.split(",") if h.strip()),
            )
        )
    return _build(synsets)


def write_wordnet_tsv(db: WordNetDb) -> str:
    rows = []
    for sid in sorted(db.synsets):
        s = db.synsets[sid]
        rows.append(
            f"{s.id}\t{s.rank}\t{','.join(s.lemmas)}\t{','.join(s.hypernyms)}\t{s.gloss}\n"
        )
    return "".join(rows)


def _sense_key(lemma: str, lex_filenum: str, lex_id: str) -> str:
    return f"{lemma.lower()}%1:{int(lex_filenum):02d}:{int(lex_id, 16):02d}::"


def parse_wordnet_flat(data_noun: str, index_noun: str) -> WordNetDb:
    """Parse ``data.noun`` / ``index.noun`` contents; ids become sense keys."""
    offset_to_key: dict[str, str] = {}
    raw = []
    for line in data_noun.splitlines():
        if not line or line.startswith("  "):
            continue
        body, _, gloss = line.partition(" | ")
        tok = body.split()
        offset, lex_filenum, w_cnt = tok[0], tok[1], int(tok[3], 16)
        words = [(tok[4 + 2 * i], tok[5 + 2 * i]) for i in range(w_cnt)]
        p_at = 4 + 2 * w_cnt
        p_cnt = int(tok[p_at])
        hyps = []
        for i in range(p_cnt):
            symbol, target, pos = tok[p_at + 1 + 4 * i : p_at + 4 + 4 * i]
            if symbol in ("@", "@i") and pos == "n":
                hyps.append(target)
        lemma0, lex_id0 = words[0]
        offset_to_key[offset] = _sense_key(lemma0, lex_filenum, lex_id0)
        raw.append((offset, [w.lower() for w, _ in words], hyps, gloss.strip()))

    ranks: dict[tuple[str, str], int] = {}
    for line in index_noun.splitlines():
        if not line or line.startswith("  "):
            continue
        tok = line.split()
        lemma, synset_cnt, p_cnt = tok[0].lower(), int(tok[2]), int(tok[3])
        offsets = tok[4 + p_cnt + 2 :][:synset_cnt]
        for r, off in enumerate(offsets, start=1):
            ranks[(lemma, off)] = r

    synsets = []
    for offset, lemmas, hyps, gloss in raw:
        missing = [h for h in hyps if h not in offset_to_key]
        if missing:
            raise WordNetError(
                f"synset {offset_to_key[offset]}: unresolvable hypernym offset(s) {missing}"
            )
        synsets.append(
            Synset(
                id=offset_to_key[offset],
                lemmas=tuple(lemmas),
                gloss=gloss,
                rank=ranks.get((lemmas[0], offset), 1),
                hypernyms=tuple(offset_to_key[h] for h in hyps),
            )
        )
    db = _build(synsets)
    # Order each lemma's senses by the index file rather than by first-lemma rank.
    index = {}
    key_to_off = {v: k for k, v in offset_to_key.items()}
    for lemma, ids in db.lemma_index.items():
        index[lemma] = tuple(
            sorted(ids, key=lambda sid: (ranks.get((lemma, key_to_off[sid]), 10**6), sid))
        )
    return WordNetDb(db.synsets, index)


def load_wordnet(path: str | Path) -> WordNetDb:
    """Load a directory with data.noun/index.noun, or a compact TSV file."""
    path = Path(path)
    if path.is_dir():
        data, index = path / "data.noun", path / "index.noun"
        if data.exists() and index.exists():
            return parse_wordnet_flat(
                data.read_text("utf-8", errors="replace"),
                index.read_text("utf-8", errors="replace"),
            )
        tsvs = sorted(path.glob("*.tsv"))
        if len(tsvs) == 1:
            path = tsvs[0]
        else:
            raise WordNetError(f"{path}: no data.noun/index.noun or single TSV file")
    return parse_wordnet_tsv(path.read_text("utf-8"), str(path))


# Context vectors and sense linking

@lru_cache(maxsize=None)
def stopwords() -> frozenset[str]:
    return frozenset(read_term_list(_data_text("stopwords.txt")))


_WORD = re.compile(r"[^\W\d_]+", re.UNICODE)


def context_vector(text: str | Iterable[str]) -> Counter:
    """Lowercased bag of words without stopwords."""
    if not isinstance(text, str):
        text = " ".join(text)
    stop = stopwords()
    return Counter(w for w in _WORD.findall(text.lower()) if w not in stop)


def cosine(a: Mapping[str, int], b: Mapping[str, int]) -> float:
    if not a or not b:
        return 0.0
    if len(a) > len(b):
        a, b = b, a
    dot = sum(v * b.get(k, 0) for k, v in a.items())
    if dot == 0:
        return 0.0
    na = math.sqrt(sum(v * v for v in a.values()))
    nb = math.sqrt(sum(v * v for v in b.values()))
    return dot / (na * nb)


def _lemma_keys(phrase: str) -> list[str]:
    """Lemma spellings tried for a phrase: as written and with singular head."""
    parts = decompose_name(phrase)
    plain = "_".join(phrase.lower().split())
    singular = "_".join(
        [*parts.pre.lower().split(), singularize(parts.head), *parts.pos.lower().split()]
    )
    return list(dict.fromkeys([plain, singular]))


def candidate_synsets(db: WordNetDb, name: str) -> tuple[str, list[tuple[str, int]]]:
    """Back-off candidate retrieval: full name, then pre+head, then head.

    Returns the level that produced candidates (``"full"``, ``"pre+head"``,
    ``"head"`` or ``"none"``) and ``(synset id, rank)`` pairs, where rank is
    the sense position under the matched lemma.
    """
    parts = decompose_name(name)
    levels = [
        ("full", parts.text()),
        ("pre+head", " ".join(p for p in (parts.pre, parts.head) if p)),
        ("head", parts.head),
    ]
    for level, phrase in levels:
        found: dict[str, int] = {}
        for key in _lemma_keys(phrase):
            for r, sid in enumerate(db.lookup(key), start=1):
                found[sid] = min(r, found.get(sid, r))
        if found:
            return level, list(found.items())
    return "none", []


def link_synset(
    db: WordNetDb, name: str, context: Mapping[str, int]
) -> tuple[str, float] | None:
    """Most similar sense by cosine(gloss, context) + 1/(2 * rank)."""
    _, candidates = candidate_synsets(db, name)
    best = None
    for sid, rank in candidates:
        score = cosine(context_vector(db.synsets[sid].gloss), context) + 1.0 / (2 * rank)
        key = (-score, rank, sid)
        if best is None or key < best[0]:
            best = (key, sid, score)
    if best is None:
        return None
    return best[1], best[2]


# Hierarchy queries

def is_hypernym(db: WordNetDb, s1: str, s2: str) -> bool:
    """True iff ``s2`` is a proper ancestor of ``s1``."""
    db.require(s2)
    return s2 in db.ancestors(s1)


def lcs(db: WordNetDb, s1: str, s2: str) -> str:
    common = (db.ancestors(s1) | {s1}) & (db.ancestors(s2) | {s2})
    return min(common, key=lambda s: (-db.depth(s), s))


def wu_palmer(db: WordNetDb, s1: str, s2: str) -> float:
    d1, d2 = db.depth(s1), db.depth(s2)
    dl = db.depth(lcs(db, s1, s2))
    return (2 * dl + 1) / (d1 + d2 + 1)


def hypernym_chain(db: WordNetDb, sid: str) -> list[str]:
    """A shortest root-ward chain of hypernyms, virtual root excluded.

    At branch points the lexicographically smallest parent among those on
    a shortest path is taken.
    """
    db.require(sid)
    chain = []
    node = sid
    while node != db.root:
        parents = db.parents(node)
        node = min(parents, key=lambda p: (db.depth(p), p))
        if node != db.root:
            chain.append(node)
    return chain


def gloss_head_nouns(db: WordNetDb, sid: str) -> list[str]:
    db.require(sid)
    if sid == db.root:
        return []
    return leading_np_heads(sentence_tokens(db.synsets[sid].gloss))
