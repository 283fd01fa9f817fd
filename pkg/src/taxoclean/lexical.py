"""Name-level analysis of category strings.

A category name is split around its head noun into ``pre``, ``head`` and
``pos`` parts with a deterministic particle rule instead of a parser: the
head is the token right before the first particle (``of``, ``in``, ...),
or the last token when the name has no particle.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable

PARTICLES = frozenset({"of", "in", "from", "by", "for", "to", "with", "and"})

# Words ending in -s that are singular.
SINGULAR_S = frozenset(
    """bus gas lens atlas iris status chaos cosmos bias canvas news physics
    mathematics ethics thesis crisis basis analysis kudos pathos ethos
    octopus virus campus census bonus corpus genus""".split()
)

# Irregular plurals that also end compounds (werewolves, horsemen, catfish).
COMPOUNDABLE = frozenset(
    """men women children people mice geese teeth feet elves dwarves wolves
    knives wives leaves thieves fish deer folk""".split()
)

# Singular words that end in a compoundable plural.
_NOT_COMPOUNDS = frozenset(
    """omen amen yemen specimen abdomen stamen regimen acumen hymen lumen
    semen numen""".split()
)

_TOKEN = re.compile(r"\w+", re.UNICODE)


@dataclass(frozen=True)
class NameParts:
    pre: str
    head: str
    pos: str

    def tokens(self) -> list[str]:
        return [p for p in (self.pre, self.head, self.pos) if p]

    def text(self) -> str:
        return " ".join(self.tokens())


def decompose_name(name: str) -> NameParts:
    tokens = name.split()
    if not tokens:
        raise ValueError("empty category name")
    split = len(tokens)
    for i, tok in enumerate(tokens[1:], start=1):
        if tok.lower() in PARTICLES:
            split = i
            break
    head_idx = split - 1
    return NameParts(
        pre=" ".join(tokens[:head_idx]),
        head=tokens[head_idx],
        pos=" ".join(tokens[split:]),
    )


def _data_text(name: str) -> str:
    return resources.files("taxoclean").joinpath("data").joinpath(name).read_text("utf-8")


def read_term_list(text: str) -> list[str]:
    """One term per line, ``#`` starts a comment."""
    terms = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            terms.append(line)
    return terms


@lru_cache(maxsize=None)
def default_meta_terms() -> tuple[str, ...]:
    return tuple(read_term_list(_data_text("meta_terms.txt")))


def load_meta_terms(path: str | Path) -> list[str]:
    terms = read_term_list(Path(path).read_text("utf-8"))
    if not terms:
        raise ValueError(f"{path}: no meta terms")
    return terms


@lru_cache(maxsize=None)
def irregular_plurals() -> dict[str, str]:
    table = {}
    for line in _data_text("irregular_plurals.tsv").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        plural, singular = line.split("\t")
        table[plural] = singular
    return table


def _irregular_match(word: str) -> tuple[str, str] | None:
    """Longest irregular plural that ``word`` equals or ends with.

    Suffix matches (``werewolves`` on ``wolves``) only use the
    compoundable forms.
    """
    table = irregular_plurals()
    if word in table:
        return word, table[word]
    if word in _NOT_COMPOUNDS:
        return None
    for cut in range(1, len(word) - 2):
        tail = word[cut:]
        if tail in COMPOUNDABLE and tail in table:
            return tail, table[tail]
    return None


_ALPHA_RUN = re.compile(r"[^\W\d_]+", re.UNICODE)


def _last_run(word: str) -> re.Match | None:
    """Last alphabetic run, so ``Fire-drakes`` is judged on ``drakes``."""
    runs = list(_ALPHA_RUN.finditer(word.lower()))
    return runs[-1] if runs else None


def is_plural_word(word: str) -> bool:
    m = _last_run(word)
    if m is None:
        return False
    w = m.group()
    if w in SINGULAR_S or w in _NOT_COMPOUNDS:
        return False
    if _irregular_match(w):
        return True
    if len(w) <= 3:
        return False
    if w.endswith("ies"):
        return True
    if w.endswith("s") and not w.endswith(("ss", "us", "is")):
        return True
    return False


def singularize(word: str) -> str:
    """Lowercase singular form of ``word``; non-plurals are only lowercased."""
    lowered = word.lower()
    if not is_plural_word(lowered):
        return lowered
    m = _last_run(lowered)
    w = m.group()
    match = _irregular_match(w)
    if match:
        tail, singular = match
        w = w[: len(w) - len(tail)] + singular
    elif w.endswith("ies") and len(w) > 4:
        w = w[:-3] + "y"
    elif w.endswith(("sses", "shes", "ches", "xes", "zzes")):
        w = w[:-2]
    else:
        w = w[:-1]
    return lowered[: m.start()] + w + lowered[m.end():]


def head_lemma(name: str) -> str:
    return singularize(decompose_name(name).head)


def is_plural_head(name: str) -> bool:
    return is_plural_word(decompose_name(name).head)


def name_tokens(name: str) -> list[str]:
    return _TOKEN.findall(name.lower())


def is_meta_category(name: str, meta_terms: Iterable[str] | None = None) -> bool:
    terms = set(default_meta_terms() if meta_terms is None else (t.lower() for t in meta_terms))
    if not terms:
        raise ValueError("meta_terms must be non-empty")
    return any(tok in terms for tok in name_tokens(name))


def starts_capitalized(name: str) -> bool:
    return bool(name) and name[0].isupper()


# Leading noun-phrase heads, used for first sentences and synset glosses.

DETERMINERS = frozenset(
    """a an the any some one another each every this that these those its
    his her their our my your""".split()
)
COORDINATORS = frozenset({"and", "or", ","})
COPULAS = frozenset({"is", "are", "was", "were"})
# Words that end a noun phrase: prepositions, relative words, post-modifiers.
NP_BOUNDARIES = frozenset(
    """of in from by for to with at on into onto upon about as like near
    under over between among against during after before within without
    who whom whose which that where when while whereas although though
    is are was were be been being has have had having can could may might
    will would shall should must usually often typically especially mostly
    sometimes always never able capable known used found said called named
    being than but not ; : . ( ) "" ' """.split()
)

_SENT_TOKEN = re.compile(r"[^\W_]+(?:[-'][^\W_]+)*|[,;:.()]", re.UNICODE)


def sentence_tokens(text: str) -> list[str]:
    return [t.lower() for t in _SENT_TOKEN.findall(text)]


def leading_np_heads(tokens: list[str]) -> list[str]:
    """Singular heads of the leading, possibly coordinated, noun phrases.

    ``["a", "sword", "or", "dagger", "of", ...]`` gives ``["sword", "dagger"]``.
    A phrase ends at a boundary word; ``and``, ``or`` and commas start the
    next coordinated phrase, any other boundary stops extraction.
    """
    heads: list[str] = []
    i, n = 0, len(tokens)
    while i < n:
        while i < n and tokens[i] in DETERMINERS:
            i += 1
        phrase = []
        while i < n and tokens[i] not in NP_BOUNDARIES and tokens[i] not in COORDINATORS:
            phrase.append(tokens[i])
            i += 1
        if phrase:
            heads.append(singularize(phrase[-1]))
        if i < n and tokens[i] in COORDINATORS:
            i += 1
            continue
        break
    seen: set[str] = set()
    return [h for h in heads if not (h in seen or seen.add(h))]
