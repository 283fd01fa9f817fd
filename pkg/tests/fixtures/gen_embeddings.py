"""Regenerate synthetic_embeddings.txt (seeded, topic-clustered vectors).

Words sharing a topic get nearby directions; broader words get larger norms.
"""

from pathlib import Path

import numpy as np

from taxoclean.embeddings import EmbeddingTable, write_embeddings

DIM = 12
TOPICS = {
    "people": ["charact", "race", "men", "man", "elv", "elf", "hobbit", "maiar", "wizard",
               "servant", "agent", "lord", "numenorean", "person", "human", "dwarf"],
    "creature": ["creatur", "anim", "bird", "spider", "monster", "werewolv", "werewolf",
                 "dragon", "fire-drak", "drake", "eagl", "wolf", "serpent"],
    "place": ["locat", "realm", "fortress", "gondor", "middle-earth", "citi", "kingdom", "mountain"],
    "event": ["event", "battl", "death", "song", "music", "war", "age"],
    "meta": ["doc", "mainten", "page", "blog", "templat", "wiki"],
}
GENERAL = {"charact": 3.0, "creatur": 3.0, "locat": 3.0, "event": 3.0, "race": 2.0,
           "anim": 2.0, "monster": 2.0, "middle-earth": 3.5, "realm": 2.0, "servant": 1.5}


def build(seed: int = 7) -> EmbeddingTable:
    rng = np.random.default_rng(seed)
    centers = {t: rng.normal(size=DIM) for t in TOPICS}
    centers["creature"] = 0.6 * centers["creature"] + 0.4 * centers["people"]
    vectors = {}
    for topic, words in TOPICS.items():
        for w in words:
            v = centers[topic] + 0.35 * rng.normal(size=DIM)
            v = v / np.linalg.norm(v) * GENERAL.get(w, 1.0)
            vectors[w] = np.round(v, 6)
    return EmbeddingTable(DIM, vectors)


if __name__ == "__main__":
    out = Path(__file__).with_name("synthetic_embeddings.txt")
    out.write_text(write_embeddings(build()), encoding="utf-8")
