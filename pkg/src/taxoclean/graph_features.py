"""Structural features of categories in a raw category network."""

from __future__ import annotations

import random
from collections import deque

from taxoclean.network import CategoryNetwork

MAX_PATHS = 10_000
WALK_SAMPLES = 10_000
WALK_SEED = 0


def instance_count(net: CategoryNetwork, cat: str) -> int:
    net.require(cat)
    return len(net.members(cat))


def degree_counts(net: CategoryNetwork, cat: str) -> tuple[int, int]:
    """(number of supercategories, number of subcategories)."""
    net.require(cat)
    return len(net.parents(cat)), len(net.subcategories(cat))


def _cyclic_nodes(net: CategoryNetwork) -> set[str]:
    """Categories lying on a directed cycle (Tarjan SCCs of size > 1)."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    cyclic: set[str] = set()
    counter = 0

    for start in sorted(net.categories):
        if start in index:
            continue
        work = [(start, iter(sorted(net.parents(start))))]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(sorted(net.parents(nxt)))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                if len(component) > 1:
                    cyclic.update(component)
    return cyclic


def _ancestors(net: CategoryNetwork, cat: str) -> set[str]:
    seen = {cat}
    todo = [cat]
    while todo:
        for p in net.parents(todo.pop()):
            if p not in seen:
                seen.add(p)
                todo.append(p)
    return seen


class DepthTable:
    """Average upward path length for every category of a network.

    A path runs upward from a category without revisiting nodes and ends
    at a root, or where every parent is already on the path.  Where the
    ancestry is acyclic the mean is computed exactly by dynamic
    programming; cyclic ancestries are enumerated up to ``MAX_PATHS``
    paths and otherwise estimated with seeded random upward walks.
    """

    def __init__(self, net: CategoryNetwork):
        self.net = net
        self._cyclic = _cyclic_nodes(net)
        self._dag_memo: dict[str, tuple[int, int]] = {}
        self._cache: dict[str, float] = {}

    def __getitem__(self, cat: str) -> float:
        self.net.require(cat)
        if cat not in self._cache:
            self._cache[cat] = self._compute(cat)
        return self._cache[cat]

    def as_dict(self) -> dict[str, float]:
        return {c: self[c] for c in sorted(self.net.categories)}

    def _compute(self, cat: str) -> float:
        if not self.net.parents(cat):
            return 0.0
        if not (_ancestors(self.net, cat) & self._cyclic):
            n, total = self._dag_counts(cat)
            return total / n
        return self._enumerate(cat)

    def _dag_counts(self, cat: str) -> tuple[int, int]:
        """(number of root paths, summed path length) over an acyclic ancestry."""
        order = []
        stack = [(cat, False)]
        while stack:
            node, done = stack.pop()
            if node in self._dag_memo:
                continue
            if done:
                order.append(node)
                n = total = 0
                parents = self.net.parents(node)
                if not parents:
                    n, total = 1, 0
                for p in parents:
                    pn, pt = self._dag_memo[p]
                    n += pn
                    total += pt + pn
                self._dag_memo[node] = (n, total)
                continue
            stack.append((node, True))
            for p in self.net.parents(node):
                if p not in self._dag_memo:
                    stack.append((p, False))
        return self._dag_memo[cat]

    def _enumerate(self, cat: str) -> float:
        count = 0
        total = 0
        path = {cat}
        stack = [(cat, 0, iter(sorted(self.net.parents(cat))), False)]
        while stack:
            node, depth, it, extended = stack[-1]
            nxt = next((p for p in it if p not in path), None)
            if nxt is None:
                stack.pop()
                path.discard(node)
                if not extended:
                    count += 1
                    total += depth
                    if count > MAX_PATHS:
                        return self._random_walk(cat)
                continue
            stack[-1] = (node, depth, it, True)
            path.add(nxt)
            stack.append((nxt, depth + 1, iter(sorted(self.net.parents(nxt))), False))
        return total / count

    def _random_walk(self, cat: str) -> float:
        rng = random.Random(WALK_SEED)
        total = 0
        for _ in range(WALK_SAMPLES):
            node, seen, length = cat, {cat}, 0
            while True:
                options = sorted(p for p in self.net.parents(node) if p not in seen)
                if not options:
                    break
                node = rng.choice(options)
                seen.add(node)
                length += 1
            total += length
        return total / WALK_SAMPLES


def average_upward_depth(net: CategoryNetwork, cat: str) -> float:
    return DepthTable(net)[cat]


def component_sizes(net: CategoryNetwork) -> dict[str, int]:
    """Category -> size of its weakly connected component in the subcat graph."""
    sizes: dict[str, int] = {}
    for start in sorted(net.categories):
        if start in sizes:
            continue
        component = {start}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for nb in net.parents(node) | net.subcategories(node):
                if nb not in component:
                    component.add(nb)
                    queue.append(nb)
        for node in component:
            sizes[node] = len(component)
    return sizes


def connected_subgraph_size(net: CategoryNetwork, cat: str) -> int:
    net.require(cat)
    return component_sizes(net)[cat]


def common_children_support(net: CategoryNetwork, c1: str, c2: str) -> int:
    net.require(c1)
    net.require(c2)
    kids1 = net.subcategories(c1) | net.members(c1)
    kids2 = net.subcategories(c2) | net.members(c2)
    return len(kids1 & kids2)


def children_depth_ratio(
    net: CategoryNetwork, parent: str, depths: DepthTable | None = None
) -> float:
    """Subcategory count over (average depth + 1); the +1 keeps roots defined."""
    net.require(parent)
    depth = (depths or DepthTable(net))[parent]
    return len(net.subcategories(parent)) / (depth + 1.0)
