"""Small deterministic containers shared by the simulation modules."""

from __future__ import annotations

import random


class IndexedSet:
    """Set with O(1) membership, swap-removal, and uniform sampling.

    Iteration and sampling order are fully determined by the operation
    sequence, which keeps seeded runs reproducible (plain ``set`` iteration
    order is an implementation detail we must not sample from).
    """

    __slots__ = ("_items", "_pos")

    def __init__(self, items=()) -> None:
        self._items: list = []
        self._pos: dict = {}
        for x in items:
            self.add(x)

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, x) -> bool:
        return x in self._pos

    def __iter__(self):
        return iter(self._items)

    def add(self, x) -> None:
        if x not in self._pos:
            self._pos[x] = len(self._items)
            self._items.append(x)

    def discard(self, x) -> None:
        pos = self._pos.pop(x, None)
        if pos is None:
            return
        last = self._items.pop()
        if last != x:
            self._items[pos] = last
            self._pos[last] = pos

    def choice(self, rng: random.Random):
        return self._items[rng.randrange(len(self._items))]

    def sample(self, rng: random.Random, k: int) -> list:
        return rng.sample(self._items, k)

    def as_list(self) -> list:
        return list(self._items)
