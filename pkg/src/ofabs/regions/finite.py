"""Explicit finite subsets of a finite system's states."""

from __future__ import annotations

from collections.abc import Iterable, Mapping

from ..systems import FiniteSystem
from .base import Region, SymbolicSystem


class FiniteRegion(Region):
    domain = "finite"
    __slots__ = ("elems", "_key")

    def __init__(self, elems: Iterable = ()):
        self.elems = frozenset(elems)
        self._key = None

    def key(self) -> str:
        if self._key is None:
            self._key = "{" + ",".join(sorted(self.elems)) + "}"
        return self._key

    def is_empty(self) -> bool:
        return not self.elems

    def intersect(self, other):
        self._same_domain(other)
        return FiniteRegion(self.elems & other.elems)

    def union(self, other):
        self._same_domain(other)
        return FiniteRegion(self.elems | other.elems)

    def subset(self, other):
        self._same_domain(other)
        return self.elems <= other.elems

    def __eq__(self, other):
        return isinstance(other, FiniteRegion) and self.elems == other.elems

    def __hash__(self):
        return hash(self.elems)

    def __iter__(self):
        return iter(self.elems)

    def __len__(self):
        return len(self.elems)

    def __contains__(self, x):
        return x in self.elems


class FiniteSymbolic(SymbolicSystem):
    """A finite system viewed through the region interface."""

    domain = "finite"

    def __init__(self, sys: FiniteSystem):
        self.system = sys
        self.inputs = sys.inputs
        self.outputs = sys.outputs
        self._pre = {y: FiniteRegion(sys.preimage(y)) for y in sys.outputs}

    def empty(self):
        return FiniteRegion()

    def universe(self):
        return FiniteRegion(self.system.states)

    def output_region(self, y):
        return self._pre[y]

    def initial_region(self):
        return FiniteRegion(self.system.initial)

    def post(self, r, u):
        return FiniteRegion(self.system.post(r.elems, u))

    def restrict_output(self, r, y):
        if y not in self._pre:
            return super().restrict_output(r, y)
        return FiniteRegion(self.system.restrict(r.elems, y))

    def output_of(self, r):
        return self.system.output_map[next(iter(r.elems))]

    def stable_subset(self, q, postq: Mapping):
        sys = self.system
        return FiniteRegion(
            x for x in q.elems
            if all(sys.succ(x, u) <= postq[u].elems for u in sys.inputs)
        )

    def pre(self, r, u):
        sys = self.system
        return FiniteRegion(x for x in sys.states if sys.succ(x, u) & r.elems)

    def difference(self, a, b):
        return FiniteRegion(a.elems - b.elems)

    def states_of(self, r) -> frozenset:
        return r.elems


def as_symbolic(sys) -> SymbolicSystem:
    if isinstance(sys, SymbolicSystem):
        return sys
    if isinstance(sys, FiniteSystem):
        return FiniteSymbolic(sys)
    raise TypeError(f"not a system: {sys!r}")
