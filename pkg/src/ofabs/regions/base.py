"""Common interface of the exact set domains and of symbolic systems over them."""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Mapping
from dataclasses import dataclass

from ..errors import DomainMismatch, NotSupported, UnknownOutput


class Region(ABC):
    """An immutable, exactly represented subset of a state space.

    Equality and hashing go through :meth:`key`, the canonical text form, so
    two regions compare equal iff their canonical forms coincide.
    """

    domain: str = "abstract"

    @abstractmethod
    def key(self) -> str: ...

    @abstractmethod
    def is_empty(self) -> bool: ...

    @abstractmethod
    def intersect(self, other: "Region") -> "Region": ...

    @abstractmethod
    def union(self, other: "Region") -> "Region": ...

    def subset(self, other: "Region") -> bool:
        self._same_domain(other)
        return self.intersect(other) == self

    def proper_subset(self, other: "Region") -> bool:
        return self != other and self.subset(other)

    def _same_domain(self, other):
        if not isinstance(other, Region) or other.domain != self.domain:
            raise DomainMismatch(f"{self.domain} vs {getattr(other, 'domain', type(other).__name__)}")

    def __eq__(self, other):
        return isinstance(other, Region) and other.domain == self.domain and other.key() == self.key()

    def __hash__(self):
        return hash((self.domain, self.key()))

    def __le__(self, other):
        return self.subset(other)

    def __lt__(self, other):
        return self.proper_subset(other)

    def __and__(self, other):
        return self.intersect(other)

    def __or__(self, other):
        return self.union(other)

    def __bool__(self):
        return not self.is_empty()

    def __str__(self):
        return self.key()

    def __repr__(self):
        return f"{type(self).__name__}({self.key()})"


class SymbolicSystem(ABC):
    """A system whose state sets are regions of a single exact domain."""

    domain: str = "abstract"
    inputs: tuple = ()
    outputs: tuple = ()

    @abstractmethod
    def empty(self) -> Region: ...

    @abstractmethod
    def output_region(self, y) -> Region:
        """H^{-1}(y)."""

    @abstractmethod
    def initial_region(self) -> Region: ...

    @abstractmethod
    def post(self, r: Region, u) -> Region: ...

    def stable_subset(self, q: Region, postq: Mapping) -> Region:
        raise NotSupported(f"stable_subset not available for {type(self).__name__}")

    def pre(self, r: Region, u) -> Region:
        """States having at least one u-successor in ``r``."""
        raise NotSupported(f"pre-image not available for {type(self).__name__}")

    def difference(self, a: Region, b: Region) -> Region:
        """Internal helper for partition refinement; not used by KA or KAM."""
        raise NotSupported(f"difference not available for {type(self).__name__}")

    def restrict_output(self, r: Region, y) -> Region:
        if y not in self.outputs:
            raise UnknownOutput(y)
        return r.intersect(self.output_region(y))

    def output_of(self, r: Region):
        """The unique output of a non-empty, output-uniform region."""
        for y in self.outputs:
            if not self.restrict_output(r, y).is_empty():
                return y
        raise ValueError("empty region has no output")

    def initial_cells(self) -> dict:
        """Non-empty X0 ∩ H^{-1}(y), keyed by output in declared order."""
        x0 = self.initial_region()
        cells = {}
        for y in self.outputs:
            c = self.restrict_output(x0, y)
            if not c.is_empty():
                cells[y] = c
        return cells

    def output_partition(self) -> dict:
        parts = {}
        for y in self.outputs:
            r = self.output_region(y)
            if not r.is_empty():
                parts[y] = r
        return parts

    def check_domain(self, r: Region):
        if not isinstance(r, Region) or r.domain != self.domain:
            raise DomainMismatch(f"expected a {self.domain} region, got {r!r}")
        return r


@dataclass(frozen=True)
class AlgebraReport:
    subset: bool
    equals: bool
    empty_a: bool
    intersect: Region
    union_rep: Region


def region_algebra(a: Region, b: Region) -> AlgebraReport:
    a._same_domain(b)
    inter = a.intersect(b)
    return AlgebraReport(
        subset=inter == a,
        equals=a == b,
        empty_a=a.is_empty(),
        intersect=inter,
        union_rep=a.union(b),
    )


def post(sys: SymbolicSystem, r: Region, u) -> Region:
    return sys.post(sys.check_domain(r), u)


def restrict_output(sys: SymbolicSystem, r: Region, y) -> Region:
    return sys.restrict_output(sys.check_domain(r), y)


def stable_subset(sys: SymbolicSystem, q: Region, postq: Mapping) -> Region:
    sys.check_domain(q)
    for u in sys.inputs:
        sys.check_domain(postq[u])
    return sys.stable_subset(q, postq)


def union_all(sys: SymbolicSystem, regions) -> Region:
    out = sys.empty()
    for r in regions:
        out = out.union(r)
    return out
