"""Families of states indexed by naturals, with semilinear index sets.

An :class:`IndexSet` is a finite union of progressions ``a + p*i`` with
``p`` in {0, 1, 2}.  Such sets are exactly the subsets of the naturals that are
eventually periodic with period 2, so they have a canonical form: a threshold
``n``, the explicit members below it and a tail pattern (odd members, even
members) that holds from ``n`` on.

An :class:`IndexedRegion` maps family tags to index sets.  A pair (tag, I)
stands for the states of that family whose index is in I and at which the
family is valid.  Families may come in groups of alternatives (for example a
module that is either one state or a left/right pair); which alternative is
present at an index is decided by a class oracle the region never consults.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass

from ..errors import BadParams, NotSupported
from .base import Region, SymbolicSystem


class IndexSet:
    __slots__ = ("finite", "n", "odd", "even", "_hash")

    def __init__(self, finite=(), n: int = 0, odd: bool = False, even: bool = False):
        finite = frozenset(int(i) for i in finite)
        if any(i < 0 for i in finite):
            raise BadParams("indices are natural numbers")
        n = max(n, max(finite) + 1 if finite else 0)
        # shrink the threshold while the last explicit slot follows the tail
        while n > 0:
            i = n - 1
            tail_has = odd if i % 2 else even
            if (i in finite) != tail_has:
                break
            finite = finite - {i}
            n -= 1
        self.finite = finite
        self.n = n
        self.odd = odd
        self.even = even
        self._hash = None

    # -- constructors --------------------------------------------------

    @classmethod
    def empty(cls):
        return cls()

    @classmethod
    def singleton(cls, a: int):
        return cls({a})

    @classmethod
    def progression(cls, a: int, p: int):
        if a < 0:
            raise BadParams("progression offset must be non-negative")
        if p == 0:
            return cls({a})
        if p == 1:
            return cls((), a, True, True)
        if p == 2:
            return cls((), a, a % 2 == 1, a % 2 == 0)
        raise NotSupported(f"period {p} is not supported (allowed: 0, 1, 2)")

    @classmethod
    def from_progressions(cls, progs: Iterable):
        out = cls()
        for a, p in progs:
            out = out | cls.progression(a, p)
        return out

    @classmethod
    def at_least(cls, a: int):
        return cls.progression(a, 1)

    @classmethod
    def parity(cls, odd: bool, start: int = 0):
        first = start + ((start % 2 == 0) if odd else (start % 2 == 1))
        return cls.progression(first, 2)

    # -- queries -------------------------------------------------------

    def __contains__(self, i: int) -> bool:
        if i < 0:
            return False
        if i < self.n:
            return i in self.finite
        return self.odd if i % 2 else self.even

    def is_empty(self) -> bool:
        return not self.finite and not self.odd and not self.even

    def is_finite(self) -> bool:
        return not self.odd and not self.even

    def members_below(self, bound: int) -> list:
        return [i for i in range(bound) if i in self]

    def min(self):
        if self.finite:
            return min(self.finite)
        if self.is_empty():
            return None
        i = self.n
        while i not in self:
            i += 1
        return i

    def _expand(self, n: int) -> frozenset:
        return frozenset(i for i in range(n) if i in self)

    def _combine(self, other, op, flag):
        n = max(self.n, other.n)
        a, b = self._expand(n), other._expand(n)
        return IndexSet(op(a, b), n, flag(self.odd, other.odd), flag(self.even, other.even))

    def __or__(self, other):
        return self._combine(other, frozenset.__or__, lambda x, y: x or y)

    def __and__(self, other):
        return self._combine(other, frozenset.__and__, lambda x, y: x and y)

    def __sub__(self, other):
        return self._combine(other, frozenset.__sub__, lambda x, y: x and not y)

    def __le__(self, other):
        return (self - other).is_empty()

    def shift(self, k: int) -> "IndexSet":
        """{i + k : i in self, i + k >= 0}."""
        finite = {i + k for i in self.finite if i + k >= 0}
        odd, even = (self.odd, self.even) if k % 2 == 0 else (self.even, self.odd)
        return IndexSet(finite, max(self.n + k, 0), odd, even)

    def progressions(self) -> list:
        """Canonical list of (a, p) terms."""
        out = [(i, 0) for i in sorted(self.finite)]
        if self.odd and self.even:
            out.append((self.n, 1))
        elif self.odd or self.even:
            first = self.n + (0 if (self.n % 2 == 1) == self.odd else 1)
            out.append((first, 2))
        return out

    def key(self) -> tuple:
        return (tuple(sorted(self.finite)), self.n, self.odd, self.even)

    def __eq__(self, other):
        return isinstance(other, IndexSet) and self.key() == other.key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __repr__(self):
        terms = ",".join(f"{a}+{p}*i" for a, p in self.progressions())
        return f"IndexSet({terms})"


class IndexedRegion(Region):
    domain = "indexed"
    __slots__ = ("parts", "_key")

    def __init__(self, parts: Mapping | None = None):
        clean = {}
        for tag, s in (parts or {}).items():
            if not isinstance(s, IndexSet):
                s = IndexSet.from_progressions(s)
            if not s.is_empty():
                clean[tag] = s
        self.parts = clean
        self._key = None

    def key(self) -> str:
        if self._key is None:
            terms = [
                f"{tag}[{a}+{p}*i]"
                for tag in sorted(self.parts)
                for a, p in self.parts[tag].progressions()
            ]
            self._key = " | ".join(terms) if terms else "{}"
        return self._key

    def get(self, tag) -> IndexSet:
        return self.parts.get(tag, IndexSet())

    def is_empty(self) -> bool:
        return not self.parts

    def intersect(self, other):
        self._same_domain(other)
        return IndexedRegion({t: s & other.parts[t] for t, s in self.parts.items() if t in other.parts})

    def union(self, other):
        self._same_domain(other)
        parts = dict(self.parts)
        for t, s in other.parts.items():
            parts[t] = parts[t] | s if t in parts else s
        return IndexedRegion(parts)

    def minus(self, other):
        return IndexedRegion({t: s - other.get(t) for t, s in self.parts.items()})

    def subset(self, other):
        self._same_domain(other)
        return all(s <= other.get(t) for t, s in self.parts.items())

    def tags(self):
        return sorted(self.parts)

    @classmethod
    def parse(cls, text: str) -> "IndexedRegion":
        """Inverse of :meth:`key`."""
        text = text.strip()
        if text in ("", "{}"):
            return cls()
        parts: dict = {}
        for term in text.split("|"):
            term = term.strip()
            tag, rest = term.split("[", 1)
            body = rest.rstrip("]")
            a, p = body.split("+")
            s = IndexSet.progression(int(a), int(p.split("*")[0]))
            parts[tag] = parts[tag] | s if tag in parts else s
        return cls(parts)


@dataclass(frozen=True)
class Rule:
    """Transition template for one family.

    A state (src, i) with i in ``when`` has, under input ``u``, the successor
    (t, j) for the alternative tags t in ``group`` that are valid at
    j = i + shift (or j = const when ``const`` is set).
    """

    src: str
    when: IndexSet
    u: str
    group: tuple
    shift: int = 0
    const: int | None = None

    def image(self, idx: IndexSet) -> IndexSet:
        idx = idx & self.when
        if idx.is_empty():
            return IndexSet()
        if self.const is not None:
            return IndexSet.singleton(self.const)
        return idx.shift(self.shift)

    def preimage(self, target: IndexSet) -> IndexSet:
        """Indices i in ``when`` whose target index lies in ``target``."""
        if self.const is not None:
            return self.when if self.const in target else IndexSet()
        return target.shift(-self.shift) & self.when


class IndexedSystem(SymbolicSystem):
    domain = "indexed"

    def __init__(self, families: Mapping, outputs: Mapping, initial: IndexedRegion,
                 inputs: Iterable, rules: Iterable, output_order: Iterable | None = None):
        """``families`` maps tag -> index domain, ``outputs`` maps tag -> output."""
        self.families = dict(families)
        self.family_output = dict(outputs)
        self.inputs = tuple(inputs)
        order = list(output_order) if output_order is not None else []
        for tag in self.families:
            y = self.family_output[tag]
            if y not in order:
                order.append(y)
        self.outputs = tuple(order)
        self.rules = tuple(rules)
        self._by_src: dict = {}
        for r in self.rules:
            self._by_src.setdefault((r.src, r.u), []).append(r)
        self._initial = self.normalize(initial)

    def normalize(self, r: IndexedRegion) -> IndexedRegion:
        return IndexedRegion({t: s & self.families[t] for t, s in r.parts.items() if t in self.families})

    def region(self, parts: Mapping) -> IndexedRegion:
        return self.normalize(IndexedRegion(parts))

    def empty(self):
        return IndexedRegion()

    def universe(self):
        return IndexedRegion(self.families)

    def output_region(self, y):
        return IndexedRegion({t: d for t, d in self.families.items() if self.family_output[t] == y})

    def initial_region(self):
        return self._initial

    def restrict_output(self, r, y):
        if y not in self.outputs:
            return super().restrict_output(r, y)
        return IndexedRegion({t: s for t, s in r.parts.items() if self.family_output[t] == y})

    def output_of(self, r):
        return self.family_output[next(iter(r.parts))]

    def _targets(self, rule: Rule, j_set: IndexSet) -> dict:
        return {t: j_set & self.families[t] for t in rule.group}

    def post(self, r, u):
        out: dict = {}
        for tag, idx in r.parts.items():
            for rule in self._by_src.get((tag, u), ()):
                img = rule.image(idx)
                if img.is_empty():
                    continue
                for t, s in self._targets(rule, img).items():
                    out[t] = out[t] | s if t in out else s
        return IndexedRegion(out)

    def _rule_split(self, rule: Rule, target: IndexedRegion, scope: IndexSet):
        """Classify the indices of ``scope`` by where this rule's successors go.

        Returns (all_in, some_in, valid).  ``valid`` holds the indices with at
        least one candidate successor.  For a group of alternatives the actual
        successor depends on the class oracle, so an index where only some
        candidates lie in ``target`` is undecidable here.
        """
        valid = IndexSet()
        hit_any = IndexSet()
        miss_any = IndexSet()
        for t in rule.group:
            dom = rule.preimage(self.families[t]) & scope
            hit = rule.preimage(target.get(t) & self.families[t]) & scope
            valid = valid | dom
            hit_any = hit_any | hit
            miss_any = miss_any | (dom - hit)
        if len(rule.group) > 1:
            mixed = hit_any & miss_any
            if not mixed.is_empty():
                raise NotSupported(
                    f"successors of {rule.src} at {mixed!r} depend on the class oracle")
        return valid - miss_any, hit_any, valid

    def stable_subset(self, q, postq):
        keep: dict = {}
        for tag, idx in q.parts.items():
            good = idx
            for u in self.inputs:
                for rule in self._by_src.get((tag, u), ()):
                    ok, _, valid = self._rule_split(rule, postq[u], idx)
                    good = good - (valid - ok)
            keep[tag] = good
        return IndexedRegion(keep)

    def pre(self, r, u):
        out: dict = {}
        for (tag, uu), rules in self._by_src.items():
            if uu != u:
                continue
            acc = IndexSet()
            for rule in rules:
                _, some, _ = self._rule_split(rule, r, self.families[tag])
                acc = acc | some
            if not acc.is_empty():
                out[tag] = acc
        return IndexedRegion(out)

    def difference(self, a, b):
        return a.minus(b)

    def check(self) -> "IndexedSystem":
        """Every valid state needs a successor under every input."""
        for tag, dom in self.families.items():
            if self.family_output.get(tag) not in self.outputs:
                raise BadParams(f"family {tag!r} has no output")
            for u in self.inputs:
                covered = IndexSet()
                for rule in self._by_src.get((tag, u), ()):
                    for t in rule.group:
                        covered = covered | rule.preimage(self.families[t])
                missing = dom - covered
                if not missing.is_empty():
                    raise BadParams(f"family {tag!r} has no {u}-successor at {missing!r}")
        for tag in self._initial.parts:
            y = self.family_output[tag]
            for t2, d in self.families.items():
                if self.family_output[t2] == y and not d <= self._initial.get(t2):
                    raise BadParams(f"initial set does not respect output {y!r}")
        return self
