"""Unions of diagonal boxes over the torus [0, W)^2 with exact rational bounds.

A diagonal box constrains x1, x2 and x1 - x2 to half-open intervals
[lo, hi).  The family is closed under translation and under the modular
wrap, which shifts x1 - x2 by a multiple of W.

Canonical form: the lines x1 = c, x2 = c and x1 - x2 = c split the plane into
cells.  A region keeps only the lines that carry a piece of its boundary of
positive length, and lists the non-empty cells of that arrangement that it
contains.  Two regions are equal iff these forms agree.
"""

from __future__ import annotations

from bisect import bisect_right
from collections.abc import Iterable, Mapping
from fractions import Fraction
from itertools import product
from math import lcm

from ..errors import DomainMismatch
from .base import Region, SymbolicSystem


def _q(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        raise TypeError("floats are not accepted; use Fraction or 'p/q' strings")
    return Fraction(v)


def _fmt(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _cell_nonempty(i1, i2, i3) -> bool:
    (a1, b1), (a2, b2), (a3, b3) = i1, i2, i3
    # x1 - x2 ranges over the open interval (a1 - b2, b1 - a2)
    return max(a3, a1 - b2) < min(b3, b1 - a2)


def _positive(lo, hi) -> bool:
    return lo < hi


def _scaled(cuts):
    """The cut tuples as integers over their common denominator."""
    den = lcm(*(v.denominator for axis in cuts for v in axis))
    return tuple(tuple(int(v * den) for v in axis) for axis in cuts)


def _index_map(merged, own) -> list:
    """For each interval of ``merged`` the index of the ``own`` interval holding it."""
    out = []
    j = 0
    for lo in merged[:-1]:
        while own[j + 1] <= lo:
            j += 1
        out.append(j)
    return out


class GeoRegion(Region):
    domain = "geo"
    __slots__ = ("width", "cuts", "cells", "_key", "_text", "_hash")

    def __init__(self, width, cuts, cells):
        """Use :meth:`from_boxes`; this constructor expects a canonical form."""
        self.width = width
        self.cuts = cuts
        self.cells = cells
        self._key = (width, cuts, cells)
        self._text = None
        self._hash = None

    # -- construction --------------------------------------------------

    @classmethod
    def empty_of(cls, width) -> "GeoRegion":
        w = _q(width)
        return cls(w, ((Fraction(0), w), (Fraction(0), w), (-w, w)), frozenset())

    @classmethod
    def box(cls, width, x1, x2, d=None) -> "GeoRegion":
        w = _q(width)
        d = d if d is not None else (-w, w)
        return cls.from_boxes(w, [(x1[0], x1[1], x2[0], x2[1], d[0], d[1])])

    @classmethod
    def from_boxes(cls, width, boxes: Iterable) -> "GeoRegion":
        w = _q(width)
        lims = ((Fraction(0), w), (Fraction(0), w), (-w, w))
        clipped = []
        for b in boxes:
            b = tuple(_q(v) for v in b)
            lo = [max(b[2 * k], lims[k][0]) for k in range(3)]
            hi = [min(b[2 * k + 1], lims[k][1]) for k in range(3)]
            if all(lo[k] < hi[k] for k in range(3)):
                clipped.append((lo, hi))
        cuts = []
        for k in range(3):
            pts = {lims[k][0], lims[k][1]}
            for lo, hi in clipped:
                pts.add(lo[k])
                pts.add(hi[k])
            cuts.append(tuple(sorted(pts)))
        cells = set()
        for lo, hi in clipped:
            ranges = [range(cuts[k].index(lo[k]), cuts[k].index(hi[k])) for k in range(3)]
            for idx in product(*ranges):
                cells.add(idx)
        return cls._canonical(w, tuple(cuts), cells)

    @staticmethod
    def _intervals(cuts, idx):
        return tuple((cuts[k][idx[k]], cuts[k][idx[k] + 1]) for k in range(3))

    @classmethod
    def _canonical(cls, w, cuts, cells) -> "GeoRegion":
        icuts = _scaled(cuts)
        cells = {c for c in cells if _cell_nonempty(*cls._intervals(icuts, c))}
        keep = []
        for k in range(3):
            needed = {0, len(cuts[k]) - 1}
            for c in cells:
                for step in (-1, 1):
                    nb = list(c)
                    nb[k] += step
                    if not 0 <= nb[k] < len(cuts[k]) - 1 or tuple(nb) in cells:
                        continue
                    line = c[k] if step == -1 else c[k] + 1
                    if line not in needed and cls._face_positive(icuts, k, line, c):
                        needed.add(line)
            keep.append(sorted(needed))
        new_cuts = tuple(tuple(cuts[k][i] for i in keep[k]) for k in range(3))
        remap = []
        for k in range(3):
            m = {}
            pos = 0
            for i in range(len(cuts[k]) - 1):
                while keep[k][pos + 1] <= i:
                    pos += 1
                m[i] = pos
            remap.append(m)
        new_cells = frozenset(tuple(remap[k][c[k]] for k in range(3)) for c in cells)
        return cls(w, new_cuts, new_cells)

    @classmethod
    def _face_positive(cls, cuts, k, line, c) -> bool:
        """Does the boundary of cell ``c`` on cut ``line`` of axis ``k`` have positive length?"""
        iv = cls._intervals(cuts, c)
        b = cuts[k][line]
        (a1, b1), (a2, b2), (a3, b3) = iv
        if k == 0:   # x1 = b, x2 in J, b - x2 in K
            return _positive(max(a2, b - b3), min(b2, b - a3))
        if k == 1:   # x2 = b, x1 in I, x1 - b in K
            return _positive(max(a1, b + a3), min(b1, b + b3))
        # x1 - x2 = b, x1 in I, x1 - b in J
        return _positive(max(a1, a2 + b), min(b1, b2 + b))

    # -- representation ------------------------------------------------

    def boxes(self) -> list:
        """Disjoint boxes covering the region, merged along x1 runs."""
        out = []
        by_rest: dict = {}
        for c in self.cells:
            by_rest.setdefault((c[1], c[2]), []).append(c[0])
        for (j, k), iis in sorted(by_rest.items()):
            iis.sort()
            start = prev = iis[0]
            for i in iis[1:] + [None]:
                if i is not None and i == prev + 1:
                    prev = i
                    continue
                out.append((self.cuts[0][start], self.cuts[0][prev + 1],
                            self.cuts[1][j], self.cuts[1][j + 1],
                            self.cuts[2][k], self.cuts[2][k + 1]))
                if i is not None:
                    start = prev = i
        out.sort()
        return out

    def key(self) -> str:
        if self._text is None:
            terms = [
                f"[{_fmt(a)},{_fmt(b)})x[{_fmt(c)},{_fmt(d)})&{{{_fmt(e)}<=x1-x2<{_fmt(f)}}}"
                for a, b, c, d, e, f in self.boxes()
            ]
            self._text = " | ".join(terms) if terms else "{}"
        return self._text

    def __eq__(self, other):
        return isinstance(other, GeoRegion) and self._key == other._key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key)
        return self._hash

    @classmethod
    def parse(cls, width, text: str) -> "GeoRegion":
        text = text.strip()
        if text in ("", "{}"):
            return cls.empty_of(width)
        boxes = []
        for term in text.split("|"):
            term = term.strip()
            rect, diag = term.split("&")
            r1, r2 = rect.split("x")
            lo1, hi1 = r1.strip("[)").split(",")
            lo2, hi2 = r2.strip("[)").split(",")
            lo3, rest = diag.strip("{}").split("<=x1-x2<")
            boxes.append(tuple(Fraction(v) for v in (lo1, hi1, lo2, hi2, lo3, rest)))
        return cls.from_boxes(width, boxes)

    # -- algebra -------------------------------------------------------

    def _check(self, other):
        self._same_domain(other)
        if other.width != self.width:
            raise DomainMismatch("regions live on tori of different widths")

    def _locate(self, k, lo) -> int:
        return bisect_right(self.cuts[k], lo) - 1

    def _merged(self, other):
        """Common refinement: merged cuts, integer copies and both index maps."""
        self._check(other)
        cuts = tuple(tuple(sorted(set(self.cuts[k]) | set(other.cuts[k]))) for k in range(3))
        mine = [_index_map(cuts[k], self.cuts[k]) for k in range(3)]
        theirs = [_index_map(cuts[k], other.cuts[k]) for k in range(3)]
        return cuts, _scaled(cuts), mine, theirs

    def _combine(self, other, op) -> "GeoRegion":
        cuts, icuts, mine, theirs = self._merged(other)
        a_cells, b_cells = self.cells, other.cells
        (c1, c2, c3) = icuts
        m1, m2, m3 = mine
        t1, t2, t3 = theirs
        cells = set()
        for i in range(len(c1) - 1):
            lo1, hi1 = c1[i], c1[i + 1]
            for j in range(len(c2) - 1):
                dlo, dhi = lo1 - c2[j + 1], hi1 - c2[j]
                for k in range(len(c3) - 1):
                    if max(c3[k], dlo) >= min(c3[k + 1], dhi):
                        continue
                    if op((m1[i], m2[j], m3[k]) in a_cells, (t1[i], t2[j], t3[k]) in b_cells):
                        cells.add((i, j, k))
        return GeoRegion._canonical(self.width, cuts, cells)

    def intersect(self, other):
        if self.cells and getattr(other, "cells", None) is not None and not other.cells:
            self._check(other)
            return other
        return self._combine(other, lambda a, b: a and b)

    def union(self, other):
        return self._combine(other, lambda a, b: a or b)

    def minus(self, other):
        return self._combine(other, lambda a, b: a and not b)

    def subset(self, other):
        if self is other or self._key == other._key:
            return True
        if not self.cells:
            return True
        cuts, icuts, mine, theirs = self._merged(other)
        (c1, c2, c3) = icuts
        m1, m2, m3 = mine
        t1, t2, t3 = theirs
        for i in range(len(c1) - 1):
            lo1, hi1 = c1[i], c1[i + 1]
            for j in range(len(c2) - 1):
                dlo, dhi = lo1 - c2[j + 1], hi1 - c2[j]
                for k in range(len(c3) - 1):
                    if max(c3[k], dlo) >= min(c3[k + 1], dhi):
                        continue
                    if (m1[i], m2[j], m3[k]) in self.cells and (t1[i], t2[j], t3[k]) not in other.cells:
                        return False
        return True

    def is_empty(self) -> bool:
        return not self.cells

    def contains_point(self, p) -> bool:
        x1, x2 = _q(p[0]), _q(p[1])
        d = x1 - x2
        for k, v in enumerate((x1, x2, d)):
            if not self.cuts[k][0] <= v < self.cuts[k][-1]:
                return False
        idx = (self._locate(0, x1), self._locate(1, x2), self._locate(2, d))
        return idx in self.cells

    def translate(self, v1, v2) -> "GeoRegion":
        """Image under x -> (x + v) mod W, componentwise."""
        w = self.width
        v1, v2 = _q(v1), _q(v2)
        pieces = []
        for a1, b1, a2, b2, a3, b3 in self.boxes():
            for s1 in _wrap_pieces(a1 + v1, b1 + v1, w):
                for s2 in _wrap_pieces(a2 + v2, b2 + v2, w):
                    (l1, h1, k1), (l2, h2, k2) = s1, s2
                    shift = (v1 - v2) - (k1 - k2) * w
                    pieces.append((l1, h1, l2, h2, a3 + shift, b3 + shift))
        return GeoRegion.from_boxes(w, pieces)

    def area(self) -> Fraction:
        """Exact area, used by tests as an independent check."""
        total = Fraction(0)
        for c in self.cells:
            total += _cell_area(self._intervals(self.cuts, c))
        return total


def _wrap_pieces(lo, hi, w):
    """Split [lo, hi) into pieces of [0, w) as (lo', hi', k) with x' = x - k*w."""
    out = []
    k = (lo // w)
    while lo < hi:
        top = (k + 1) * w
        seg_hi = min(hi, top)
        out.append((lo - k * w, seg_hi - k * w, k))
        lo = seg_hi
        k += 1
    return out


def _cell_area(iv) -> Fraction:
    """Area of {x1 in I, x2 in J, x1 - x2 in K} by integrating the x2-extent over x1."""
    (a1, b1), (a2, b2), (a3, b3) = iv
    # length(x1) = |[a2,b2) ∩ (x1-b3, x1-a3]| is piecewise linear in x1 with
    # breakpoints where x1 - b3 or x1 - a3 crosses a2 or b2
    pts = sorted({a1, b1, a2 + a3, a2 + b3, b2 + a3, b2 + b3})
    pts = [p for p in pts if a1 <= p <= b1]

    def length(x1):
        return max(Fraction(0), min(b2, x1 - a3) - max(a2, x1 - b3))

    total = Fraction(0)
    for lo, hi in zip(pts, pts[1:]):
        total += (length(lo) + length(hi)) * (hi - lo) / 2
    return total


class TranslationSystem(SymbolicSystem):
    """x' = (x + v_u) mod W on [0, W)^2, outputs given by GeoRegions."""

    domain = "geo"

    def __init__(self, width, moves: Mapping, output_regions: Mapping,
                 initial: GeoRegion | None = None, name: str = "translation"):
        self.width = _q(width)
        self.moves = {u: (_q(v[0]), _q(v[1])) for u, v in moves.items()}
        self.inputs = tuple(self.moves)
        self.outputs = tuple(output_regions)
        self._out = dict(output_regions)
        self._initial = initial if initial is not None else self.universe()
        self.name = name
        self._post_cache: dict = {}
        self._pre_cache: dict = {}

    def empty(self):
        return GeoRegion.empty_of(self.width)

    def universe(self):
        w = self.width
        return GeoRegion.box(w, (0, w), (0, w))

    def output_region(self, y):
        return self._out[y]

    def initial_region(self):
        return self._initial

    def post(self, r, u):
        key = (r, u)
        hit = self._post_cache.get(key)
        if hit is None:
            v1, v2 = self.moves[u]
            hit = r.translate(v1, v2)
            self._post_cache[key] = hit
        return hit

    def pre(self, r, u):
        key = (r, u)
        hit = self._pre_cache.get(key)
        if hit is None:
            v1, v2 = self.moves[u]
            hit = r.translate(-v1, -v2)
            self._pre_cache[key] = hit
        return hit

    def stable_subset(self, q, postq):
        # the dynamics are deterministic and invertible, so
        # {x in q | F(x,u) ⊆ P_u} = q ∩ F_u^{-1}(P_u)
        s = q
        for u in self.inputs:
            s = s.intersect(self.pre(postq[u], u))
        return s

    def difference(self, a, b):
        return a.minus(b)

    # -- concrete semantics for simulation -----------------------------

    def step(self, x, u):
        v1, v2 = self.moves[u]
        w = self.width
        return ((x[0] + v1) % w, (x[1] + v2) % w)

    def output_at(self, x):
        for y in self.outputs:
            if self._out[y].contains_point(x):
                return y
        raise ValueError(f"point {x} has no output")

    def check(self) -> "TranslationSystem":
        union = self.empty()
        for y in self.outputs:
            r = self._out[y]
            if not union.intersect(r).is_empty():
                raise DomainMismatch(f"output region {y!r} overlaps another output")
            union = union.union(r)
        if union != self.universe():
            raise DomainMismatch("output regions do not cover the state space")
        return self
