"""Reference abstractions: a uniform grid over a torus system and l-complete histories."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import BadParams, GridViolatesOutputMap
from .regions import GeoRegion, TranslationSystem
from .systems import FiniteSystem


@dataclass(frozen=True)
class GridSpec:
    eta: Fraction
    width: Fraction

    def __post_init__(self):
        object.__setattr__(self, "eta", Fraction(self.eta))
        object.__setattr__(self, "width", Fraction(self.width))
        if self.eta <= 0:
            raise BadParams("grid size must be positive")
        if (self.width / self.eta).denominator != 1:
            raise BadParams(f"grid size {self.eta} does not tile [0, {self.width})")

    @property
    def cells_per_axis(self) -> int:
        return int(self.width / self.eta)


def _overlaps(lo, hi, eta, n):
    """Indices of grid intervals meeting [lo, hi) in a set of positive length."""
    first = int(lo // eta)
    last = int(-((-hi) // eta))     # ceil
    return range(max(first, 0), min(last, n))


def grid_abstraction(sys: TranslationSystem, eta) -> FiniteSystem:
    """Forward abstraction on an eta-grid: x' in F(x, u) iff post(x, u) meets x'."""
    g = GridSpec(eta, sys.width)
    n = g.cells_per_axis
    eta = g.eta
    name = {}
    out_map = {}
    for i in range(n):
        for j in range(n):
            cell = GeoRegion.box(sys.width, (i * eta, (i + 1) * eta), (j * eta, (j + 1) * eta))
            hit = [y for y in sys.outputs if not cell.intersect(sys.output_region(y)).is_empty()]
            if len(hit) != 1:
                raise GridViolatesOutputMap(cell.key(), hit)
            name[(i, j)] = f"g{i}_{j}"
            out_map[name[(i, j)]] = hit[0]
    x0 = sys.initial_region()
    initial = [name[(i, j)] for i in range(n) for j in range(n)
               if not GeoRegion.box(sys.width, (i * eta, (i + 1) * eta),
                                    (j * eta, (j + 1) * eta)).intersect(x0).is_empty()]
    trans = {}
    for (i, j), x in name.items():
        cell = GeoRegion.box(sys.width, (i * eta, (i + 1) * eta), (j * eta, (j + 1) * eta))
        for u in sys.inputs:
            img = sys.post(cell, u)
            targets = set()
            for a1, b1, a2, b2, a3, b3 in img.boxes():
                full_d = (a3, b3) == (-sys.width, sys.width)
                for i2 in _overlaps(a1, b1, eta, n):
                    for j2 in _overlaps(a2, b2, eta, n):
                        if full_d or not GeoRegion.box(
                                sys.width, (i2 * eta, (i2 + 1) * eta), (j2 * eta, (j2 + 1) * eta)
                        ).intersect(img).is_empty():
                            targets.add(name[(i2, j2)])
            trans[(x, u)] = targets
    return FiniteSystem(
        states=list(name.values()),
        initial=initial,
        inputs=sys.inputs,
        outputs=sys.outputs,
        output_map=out_map,
        transitions=trans,
    ).check()


def history_name(tokens: tuple, single_char: bool) -> str:
    return "".join(tokens) if single_char else ".".join(tokens)


def l_complete_abstraction(sys: FiniteSystem, l: int) -> FiniteSystem:
    """States are the windows of the last ``l`` outputs (with the inputs between them).

    Windows shorter than ``l`` occur only right after initialization.
    """
    if l < 1:
        raise BadParams("l must be at least 1")
    single_input = len(sys.inputs) == 1
    single_char = all(len(str(t)) == 1 for t in (*sys.outputs, *sys.inputs))

    def window(tokens):
        keep = 2 * l - 1
        tokens = tokens[-keep:] if len(tokens) > keep else tokens
        return tokens

    def label(tokens):
        shown = tokens[::2] if single_input else tokens
        return history_name(tuple(shown), single_char)

    start = [(x, (sys.output_map[x],)) for x in sys.states if x in sys.initial]
    seen = set(start)
    frontier = list(start)
    order: list = []
    out_map: dict = {}
    trans: dict = {}
    initial = set()
    for x, h in start:
        initial.add(label(h))
    while frontier:
        nxt = []
        for x, h in frontier:
            name = label(h)
            if name not in out_map:
                order.append(name)
                out_map[name] = h[-1]
            for u in sys.inputs:
                for x2 in sorted(sys.succ(x, u)):
                    h2 = window(h + (u, sys.output_map[x2]))
                    trans.setdefault((name, u), set()).add(label(h2))
                    if (x2, h2) not in seen:
                        seen.add((x2, h2))
                        nxt.append((x2, h2))
        frontier = nxt
    return FiniteSystem(
        states=order,
        initial=initial,
        inputs=sys.inputs,
        outputs=sys.outputs,
        output_map=out_map,
        transitions=trans,
    )
