"""Decision procedures for sound abstraction relations between finite systems."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import networkx as nx
from networkx.algorithms.isomorphism import DiGraphMatcher

from .errors import MapDomainMismatch, ResourceBudgetExceeded
from .systems import DEFAULT_NODE_LIMIT, FiniteSystem


@dataclass(frozen=True)
class AbstractionMap:
    """A relation given as x -> set of related abstract states; gamma is its inverse."""

    alpha: Mapping

    def __post_init__(self):
        object.__setattr__(self, "alpha", {x: frozenset(v) for x, v in self.alpha.items()})

    def __call__(self, x) -> frozenset:
        return self.alpha.get(x, frozenset())

    def image(self, xs) -> frozenset:
        out = set()
        for x in xs:
            out |= self(x)
        return frozenset(out)

    def inverse(self) -> "AbstractionMap":
        inv: dict = {}
        for x, targets in self.alpha.items():
            for t in targets:
                inv.setdefault(t, set()).add(x)
        return AbstractionMap(inv)

    gamma = inverse

    def domain(self) -> frozenset:
        return frozenset(self.alpha)

    def codomain(self) -> frozenset:
        return self.image(self.alpha)

    @classmethod
    def identity(cls, sys: FiniteSystem) -> "AbstractionMap":
        return cls({x: {x} for x in sys.states})

    @classmethod
    def from_function(cls, f: Mapping) -> "AbstractionMap":
        return cls({x: {y} for x, y in f.items()})

    def to_json(self) -> dict:
        return {"alpha": {x: sorted(v) for x, v in sorted(self.alpha.items())}}

    @classmethod
    def from_json(cls, d: Mapping) -> "AbstractionMap":
        if "alpha" not in d:
            raise MapDomainMismatch("map JSON needs an 'alpha' object")
        return cls(d["alpha"])


def compose(a12: AbstractionMap, a23: AbstractionMap) -> AbstractionMap:
    """alpha13(x) = alpha23(alpha12(x))."""
    stray = a12.codomain() - a23.domain()
    if stray:
        raise MapDomainMismatch(f"states {sorted(stray)} are not in the second map's domain")
    return AbstractionMap({x: a23.image(v) for x, v in a12.alpha.items()})


@dataclass
class Condition:
    passed: bool
    witness: tuple | None = None


@dataclass
class RelationReport:
    conditions: dict = field(default_factory=dict)   # name -> Condition

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    def __getitem__(self, name) -> Condition:
        return self.conditions[name]

    def to_json(self) -> dict:
        return {"passed": self.passed,
                "conditions": {k: {"passed": c.passed, "witness": list(c.witness) if c.witness else None}
                               for k, c in self.conditions.items()}}


def _check_map(S: FiniteSystem, T: FiniteSystem, a: AbstractionMap):
    bad = a.domain() - set(S.states)
    if bad:
        raise MapDomainMismatch(f"map relates unknown concrete states {sorted(bad)}")
    bad = a.codomain() - set(T.states)
    if bad:
        raise MapDomainMismatch(f"map relates unknown abstract states {sorted(bad)}")


def _a1(S, T, a) -> Condition:
    for x in sorted(S.initial):
        for t in sorted(a(x)):
            if t not in T.initial:
                return Condition(False, (x, t))
    return Condition(True)


def _a2(S, T, a, inputs_of=None) -> Condition:
    for x in sorted(S.states):
        ax = a(x)
        for u in (inputs_of(x) if inputs_of else S.inputs):
            allowed = T.post(ax, u)
            if not a.image(S.succ(x, u)) <= allowed:
                return Condition(False, (x, u))
    return Condition(True)


def _a3(S, T, a) -> Condition:
    g = a.inverse()
    for t in sorted(T.states):
        for x in sorted(g(t)):
            if S.output_map[x] != T.output_map[t]:
                return Condition(False, (t, x))
    return Condition(True)


def check_sound_abstraction(S: FiniteSystem, T: FiniteSystem, a: AbstractionMap) -> RelationReport:
    _check_map(S, T, a)
    return RelationReport({"A1": _a1(S, T, a), "A2": _a2(S, T, a), "A3": _a3(S, T, a)})


def check_sound_realization(S: FiniteSystem, T: FiniteSystem, a: AbstractionMap) -> RelationReport:
    fwd = check_sound_abstraction(S, T, a)
    bwd = check_sound_abstraction(T, S, a.inverse())
    conds = {k: v for k, v in fwd.conditions.items()}
    conds.update({f"{k}-reverse": v for k, v in bwd.conditions.items()})
    return RelationReport(conds)


def check_frr_variant(S: FiniteSystem, T: FiniteSystem, a: AbstractionMap) -> RelationReport:
    """A2 split into input inclusion (A2.1) and successor inclusion on abstract inputs (A2.2)."""
    _check_map(S, T, a)

    def abstract_enabled(x):
        en = set()
        for t in a(x):
            en |= T.enabled(t)
        return [u for u in S.inputs if u in en]

    a21 = Condition(True)
    for x in sorted(S.states):
        for u in abstract_enabled(x):
            if u not in S.enabled(x):
                a21 = Condition(False, (x, u))
                break
        if not a21.passed:
            break
    a22 = _a2(S, T, a, inputs_of=abstract_enabled)
    return RelationReport({"A1": _a1(S, T, a), "A2.1": a21, "A2.2": a22, "A3": _a3(S, T, a)})


@dataclass
class ContainmentResult:
    passed: bool
    witness: tuple | None = None

    def __bool__(self):
        return self.passed


def check_prefix_containment(S1: FiniteSystem, S2: FiniteSystem, depth: int,
                             node_limit: int = DEFAULT_NODE_LIMIT) -> ContainmentResult:
    """EPrefs(S1) up to ``depth`` inputs is contained in EPrefs(S2); else a shortest witness."""
    layer = []
    for y in S1.outputs:
        a = S1.restrict(S1.initial, y)
        if not a:
            continue
        b = S2.restrict(S2.initial, y) if y in S2.outputs else frozenset()
        if not b:
            return ContainmentResult(False, (y,))
        layer.append(((y,), a, b))
    seen = {(a, b) for _, a, b in layer}
    nodes = len(layer)
    for _ in range(depth):
        nxt = []
        for nu, a, b in layer:
            for u in S1.inputs:
                pa = S1.post(a, u)
                if not pa:
                    continue
                pb = S2.post(b, u) if u in S2.inputs else frozenset()
                for y in S1.outputs:
                    a2 = S1.restrict(pa, y)
                    if not a2:
                        continue
                    b2 = S2.restrict(pb, y) if y in S2.outputs else frozenset()
                    if not b2:
                        return ContainmentResult(False, nu + (u, y))
                    if (a2, b2) not in seen:
                        seen.add((a2, b2))
                        nxt.append((nu + (u, y), a2, b2))
                        nodes += 1
                        if nodes > node_limit:
                            raise ResourceBudgetExceeded("prefix containment search too large")
        layer = nxt
        if not layer:
            break
    return ContainmentResult(True)


def _graph(S: FiniteSystem, relabel=None) -> nx.DiGraph:
    relabel = relabel or {}
    g = nx.DiGraph()
    for x in S.states:
        y = S.output_map[x]
        g.add_node(x, output=relabel.get(y, y), initial=x in S.initial)
    for (x, u), targets in S.transitions.items():
        for t in targets:
            if g.has_edge(x, t):
                g[x][t]["inputs"] = g[x][t]["inputs"] | {u}
            else:
                g.add_edge(x, t, inputs=frozenset({u}))
    return g


def isomorphism(S1: FiniteSystem, S2: FiniteSystem, relabel_outputs=None) -> dict | None:
    """A state bijection preserving outputs, initial states and labelled edges, or None.

    ``relabel_outputs`` maps outputs of S2 onto outputs of S1 before comparing.
    """
    if len(S1.states) != len(S2.states):
        return None
    g1, g2 = _graph(S1), _graph(S2, relabel_outputs)
    matcher = DiGraphMatcher(
        g1, g2,
        node_match=lambda a, b: a["output"] == b["output"] and a["initial"] == b["initial"],
        edge_match=lambda a, b: a["inputs"] == b["inputs"],
    )
    for m in matcher.isomorphisms_iter():
        return dict(m)
    return None
