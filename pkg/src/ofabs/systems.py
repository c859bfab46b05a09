"""Finite transition systems with outputs, their traces and JSON/DOT forms.

A system is the six-tuple (X, X0, U, F, Y, H).  States, inputs and outputs are
opaque strings kept in declared order; every algorithm iterates in that order
so results are reproducible.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .errors import (
    InitialSetViolatesOutputRespect,
    NonStrictTransition,
    OfabsError,
    ResourceBudgetExceeded,
    UndeclaredIdentifier,
)

DUMMY_STATE = "dummy"
DUMMY_OUTPUT = "DUMMY"
DEFAULT_NODE_LIMIT = 2_000_000

Prefix = tuple  # (y0, u0, y1, ..., yk)


@dataclass(frozen=True, eq=False)
class FiniteSystem:
    states: tuple
    initial: frozenset
    inputs: tuple
    outputs: tuple
    output_map: Mapping
    transitions: Mapping = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "output_map", dict(self.output_map))
        trans = {}
        for key, succ in self.transitions.items():
            succ = frozenset(succ)
            if succ:
                trans[key] = succ
        object.__setattr__(self, "transitions", trans)

    # -- basic queries -------------------------------------------------

    def succ(self, x, u) -> frozenset:
        return self.transitions.get((x, u), frozenset())

    def post(self, xs: Iterable, u) -> frozenset:
        out = set()
        for x in xs:
            out |= self.succ(x, u)
        return frozenset(out)

    def preimage(self, y) -> frozenset:
        return frozenset(x for x in self.states if self.output_map[x] == y)

    def restrict(self, xs: Iterable, y) -> frozenset:
        return frozenset(x for x in xs if self.output_map[x] == y)

    def enabled(self, x) -> frozenset:
        return frozenset(u for u in self.inputs if self.succ(x, u))

    def is_strict(self) -> bool:
        return all(self.succ(x, u) for x in self.states for u in self.inputs)

    def reachable(self) -> frozenset:
        seen = set(self.initial)
        todo = list(self.initial)
        while todo:
            x = todo.pop()
            for u in self.inputs:
                for x2 in self.succ(x, u):
                    if x2 not in seen:
                        seen.add(x2)
                        todo.append(x2)
        return frozenset(seen)

    def reachable_outputs(self) -> frozenset:
        return frozenset(self.output_map[x] for x in self.reachable())

    def edges(self):
        """All (x, u, x') triples in declared order."""
        for x in self.states:
            for u in self.inputs:
                for x2 in sorted(self.succ(x, u), key=self._state_index):
                    yield x, u, x2

    def _state_index(self, x):
        return self._order().get(x, len(self.states))

    def _order(self):
        cached = self.__dict__.get("_order_cache")
        if cached is None:
            cached = {x: i for i, x in enumerate(self.states)}
            object.__setattr__(self, "_order_cache", cached)
        return cached

    # -- validation ----------------------------------------------------

    def check(self, strict: bool = True, initial_respect: bool = True) -> "FiniteSystem":
        """Validate identifiers; ``strict`` and ``initial_respect`` add the concrete-system checks.

        Abstractions may legitimately fail both, so loaders for them switch these off.
        """
        states = set(self.states)
        inputs = set(self.inputs)
        outputs = set(self.outputs)
        if len(states) != len(self.states):
            raise UndeclaredIdentifier("duplicate state identifiers")
        if len(inputs) != len(self.inputs) or len(outputs) != len(self.outputs):
            raise UndeclaredIdentifier("duplicate input or output identifiers")
        if not self.inputs:
            raise UndeclaredIdentifier("input set is empty")
        for x in self.initial:
            if x not in states:
                raise UndeclaredIdentifier(f"initial state {x!r} not declared")
        for x in self.states:
            if x not in self.output_map:
                raise UndeclaredIdentifier(f"state {x!r} has no output")
        for x, y in self.output_map.items():
            if x not in states:
                raise UndeclaredIdentifier(f"output map mentions unknown state {x!r}")
            if y not in outputs:
                raise UndeclaredIdentifier(f"output {y!r} of state {x!r} not declared")
        for (x, u), succ in self.transitions.items():
            if x not in states:
                raise UndeclaredIdentifier(f"transition from unknown state {x!r}")
            if u not in inputs:
                raise UndeclaredIdentifier(f"transition on unknown input {u!r}")
            for x2 in succ:
                if x2 not in states:
                    raise UndeclaredIdentifier(f"transition to unknown state {x2!r}")
        if strict:
            for x in self.states:
                for u in self.inputs:
                    if not self.succ(x, u):
                        raise NonStrictTransition(x, u)
        if not initial_respect:
            return self
        init_outputs = {self.output_map[x] for x in self.initial}
        for x in self.states:
            if x not in self.initial and self.output_map[x] in init_outputs:
                raise InitialSetViolatesOutputRespect(self.output_map[x])
        return self

    # -- serialization -------------------------------------------------

    def to_json(self) -> dict:
        return {
            "states": list(self.states),
            "initial": [x for x in self.states if x in self.initial],
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "output_map": {x: self.output_map[x] for x in self.states},
            "transitions": [
                {"from": x, "input": u,
                 "to": sorted(self.succ(x, u), key=self._state_index)}
                for x in self.states for u in self.inputs if self.succ(x, u)
            ],
        }

    def to_dot(self, name: str = "S") -> str:
        ids = {x: f"n{i}" for i, x in enumerate(self.states)}
        lines = [f"digraph {json.dumps(name)} {{", "  rankdir=LR;"]
        for x in self.states:
            label = f"{x} | {self.output_map[x]}"
            shape = "doublecircle" if x in self.initial else "circle"
            lines.append(f"  {ids[x]} [label={json.dumps(label)}, shape={shape}];")
        grouped: dict = {}
        for x, u, x2 in self.edges():
            grouped.setdefault((x, x2), []).append(u)
        for (x, x2), us in grouped.items():
            lines.append(f"  {ids[x]} -> {ids[x2]} [label={json.dumps(','.join(us))}];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def parse_system(desc: Mapping) -> FiniteSystem:
    """Build a system from the JSON description without strictness checks."""
    try:
        trans: dict = {}
        for t in desc["transitions"]:
            key = (t["from"], t["input"])
            trans[key] = frozenset(trans.get(key, frozenset())) | frozenset(t["to"])
        return FiniteSystem(
            states=desc["states"],
            initial=desc["initial"],
            inputs=desc["inputs"],
            outputs=desc["outputs"],
            output_map=desc["output_map"],
            transitions=trans,
        )
    except (KeyError, TypeError) as exc:
        raise UndeclaredIdentifier(f"malformed system description: {exc}") from exc


def validate(desc) -> FiniteSystem:
    """Parse (if needed) and check a system; rejects non-strict F."""
    sys = desc if isinstance(desc, FiniteSystem) else parse_system(desc)
    return sys.check(strict=True)


def load_abstraction(desc) -> FiniteSystem:
    """Parse an abstraction: identifiers are checked, strictness and X0 output respect are not."""
    sys = desc if isinstance(desc, FiniteSystem) else parse_system(desc)
    return sys.check(strict=False, initial_respect=False)


def make_system(states, initial, inputs, outputs, output_map, transitions,
                strict: bool = True) -> FiniteSystem:
    return FiniteSystem(states, initial, inputs, outputs, output_map,
                        transitions).check(strict=strict)


def input_complete(sys) -> FiniteSystem:
    """Redirect every missing transition to a fresh observable sink state."""
    if not isinstance(sys, FiniteSystem):
        sys = parse_system(sys)
    sys.check(strict=False)
    missing = [(x, u) for x in sys.states for u in sys.inputs if not sys.succ(x, u)]
    if not missing:
        return sys
    if DUMMY_STATE in sys.states or DUMMY_OUTPUT in sys.outputs:
        raise UndeclaredIdentifier("identifier 'dummy'/'DUMMY' already in use")
    trans = dict(sys.transitions)
    for key in missing:
        trans[key] = frozenset({DUMMY_STATE})
    for u in sys.inputs:
        trans[(DUMMY_STATE, u)] = frozenset({DUMMY_STATE})
    out_map = dict(sys.output_map)
    out_map[DUMMY_STATE] = DUMMY_OUTPUT
    return FiniteSystem(
        states=sys.states + (DUMMY_STATE,),
        initial=sys.initial,
        inputs=sys.inputs,
        outputs=sys.outputs + (DUMMY_OUTPUT,),
        output_map=out_map,
        transitions=trans,
    ).check()


# -- trace semantics ---------------------------------------------------

def initial_knowledge(sys: FiniteSystem) -> dict:
    """Map each observable initial output to X0 restricted to it."""
    out = {}
    for y in sys.outputs:
        cell = sys.restrict(sys.initial, y)
        if cell:
            out[(y,)] = cell
    return out


def external_prefixes(sys: FiniteSystem, depth: int,
                      node_limit: int = DEFAULT_NODE_LIMIT) -> set:
    """All external prefixes with at most ``depth`` inputs, by breadth-first search."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    level = initial_knowledge(sys)
    result = set(level)
    for _ in range(depth):
        nxt = {}
        for prefix, cell in level.items():
            for u in sys.inputs:
                succ = sys.post(cell, u)
                for y in sys.outputs:
                    c2 = sys.restrict(succ, y)
                    if c2:
                        nxt[prefix + (u, y)] = c2
        result.update(nxt)
        if len(result) > node_limit:
            raise ResourceBudgetExceeded(f"more than {node_limit} prefixes")
        level = nxt
    return result


def last_states(sys: FiniteSystem, nu: Prefix) -> frozenset:
    """States reachable along a path whose external sequence is ``nu``."""
    if not nu or len(nu) % 2 == 0:
        raise OfabsError("an external prefix has odd length and starts with an output")
    cell = sys.restrict(sys.initial, nu[0])
    for k in range(1, len(nu), 2):
        if not cell:
            break
        cell = sys.restrict(sys.post(cell, nu[k]), nu[k + 1])
    return cell


def truncate(prefixes: Iterable, depth: int) -> set:
    """Cut every prefix to at most ``depth`` inputs."""
    return {p[: 2 * depth + 1] for p in prefixes}


# -- specifications ----------------------------------------------------

@dataclass(frozen=True)
class Specification:
    kind: str
    forbidden: frozenset = frozenset()
    target: frozenset = frozenset()
    families: tuple = ()
    start: frozenset = frozenset()      # initial outputs the controller must handle; empty = all

    def __post_init__(self):
        object.__setattr__(self, "start", frozenset(self.start))
        object.__setattr__(self, "forbidden", frozenset(self.forbidden))
        object.__setattr__(self, "target", frozenset(self.target))
        object.__setattr__(self, "families", tuple(frozenset(f) for f in self.families))
        if self.kind not in ("safety", "reachability", "gbuchi"):
            raise OfabsError(f"unknown specification kind {self.kind!r}")
        if self.kind == "gbuchi" and not self.families:
            raise OfabsError("generalized Buchi specification needs at least one family")

    @classmethod
    def safety(cls, forbidden, start=()):
        return cls("safety", forbidden=forbidden, start=start)

    @classmethod
    def reachability(cls, target, start=()):
        return cls("reachability", target=target, start=start)

    @classmethod
    def gbuchi(cls, families, start=()):
        return cls("gbuchi", families=families, start=start)

    def outputs_used(self) -> frozenset:
        used = set(self.forbidden) | set(self.target) | set(self.start)
        for f in self.families:
            used |= f
        return frozenset(used)

    def check_against(self, outputs) -> "Specification":
        unknown = self.outputs_used() - set(outputs)
        if unknown:
            raise UndeclaredIdentifier(f"specification mentions unknown outputs {sorted(unknown)}")
        return self

    def to_json(self) -> dict:
        if self.kind == "safety":
            d = {"kind": "safety", "forbidden": sorted(self.forbidden)}
        elif self.kind == "reachability":
            d = {"kind": "reachability", "target": sorted(self.target)}
        else:
            d = {"kind": "gbuchi", "families": [sorted(f) for f in self.families]}
        if self.start:
            d["start"] = sorted(self.start)
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> "Specification":
        kind = d.get("kind")
        start = d.get("start", [])
        if kind == "safety":
            return cls.safety(d.get("forbidden", []), start)
        if kind == "reachability":
            return cls.reachability(d.get("target", []), start)
        if kind == "gbuchi":
            return cls.gbuchi(d.get("families", []), start)
        raise OfabsError(f"unknown specification kind {kind!r}")
