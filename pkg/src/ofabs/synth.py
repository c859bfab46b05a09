"""Controller synthesis on finite abstractions and its output-feedback refinement.

Games are played on a finite system: the controller picks an input enabled at
the current state, the environment resolves nondeterminism adversarially.  An
input with no successor is not available, and a state with no available input
is losing.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import NonDeterministicKnowledge, OfabsError
from .systems import FiniteSystem, Specification


@dataclass
class AbstractStrategy:
    """Finite-memory strategy; memory m is the index of the family being chased."""

    system: FiniteSystem
    memory: int
    move: dict                  # (memory, state) -> input
    winning: frozenset
    families: tuple = ()        # state sets; empty for safety/reachability
    start: frozenset = frozenset()

    def update(self, m: int, x) -> int:
        if self.families and x in self.families[m]:
            return (m + 1) % self.memory
        return m

    def choose(self, m: int, x):
        try:
            return self.move[(m, x)]
        except KeyError:
            raise OfabsError(f"no move for state {x!r} in memory {m}") from None

    def to_json(self) -> dict:
        return {
            "memory": self.memory,
            "winning": sorted(self.winning),
            "start": sorted(self.start),
            "families": [sorted(f) for f in self.families],
            "move": [{"memory": m, "state": x, "input": u}
                     for (m, x), u in sorted(self.move.items())],
        }

    @classmethod
    def from_json(cls, system: FiniteSystem, d: dict) -> "AbstractStrategy":
        return cls(
            system=system,
            memory=int(d["memory"]),
            move={(int(e["memory"]), e["state"]): e["input"] for e in d["move"]},
            winning=frozenset(d["winning"]),
            families=tuple(frozenset(f) for f in d.get("families", [])),
            start=frozenset(d.get("start", [])),
        )


@dataclass
class Unrealizable:
    witness: object             # an initial state outside the winning set
    winning: frozenset

    def __bool__(self):
        return False


# -- fixpoint machinery ---------------------------------------------------


def _enabled(sys: FiniteSystem, x):
    return [u for u in sys.inputs if sys.succ(x, u)]


def cpre(sys: FiniteSystem, target) -> frozenset:
    """States with an available input whose successors all lie in ``target``."""
    target = set(target)
    return frozenset(x for x in sys.states
                     if any(sys.succ(x, u) <= target for u in _enabled(sys, x)))


def _safe_move(sys, x, inside):
    for u in _enabled(sys, x):
        if sys.succ(x, u) <= inside:
            return u
    return None


def _attractor(sys, base, within):
    """Layers of the controllable attractor of ``base`` inside ``within``."""
    layers = [frozenset(base) & within]
    reached = set(layers[0])
    while True:
        nxt = frozenset(x for x in within - reached
                        if any(sys.succ(x, u) <= reached for u in _enabled(sys, x)))
        if not nxt:
            return layers
        layers.append(nxt)
        reached |= nxt


def _start_states(sys: FiniteSystem, start) -> list:
    init = [x for x in sys.states if x in sys.initial]
    if start:
        init = [x for x in init if sys.output_map[x] in start]
    return init


def _finish(sys, winning, move, memory, families, start):
    for x in _start_states(sys, start):
        if x not in winning:
            return Unrealizable(x, frozenset(winning))
    return AbstractStrategy(sys, memory, move, frozenset(winning), families, frozenset(start))


def solve_safety(sys: FiniteSystem, forbidden, start=()) -> AbstractStrategy | Unrealizable:
    forbidden = set(forbidden)
    win = frozenset(x for x in sys.states if sys.output_map[x] not in forbidden)
    while True:
        nxt = win & cpre(sys, win)
        if nxt == win:
            break
        win = nxt
    move = {(0, x): _safe_move(sys, x, win) for x in sys.states if x in win}
    return _finish(sys, win, move, 1, (), start)


def solve_reachability(sys: FiniteSystem, target, start=()) -> AbstractStrategy | Unrealizable:
    goal = frozenset(x for x in sys.states if sys.output_map[x] in set(target))
    layers = _attractor(sys, goal, frozenset(sys.states))
    move = {}
    below: set = set()
    for i, layer in enumerate(layers):
        for x in layer:
            if i == 0:
                en = _enabled(sys, x)
                if en:
                    move[(0, x)] = en[0]
            else:
                move[(0, x)] = _safe_move(sys, x, below)
        below |= layer
    win = frozenset(below)
    return _finish(sys, win, move, 1, (), start)


def solve_gbuchi(sys: FiniteSystem, families, start=()) -> AbstractStrategy | Unrealizable:
    """nu Z. AND_i mu Y. Z ∩ ((F_i ∩ CPre(Z)) ∪ CPre(Y))."""
    if not families:
        raise OfabsError("generalized Buchi objective needs at least one family")
    fams = tuple(frozenset(x for x in sys.states if sys.output_map[x] in set(f)) for f in families)
    z = frozenset(sys.states)
    while True:
        cz = cpre(sys, z)
        new_z = z
        for f in fams:
            layers = _attractor(sys, f & cz, z)
            new_z = new_z & frozenset().union(*layers)
        if new_z == z:
            break
        z = new_z
    move = {}
    cz = cpre(sys, z)
    for m, f in enumerate(fams):
        layers = _attractor(sys, f & cz, z)
        below: set = set()
        for i, layer in enumerate(layers):
            for x in layer:
                move[(m, x)] = _safe_move(sys, x, z if i == 0 else below)
            below |= layer
    return _finish(sys, z, move, len(fams), fams, start)


def solve(sys: FiniteSystem, spec: Specification, start=None):
    spec.check_against(sys.outputs)
    start = spec.start if start is None else start
    if spec.kind == "safety":
        return solve_safety(sys, spec.forbidden, start)
    if spec.kind == "reachability":
        return solve_reachability(sys, spec.target, start)
    return solve_gbuchi(sys, spec.families, start)


# -- output feedback --------------------------------------------------------


class ObserverDesync(OfabsError):
    def __init__(self, state, inp, output):
        super().__init__(f"no successor of {state!r} under {inp!r} with output {output!r}")
        self.state, self.input, self.output = state, inp, output


@dataclass
class OutputFeedbackController:
    strategy: AbstractStrategy
    initial: dict               # output -> abstract state
    step: dict                  # (state, input, output) -> state

    @property
    def system(self) -> FiniteSystem:
        return self.strategy.system

    def start(self, y):
        if y not in self.initial:
            raise ObserverDesync(None, None, y)
        return self.initial[y]

    def observe(self, xhat, u, y):
        try:
            return self.step[(xhat, u, y)]
        except KeyError:
            raise ObserverDesync(xhat, u, y) from None

    def to_json(self) -> dict:
        return {"strategy": self.strategy.to_json(),
                "initial": dict(sorted(self.initial.items()))}


def refine_controller(abstraction: FiniteSystem, strategy: AbstractStrategy) -> OutputFeedbackController:
    """Pair the strategy with an observer tracking the abstract state from (u, y)."""
    initial = {}
    for x in abstraction.states:
        if x in abstraction.initial:
            y = abstraction.output_map[x]
            if y in initial:
                raise NonDeterministicKnowledge(f"two initial states with output {y!r}")
            initial[y] = x
    step = {}
    for x in abstraction.states:
        for u in abstraction.inputs:
            for x2 in abstraction.succ(x, u):
                key = (x, u, abstraction.output_map[x2])
                if key in step and step[key] != x2:
                    raise NonDeterministicKnowledge(
                        f"{x!r} under {u!r} has two successors with output {key[2]!r}")
                step[key] = x2
    return OutputFeedbackController(strategy, initial, step)


def deterministic_per_output(sys: FiniteSystem) -> bool:
    seen_initial = set()
    for x in sys.states:
        if x in sys.initial:
            y = sys.output_map[x]
            if y in seen_initial:
                return False
            seen_initial.add(y)
    for (x, u), targets in sys.transitions.items():
        if len({sys.output_map[t] for t in targets}) != len(targets):
            return False
    return True


def output_feedback_game(abstraction: FiniteSystem, budget: int = 10_000) -> FiniteSystem:
    """The abstraction itself if an observer can track it, else its knowledge abstraction.

    Controllers synthesized on the result depend on the external history only.
    """
    if deterministic_per_output(abstraction):
        return abstraction
    from .ka import knowledge_abstraction
    ka = knowledge_abstraction(abstraction, budget=budget)
    if not ka.terminated:
        raise OfabsError("knowledge abstraction of the extracted system did not terminate")
    return ka.abstraction


@dataclass
class SimulationResult:
    trace: list = field(default_factory=list)   # {k, y, u, abstract_state}
    desync: dict | None = None
    verdict: dict = field(default_factory=dict)

    @property
    def outputs(self) -> list:
        return [r["y"] for r in self.trace]


def _gaps(outputs, families, steps):
    out = []
    for fam in families:
        last = -1
        worst = 0
        for k, y in enumerate(outputs):
            if y in fam:
                worst = max(worst, k - last)
                last = k
        out.append(worst if last >= 0 else steps + 1)
    return out


class _Concrete:
    """Uniform stepping over finite and geometric systems."""

    def __init__(self, sys, rng):
        self.sys = sys
        self.rng = rng
        self.finite = isinstance(sys, FiniteSystem)

    def output(self, x):
        return self.sys.output_map[x] if self.finite else self.sys.output_at(x)

    def step(self, x, u):
        if self.finite:
            succ = sorted(self.sys.succ(x, u))
            if not succ:
                raise OfabsError(f"concrete state {x!r} blocks input {u!r}")
            return self.rng.choice(succ)
        return self.sys.step(x, u)

    def sample_initial(self, outputs):
        if self.finite:
            pool = [x for x in self.sys.states if x in self.sys.initial
                    and (not outputs or self.sys.output_map[x] in outputs)]
            if not pool:
                raise OfabsError("no initial state matches the controller")
            return self.rng.choice(pool)
        from fractions import Fraction
        w = self.sys.width
        grain = 1000
        for _ in range(10_000):
            x = (Fraction(self.rng.randrange(int(w * grain)), grain),
                 Fraction(self.rng.randrange(int(w * grain)), grain))
            if self.sys.initial_region().contains_point(x) and (not outputs or self.output(x) in outputs):
                return x
        raise OfabsError("could not sample an initial state")


def simulate_closed_loop(sys, ctrl: OutputFeedbackController, steps: int, seed: int = 0,
                         initial=None, spec: Specification | None = None) -> SimulationResult:
    rng = random.Random(seed)
    plant = _Concrete(sys, rng)
    strat = ctrl.strategy
    starts = strat.start or frozenset(ctrl.initial)
    x = initial if initial is not None else plant.sample_initial(starts)
    res = SimulationResult()
    y = plant.output(x)
    try:
        xhat = ctrl.start(y)
    except ObserverDesync as e:
        res.desync = {"k": 0, "state": None, "input": None, "output": y}
        res.trace.append({"k": 0, "y": y, "u": None, "abstract_state": None})
        return _monitor(res, spec, strat, steps, str(e))
    m = 0
    for k in range(steps + 1):
        m = strat.update(m, xhat)
        u = strat.move.get((m, xhat)) if k < steps else None
        res.trace.append({"k": k, "y": y, "u": u, "abstract_state": xhat})
        if k == steps:
            break
        if u is None:
            res.desync = {"k": k, "state": xhat, "input": None, "output": y}
            break
        x = plant.step(x, u)
        y = plant.output(x)
        try:
            xhat = ctrl.observe(xhat, u, y)
        except ObserverDesync:
            res.desync = {"k": k + 1, "state": xhat, "input": u, "output": y}
            res.trace.append({"k": k + 1, "y": y, "u": None, "abstract_state": None})
            break
    return _monitor(res, spec, strat, steps)


def _monitor(res, spec, strat, steps, note=None):
    outs = res.outputs
    v: dict = {"steps": len(outs) - 1, "observer_desync": res.desync is not None}
    if spec is not None:
        if spec.kind == "safety":
            v["violations"] = sum(1 for y in outs if y in spec.forbidden)
        elif spec.kind == "reachability":
            v["reached"] = any(y in spec.target for y in outs)
        else:
            v["max_gap"] = _gaps(outs, spec.families, steps)
    if note:
        v["note"] = note
    res.verdict = v
    return res
