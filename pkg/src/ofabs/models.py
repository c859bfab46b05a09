"""Built-in example systems."""

from __future__ import annotations

from collections.abc import Callable
from fractions import Fraction

from .errors import BadParams, UnknownModel
from .regions import GeoRegion, IndexedRegion, IndexedSystem, IndexSet, Rule, TranslationSystem
from .systems import FiniteSystem, make_system

# -- chain with a reflecting B-segment -----------------------------------


def fig3_chain(n: int | None = None):
    """a1 -> b1, b_i <-> b_{i+1}, every b_i -> a2, a2 -> a2; a1 and a2 initial.

    With ``n`` the chain is cut after b_n, otherwise the symbolic family is returned.
    """
    if n is None:
        nat = IndexSet.at_least(1)
        return IndexedSystem(
            families={"a": IndexSet({1, 2}), "b": nat},
            outputs={"a": "A", "b": "B"},
            initial=IndexedRegion({"a": IndexSet({1, 2})}),
            inputs=["u"],
            rules=[
                Rule("a", IndexSet({1}), "u", ("b",)),
                Rule("a", IndexSet({2}), "u", ("a",)),
                Rule("b", nat, "u", ("a",), const=2),
                Rule("b", nat, "u", ("b",), shift=1),
                Rule("b", IndexSet.at_least(2), "u", ("b",), shift=-1),
            ],
            output_order=["A", "B"],
        ).check()
    if n < 1:
        raise BadParams("fig3 chain needs n >= 1")
    bs = [f"b{i}" for i in range(1, n + 1)]
    trans = {("a1", "u"): {"b1"}, ("a2", "u"): {"a2"}}
    for i in range(1, n + 1):
        nxt = {"a2"}
        if i < n:
            nxt.add(f"b{i + 1}")
        if i > 1:
            nxt.add(f"b{i - 1}")
        trans[(f"b{i}", "u")] = nxt
    return make_system(
        states=["a1", "a2"] + bs,
        initial=["a1", "a2"],
        inputs=["u"],
        outputs=["A", "B"],
        output_map={"a1": "A", "a2": "A", **{b: "B" for b in bs}},
        transitions=trans,
    )


# -- chain with irregularly sequenced modules -----------------------------


def thue_morse(i: int) -> str:
    return "I" if bin(i).count("1") % 2 == 0 else "II"


def all_class_one(i: int) -> str:
    return "I"


def all_class_two(i: int) -> str:
    return "II"


def alternating_pairs(i: int) -> str:
    return "I" if (i // 2) % 2 == 0 else "II"


ORACLES: dict = {
    "thue_morse": thue_morse,
    "all_I": all_class_one,
    "all_II": all_class_two,
    "alternating_pairs": alternating_pairs,
}


def _oracle(spec) -> Callable:
    if callable(spec):
        return spec
    try:
        return ORACLES[spec]
    except KeyError:
        raise BadParams(f"unknown class oracle {spec!r}; known: {sorted(ORACLES)}") from None


def fig4_modules(oracle="thue_morse", n: int | None = None):
    """a1 -> b1, b-chain as in :func:`fig3_chain` without the A-sink, b_i -> c_i.

    c_i leads to a D-type module for odd i and an E-type module for even i.
    A class I module is one state branching to f_i and g_i; class II is a
    left/right pair going to f_i and g_i separately.  f_i and g_i self-loop.
    The oracle picks the class of the module at index i.

    Without ``n`` the symbolic family is returned; it covers every oracle at
    once because regions never name a class.
    """
    cls_of = _oracle(oracle)
    if n is None:
        nat = IndexSet.at_least(1)
        odd = IndexSet.parity(True, 1)
        even = IndexSet.parity(False, 1)
        fams = {"a": IndexSet({1}), "b": nat, "c": nat, "f": nat, "g": nat,
                "d": odd, "dl": odd, "dr": odd, "e": even, "el": even, "er": even}
        outs = {"a": "A", "b": "B", "c": "C", "d": "D", "dl": "D", "dr": "D",
                "e": "E", "el": "E", "er": "E", "f": "F", "g": "G"}
        rules = [
            Rule("a", IndexSet({1}), "u", ("b",)),
            Rule("b", nat, "u", ("b",), shift=1),
            Rule("b", IndexSet.at_least(2), "u", ("b",), shift=-1),
            Rule("b", nat, "u", ("c",)),
            Rule("c", odd, "u", ("d", "dl", "dr")),
            Rule("c", even, "u", ("e", "el", "er")),
        ]
        for m, dom in (("d", odd), ("e", even)):
            rules += [
                Rule(m, dom, "u", ("f",)),
                Rule(m, dom, "u", ("g",)),
                Rule(m + "l", dom, "u", ("f",)),
                Rule(m + "r", dom, "u", ("g",)),
            ]
        rules += [Rule("f", nat, "u", ("f",)), Rule("g", nat, "u", ("g",))]
        sys = IndexedSystem(fams, outs, IndexedRegion({"a": IndexSet({1})}), ["u"], rules,
                            output_order=["A", "B", "C", "D", "E", "F", "G"]).check()
        sys.oracle = cls_of
        return sys
    if n < 1:
        raise BadParams("fig4 truncation needs n >= 1")
    states = ["a1"]
    out = {"a1": "A"}
    trans: dict = {("a1", "u"): {"b1"}}
    for i in range(1, n + 1):
        b, c, f, g = f"b{i}", f"c{i}", f"f{i}", f"g{i}"
        kind = "d" if i % 2 else "e"
        y = kind.upper()
        states += [b, c]
        out.update({b: "B", c: "C", f: "F", g: "G"})
        trans[(b, "u")] = {c} | ({f"b{i + 1}"} if i < n else set()) | ({f"b{i - 1}"} if i > 1 else set())
        klass = cls_of(i)
        if klass == "I":
            m = f"{kind}{i}"
            states.append(m)
            out[m] = y
            trans[(c, "u")] = {m}
            trans[(m, "u")] = {f, g}
        elif klass == "II":
            ml, mr = f"{kind}l{i}", f"{kind}r{i}"
            states += [ml, mr]
            out.update({ml: y, mr: y})
            trans[(c, "u")] = {ml, mr}
            trans[(ml, "u")] = {f}
            trans[(mr, "u")] = {g}
        else:
            raise BadParams(f"oracle returned {klass!r} for index {i}; expected 'I' or 'II'")
        states += [f, g]
        trans[(f, "u")] = {f}
        trans[(g, "u")] = {g}
    return make_system(states, ["a1"], ["u"], list("ABCDEFG"), out, trans)


# -- diagonal flows on the torus ----------------------------------------

SIGMA_WIDTH = 3
SIGMA_STEP = Fraction(2, 5)


def _sigma_moves():
    return {"u1": (SIGMA_STEP, SIGMA_STEP), "u2": (-SIGMA_STEP, -SIGMA_STEP)}


def _unit_boxes():
    return {f"y{i}{j}": GeoRegion.box(SIGMA_WIDTH, (i, i + 1), (j, j + 1))
            for i in range(3) for j in range(3)}


def sigma1() -> TranslationSystem:
    """x' = (x ± (0.4, 0.4)) mod 3; output y_ij on [i, i+1) x [j, j+1)."""
    return TranslationSystem(SIGMA_WIDTH, _sigma_moves(), _unit_boxes(), name="sigma1").check()


def sigma2() -> TranslationSystem:
    """As :func:`sigma1`, but the y22 box is split along its diagonal.

    y22u is the part with x2 > x1, y22l the part with x1 >= x2.
    """
    outs = _unit_boxes()
    del outs["y22"]
    w = SIGMA_WIDTH
    outs["y22u"] = GeoRegion.box(w, (2, 3), (2, 3), (-w, 0))
    outs["y22l"] = GeoRegion.box(w, (2, 3), (2, 3), (0, w))
    return TranslationSystem(w, _sigma_moves(), outs, name="sigma2").check()


PSI1 = [["y00"], ["y22"]]
PSI2 = [["y00"], ["y22u", "y22l"]]


# -- tank ---------------------------------------------------------------


def tank_output(level: Fraction, outlet: bool) -> str:
    """Sensors l0..lk are wet for k = floor(level); the outlet bit is observable."""
    return f"l{int(level)}/o{int(outlet)}"


def tank(levels: int = 6, inflow=Fraction(1, 2), outflow=Fraction(3, 10),
         resolution=Fraction(1, 10), initial_levels=(1,)) -> FiniteSystem:
    """Water level on the exact ``resolution`` lattice of [0, levels).

    Input "+" opens the inlet, "0" closes it; an open outlet (bit o) drains
    ``outflow``.  The next outlet bit is chosen by the environment.  The level
    saturates at both ends of the range.
    """
    inflow, outflow, resolution = Fraction(inflow), Fraction(outflow), Fraction(resolution)
    steps = levels / resolution
    if levels < 1 or steps.denominator != 1:
        raise BadParams("levels must be a positive multiple of the resolution")
    for v in (inflow, outflow):
        if (v / resolution).denominator != 1:
            raise BadParams("flows must lie on the resolution lattice")
    grid = [k * resolution for k in range(int(steps))]
    top = grid[-1]

    def name(level, o):
        return f"{level}|{int(o)}"

    states, out, trans = [], {}, {}
    for level in grid:
        for o in (False, True):
            x = name(level, o)
            states.append(x)
            out[x] = tank_output(level, o)
            for u in ("+", "0"):
                nxt = level + (inflow if u == "+" else 0) - (outflow if o else 0)
                nxt = min(max(nxt, Fraction(0)), top)
                trans[(x, u)] = {name(nxt, False), name(nxt, True)}
    outputs = [f"l{k}/o{b}" for k in range(levels) for b in (0, 1)]
    initial = [name(level, o) for level in grid for o in (False, True)
               if int(level) in set(initial_levels)]
    return make_system(states, initial, ["+", "0"], outputs, out, trans)


def tank_overflow_outputs(levels: int = 6) -> list:
    top = levels - 1
    return [f"l{top}/o0", f"l{top}/o1"]


# -- catalog ------------------------------------------------------------

CATALOG = ("fig3", "fig4", "sigma1", "sigma2", "tank")


def build(name: str, params: dict | None = None):
    params = dict(params or {})
    if name in ("fig3", "fig3_chain"):
        make = lambda n=None: fig3_chain(_opt_int(n))
    elif name in ("fig4", "fig4_modules"):
        make = lambda oracle="thue_morse", n=None: fig4_modules(oracle, _opt_int(n))
    elif name == "sigma1":
        make = sigma1
    elif name == "sigma2":
        make = sigma2
    elif name == "tank":
        def make(levels=6, **kw):
            return tank(int(levels), **{k: Fraction(v) for k, v in kw.items()})
    else:
        raise UnknownModel(f"unknown model {name!r}; known: {', '.join(CATALOG)}")
    try:
        return make(**params)
    except TypeError as e:
        raise BadParams(f"bad parameters for {name}: {e}") from None


def _opt_int(v):
    if v is None:
        return None
    try:
        return int(v)
    except (TypeError, ValueError):
        raise BadParams(f"expected an integer, got {v!r}") from None
