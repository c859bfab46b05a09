"""Small automata drawn by hand from the worked examples."""

from ofabs.systems import FiniteSystem


def fig4_hat():
    names = ["A", "Bo", "Be", "Co", "Ce", "D", "E", "F", "G"]
    out = {"A": "A", "Bo": "B", "Be": "B", "Co": "C", "Ce": "C",
           "D": "D", "E": "E", "F": "F", "G": "G"}
    pairs = [("A", "Bo"), ("Bo", "Be"), ("Be", "Bo"), ("Bo", "Co"), ("Be", "Ce"),
             ("Co", "D"), ("Ce", "E"), ("D", "F"), ("D", "G"), ("E", "F"), ("E", "G"),
             ("F", "F"), ("G", "G")]
    trans = {}
    for a, b in pairs:
        trans.setdefault((a, "u"), set()).add(b)
    return FiniteSystem(names, ["A"], ["u"], sorted(set(out.values())), out, trans)


def chain_quotient_knowledge():
    return FiniteSystem(
        ["A12", "A2", "B"], ["A12"], ["u"], ["A", "B"],
        {"A12": "A", "A2": "A", "B": "B"},
        {("A12", "u"): {"A2", "B"}, ("A2", "u"): {"A2"}, ("B", "u"): {"A2", "B"}})


CHAIN_HISTORY_STATES = ["A", "AA", "AB", "BA", "BB"]
CHAIN_HISTORY_EDGES = [("A", "AA"), ("A", "AB"), ("AA", "AA"), ("AB", "BA"), ("AB", "BB"),
                       ("BA", "AA"), ("BB", "BA"), ("BB", "BB")]
