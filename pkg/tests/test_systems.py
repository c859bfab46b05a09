import json
import random

import pytest

from ofabs.errors import (InitialSetViolatesOutputRespect, NonStrictTransition, OfabsError,
                          UndeclaredIdentifier)
from ofabs.models import fig3_chain
from ofabs.systems import (FiniteSystem, Specification, external_prefixes, input_complete,
                           last_states, load_abstraction, parse_system, truncate, validate)

from oracles import path_prefixes, random_system


def small():
    return FiniteSystem(
        states=["x", "y", "z"],
        initial=["x"],
        inputs=["u", "v"],
        outputs=["A", "B"],
        output_map={"x": "A", "y": "B", "z": "B"},
        transitions={("x", "u"): {"y", "z"}, ("x", "v"): {"x"},
                     ("y", "u"): {"x"}, ("y", "v"): {"y"},
                     ("z", "u"): {"z"}, ("z", "v"): {"x"}},
    )


def test_json_round_trip():
    s = small()
    d = s.to_json()
    assert d["transitions"][0] == {"from": "x", "input": "u", "to": ["y", "z"]}
    again = validate(json.loads(json.dumps(d)))
    assert again.to_json() == d


def test_validate_rejects_non_strict():
    d = small().to_json()
    d["transitions"] = [t for t in d["transitions"] if (t["from"], t["input"]) != ("y", "v")]
    with pytest.raises(NonStrictTransition) as err:
        validate(d)
    assert (err.value.state, err.value.input) == ("y", "v")


def test_validate_rejects_initial_set_splitting_an_output():
    d = small().to_json()
    d["initial"] = ["y"]
    with pytest.raises(InitialSetViolatesOutputRespect) as err:
        validate(d)
    assert err.value.output == "B"


def test_abstraction_loader_skips_concrete_checks():
    d = small().to_json()
    d["initial"] = ["y"]
    d["transitions"] = d["transitions"][:2]
    sys = load_abstraction(d)
    assert sys.initial == {"y"}


@pytest.mark.parametrize("mutate", [
    lambda d: d["initial"].append("w"),
    lambda d: d["output_map"].update(x="C"),
    lambda d: d["transitions"].append({"from": "x", "input": "w", "to": ["x"]}),
    lambda d: d["transitions"].append({"from": "x", "input": "u", "to": ["w"]}),
    lambda d: d.pop("outputs"),
])
def test_undeclared_identifiers(mutate):
    d = small().to_json()
    mutate(d)
    with pytest.raises(UndeclaredIdentifier):
        validate(d)


def test_fig3_truncation_is_accepted():
    s = fig3_chain(5)
    assert len(s.states) == 7
    assert s.succ("b3", "u") == {"b2", "b4", "a2"}
    assert s.succ("b5", "u") == {"b4", "a2"}


def test_input_complete_adds_observable_sink():
    s = FiniteSystem(["x"], ["x"], ["u", "v"], ["A"], {"x": "A"}, {("x", "u"): {"x"}})
    c = input_complete(s)
    assert c.succ("x", "v") == {"dummy"}
    assert c.output_map["dummy"] == "DUMMY"
    assert c.is_strict()
    assert input_complete(c) is c


def test_external_prefixes_small():
    got = external_prefixes(small(), 1)
    assert got == {("A",), ("A", "u", "B"), ("A", "v", "A")}


def test_external_prefixes_match_path_oracle():
    rng = random.Random(7)
    for _ in range(40):
        s = random_system(rng)
        assert external_prefixes(s, 4) == path_prefixes(s, 4)


def test_last_states_and_truncate():
    s = small()
    assert last_states(s, ("A", "u", "B")) == {"y", "z"}
    assert last_states(s, ("A", "u", "B", "u", "A")) == {"x"}
    assert last_states(s, ("A", "u", "A")) == frozenset()
    with pytest.raises(OfabsError):
        last_states(s, ("A", "u"))
    assert truncate({("A", "u", "B", "v", "B")}, 1) == {("A", "u", "B")}


def test_dot_labels_states_with_outputs():
    dot = small().to_dot("S")
    assert '"x | A"' in dot and "doublecircle" in dot


def test_specification_json():
    spec = Specification.gbuchi([["A"], ["B"]], start=["A"])
    assert Specification.from_json(spec.to_json()) == spec
    assert Specification.from_json({"kind": "safety", "forbidden": ["B"]}).forbidden == {"B"}
    with pytest.raises(OfabsError):
        Specification.from_json({"kind": "parity"})
    with pytest.raises(OfabsError):
        Specification.gbuchi([])
    with pytest.raises(UndeclaredIdentifier):
        Specification.safety(["Q"]).check_against(["A", "B"])


def test_parse_system_merges_duplicate_transitions():
    d = small().to_json()
    d["transitions"].append({"from": "x", "input": "v", "to": ["y"]})
    assert parse_system(d).succ("x", "v") == {"x", "y"}
