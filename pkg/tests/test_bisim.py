import pytest

from ofabs.bisim import (bisimulation_quotient, block_of, image_condition_holds, is_stable,
                         quotient_system)
from ofabs.errors import NotSupported
from ofabs.ka import knowledge_abstraction
from ofabs.models import fig3_chain, fig4_modules
from ofabs.regions import FiniteRegion, IndexedRegion, IndexSet
from ofabs.relations import AbstractionMap, check_sound_abstraction, isomorphism
from ofabs.systems import FiniteSystem, external_prefixes

from goldens import chain_quotient_knowledge
from oracles import path_prefixes, systems

RANDOM = systems(seed=5, count=60, max_states=7)


def edges(sys):
    return sorted((x, u, t) for (x, u), ts in sys.transitions.items() for t in ts)


def test_chain_quotient_has_three_blocks():
    res = bisimulation_quotient(fig3_chain())
    q = res.quotient
    assert res.terminated
    assert sorted(q.states) == ["a[1+0*i]", "a[2+0*i]", "b[1+1*i]"]
    assert q.initial == {"a[1+0*i]", "a[2+0*i]"}
    assert edges(q) == [("a[1+0*i]", "u", "b[1+1*i]"), ("a[2+0*i]", "u", "a[2+0*i]"),
                        ("b[1+1*i]", "u", "a[2+0*i]"), ("b[1+1*i]", "u", "b[1+1*i]")]
    assert is_stable(fig3_chain(), list(res.blocks.values()))


def test_knowledge_abstraction_of_the_quotient():
    q = bisimulation_quotient(fig3_chain()).quotient
    res = knowledge_abstraction(q)
    assert res.terminated
    assert isomorphism(res.abstraction, chain_quotient_knowledge()) is not None


def test_truncated_chain_quotient_matches_symbolic_one():
    q = bisimulation_quotient(fig3_chain(6)).quotient
    assert len(q.states) == 3
    assert block_of(bisimulation_quotient(fig3_chain()),
                    IndexedRegion({"b": IndexSet({4})})) == "b[1+1*i]"


def test_oracle_dependent_predecessors_are_refused():
    with pytest.raises(NotSupported):
        bisimulation_quotient(fig4_modules(), budget=5)


@pytest.mark.parametrize("sys", RANDOM)
def test_random_quotients_are_stable_and_trace_equivalent(sys):
    res = bisimulation_quotient(sys)
    blocks = list(res.blocks.values())
    assert res.terminated and is_stable(sys, blocks)
    assert external_prefixes(res.quotient, 5) == path_prefixes(sys, 5)
    alpha = AbstractionMap.from_function(
        {x: name for name, b in res.blocks.items() for x in b.elems})
    assert check_sound_abstraction(sys, res.quotient, alpha).passed


def test_image_condition_is_stronger_than_stability():
    # x branches under u into two singleton blocks sharing an output
    s = FiniteSystem(["x", "y", "z"], ["x"], ["u"], ["A", "B"],
                     {"x": "A", "y": "B", "z": "B"},
                     {("x", "u"): {"y", "z"}, ("y", "u"): {"y"}, ("z", "u"): {"x"}})
    blocks = [FiniteRegion({"x"}), FiniteRegion({"y"}), FiniteRegion({"z"})]
    assert is_stable(s, blocks)
    assert not image_condition_holds(s, blocks)


def test_quotient_of_the_identity_partition_is_isomorphic():
    s = RANDOM[0]
    q, _ = quotient_system(s, [FiniteRegion({x}) for x in s.states])
    assert isomorphism(q, s) is not None
