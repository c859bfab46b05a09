"""Invariants over generated systems, shrunk by hypothesis on failure."""

import random

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from ofabs.bisim import bisimulation_quotient, is_stable
from ofabs.ka import knowledge_abstraction
from ofabs.kam import KAMConfig, kam
from ofabs.relations import check_prefix_containment
from ofabs.synth import solve_gbuchi, solve_reachability, solve_safety
from ofabs.systems import external_prefixes

from oracles import brute_gbuchi, brute_reachability, brute_safety, path_prefixes, random_system

SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def finite_systems(draw, max_states=8, strict=True):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_system(random.Random(seed), max_states=max_states, strict=strict)


@SETTINGS
@given(finite_systems())
def test_knowledge_abstraction_preserves_prefixes(sys):
    res = knowledge_abstraction(sys, budget=300)
    assert res.terminated
    assert external_prefixes(res.abstraction, 4) == path_prefixes(sys, 4)


@SETTINGS
@given(finite_systems())
def test_bisimulation_terminates_stable(sys):
    res = bisimulation_quotient(sys)
    assert res.terminated and is_stable(sys, list(res.blocks.values()))


@SETTINGS
@given(finite_systems())
def test_kam_fixpoint_over_approximates_prefixes(sys):
    res = kam(sys, KAMConfig(budget=40, termcond="exact"))
    assert res.terminated
    assert check_prefix_containment(sys, res.final.system, 6)


@SETTINGS
@given(finite_systems())
def test_kam_blocks_respect_outputs_and_contain_cells(sys):
    res = kam(sys, KAMConfig(budget=6, termcond="budget"))
    for n in res.exploration.nodes:
        assert n.c.subset(n.q)
        assert {sys.output_map[x] for x in n.q.elems} == {n.nu[-1]}


@SETTINGS
@given(finite_systems(max_states=6, strict=False))
def test_games_agree_with_enumeration(sys):
    assert solve_safety(sys, ["q"]).winning == brute_safety(sys, ["q"])
    assert solve_reachability(sys, ["r"]).winning == brute_reachability(sys, ["r"])
    assert solve_gbuchi(sys, [["p"], ["r"]]).winning == brute_gbuchi(sys, [["p"], ["r"]])
