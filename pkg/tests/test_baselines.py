from fractions import Fraction as Q

import pytest

from ofabs.baselines import GridSpec, grid_abstraction, history_name, l_complete_abstraction
from ofabs.errors import BadParams, GridViolatesOutputMap
from ofabs.models import PSI1, fig3_chain, sigma1, sigma2
from ofabs.relations import check_prefix_containment
from ofabs.synth import AbstractStrategy, solve
from ofabs.systems import Specification, external_prefixes

from goldens import CHAIN_HISTORY_EDGES, CHAIN_HISTORY_STATES
from oracles import path_prefixes, systems

PSI1_FROM_Y00 = Specification.gbuchi(PSI1, start=["y00"])


@pytest.mark.parametrize("eta,winning", [("1", False), ("1/2", False), ("1/4", False),
                                         ("1/5", True), ("1/10", True)])
def test_grid_controller_exists_only_on_the_step_lattice(eta, winning):
    g = grid_abstraction(sigma1(), Q(eta))
    assert len(g.states) == (3 / Q(eta)) ** 2
    assert isinstance(solve(g, PSI1_FROM_Y00), AbstractStrategy) == winning


def test_grid_cells_straddling_outputs_are_rejected():
    with pytest.raises(GridViolatesOutputMap):
        grid_abstraction(sigma1(), Q(3, 10))
    for eta in ("1", "1/2", "1/5"):
        with pytest.raises(GridViolatesOutputMap):
            grid_abstraction(sigma2(), Q(eta))
    with pytest.raises(BadParams):
        GridSpec(Q(2, 7), 3)
    with pytest.raises(BadParams):
        GridSpec(0, 3)


def test_grid_successors_cover_every_translate():
    g = grid_abstraction(sigma1(), Q(1, 5))
    assert g.succ("g0_0", "u1") == {"g2_2"}
    assert g.succ("g0_0", "u2") == {"g13_13"}
    g = grid_abstraction(sigma1(), Q(1, 4))
    assert g.succ("g0_0", "u1") == {"g1_1", "g1_2", "g2_1", "g2_2"}


def test_chain_histories_of_length_two():
    a = l_complete_abstraction(fig3_chain(6), 2)
    assert sorted(a.states) == CHAIN_HISTORY_STATES
    assert a.initial == {"A"}
    assert sorted((x, t) for (x, _), ts in a.transitions.items() for t in ts) == CHAIN_HISTORY_EDGES


def test_history_names():
    assert history_name(("A", "u", "B"), True) == "AuB"
    assert history_name(("y00", "u1", "y01"), False) == "y00.u1.y01"


@pytest.mark.parametrize("l", [1, 2, 3])
def test_l_complete_contains_the_concrete_prefixes(l):
    for s in systems(seed=8, count=30, max_states=5):
        a = l_complete_abstraction(s, l)
        assert check_prefix_containment(s, a, 5)


def test_l_complete_is_exact_when_outputs_name_states():
    s = systems(seed=8, count=1, max_states=1)[0]
    assert external_prefixes(l_complete_abstraction(s, 1), 4) == path_prefixes(s, 4)
    with pytest.raises(BadParams):
        l_complete_abstraction(s, 0)
