"""Backward partition refinement to the coarsest stable, output-respecting partition."""

from __future__ import annotations

from dataclasses import dataclass

from .regions import FiniteRegion, FiniteSymbolic, Region, as_symbolic
from .systems import FiniteSystem


@dataclass
class BisimResult:
    quotient: FiniteSystem
    blocks: dict         # abstract state name -> Region
    terminated: bool
    iterations: int


def _order(regions):
    # smallest first; for finite sets that is cardinality, otherwise text length
    return sorted(regions, key=lambda r: (len(r) if isinstance(r, FiniteRegion) else len(r.key()), r.key()))


def _refine_finite(sys: FiniteSystem, blocks: list, budget: int):
    block_of = {}
    for i, b in enumerate(blocks):
        for x in b.elems:
            block_of[x] = i
    iterations = 0
    terminated = False
    while iterations < budget:
        iterations += 1
        sigs: dict = {}
        for x in sys.states:
            sig = (block_of[x],) + tuple(
                frozenset(block_of[x2] for x2 in sys.succ(x, u)) for u in sys.inputs)
            sigs.setdefault(sig, []).append(x)
        if len(sigs) == len(blocks):
            terminated = True
            break
        blocks = _order(FiniteRegion(xs) for xs in sigs.values())
        block_of = {x: i for i, b in enumerate(blocks) for x in b.elems}
    return blocks, terminated, iterations


def _refine_symbolic(sys, blocks: list, budget: int):
    iterations = 0
    terminated = False
    while iterations < budget:
        iterations += 1
        splitters = [(s, u, sys.pre(s, u)) for s in blocks for u in sys.inputs]
        new_blocks = []
        for b in blocks:
            pieces = [b]
            for _, _, p in splitters:
                nxt = []
                for piece in pieces:
                    inside = piece.intersect(p)
                    if inside.is_empty() or inside == piece:
                        nxt.append(piece)
                    else:
                        nxt.append(inside)
                        nxt.append(sys.difference(piece, p))
                pieces = nxt
            new_blocks.extend(pieces)
        if len(new_blocks) == len(blocks):
            terminated = True
            break
        blocks = _order(new_blocks)
    return blocks, terminated, iterations


def is_stable(system, blocks) -> bool:
    """Every block lies entirely inside or outside each u-predecessor set of each block."""
    sys = as_symbolic(system)
    for s in blocks:
        for u in sys.inputs:
            p = sys.pre(s, u)
            for b in blocks:
                inside = b.intersect(p)
                if not (inside.is_empty() or inside == b):
                    return False
    return True


def image_condition_holds(system, blocks) -> bool:
    """Block-image form: F(b,u) ∩ H^{-1}(y') ⊆ b' or F(b,u) ∩ b' = ∅ for all b, b', u.

    This is stronger than :func:`is_stable`; nondeterministic branching into
    two blocks with the same output violates it even for singleton blocks.
    """
    sys = as_symbolic(system)
    for b in blocks:
        for u in sys.inputs:
            img = sys.post(b, u)
            for b2 in blocks:
                y2 = sys.output_of(b2)
                part = sys.restrict_output(img, y2)
                if not (part.subset(b2) or img.intersect(b2).is_empty()):
                    return False
    return True


def quotient_system(system, blocks: list) -> tuple:
    sys = as_symbolic(system)
    names = [b.key() for b in blocks]
    x0 = sys.initial_region()
    trans: dict = {}
    for u in sys.inputs:
        pres = [sys.pre(b2, u) for b2 in blocks]
        for i, b in enumerate(blocks):
            targets = {names[j] for j, p in enumerate(pres) if not b.intersect(p).is_empty()}
            if targets:
                trans[(names[i], u)] = targets
    quotient = FiniteSystem(
        states=names,
        initial={names[i] for i, b in enumerate(blocks) if not b.intersect(x0).is_empty()},
        inputs=sys.inputs,
        outputs=sys.outputs,
        output_map={names[i]: sys.output_of(b) for i, b in enumerate(blocks)},
        transitions=trans,
    )
    return quotient, dict(zip(names, blocks))


def bisimulation_quotient(system, budget: int = 1000) -> BisimResult:
    if budget < 1:
        raise ValueError("budget must be at least 1")
    sys = as_symbolic(system)
    blocks = _order(sys.output_partition().values())
    if isinstance(sys, FiniteSymbolic):
        blocks, terminated, iterations = _refine_finite(sys.system, blocks, budget)
    else:
        blocks, terminated, iterations = _refine_symbolic(sys, blocks, budget)
    quotient, named = quotient_system(sys, blocks)
    return BisimResult(quotient, named, terminated, iterations)


def block_of(result: BisimResult, region: Region):
    for name, b in result.blocks.items():
        if region.subset(b):
            return name
    return None
