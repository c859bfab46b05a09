"""Forward knowledge-based subset construction.

Each abstract state is a cell: the set of concrete states consistent with an
observed external history.  Cells are split by output after every step, so
the resulting abstraction is deterministic per output.
"""

from __future__ import annotations

from dataclasses import dataclass

from .regions import Region, as_symbolic
from .systems import FiniteSystem


@dataclass
class KAResult:
    abstraction: FiniteSystem
    cells: dict          # abstract state name -> Region
    terminated: bool
    iterations: int

    def cell_of(self, name) -> Region:
        return self.cells[name]


def successor_cells(sys, cell: Region, u) -> dict:
    """Non-empty F(cell, u) ∩ H^{-1}(y), keyed by y in declared order."""
    img = sys.post(cell, u)
    out = {}
    if img.is_empty():
        return out
    for y in sys.outputs:
        c2 = sys.restrict_output(img, y)
        if not c2.is_empty():
            out[y] = c2
    return out


def knowledge_abstraction(system, budget: int = 100) -> KAResult:
    """Run the subset construction for at most ``budget`` iterations."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    sys = as_symbolic(system)
    cells: list = []
    index: dict = {}

    def add(c):
        if c not in index:
            index[c] = len(cells)
            cells.append(c)
            return True
        return False

    initial = list(sys.initial_cells().values())
    for c in initial:
        add(c)

    succ_cache: dict = {}

    def succ(c, u):
        key = (index[c], u)
        if key not in succ_cache:
            succ_cache[key] = successor_cells(sys, c, u)
        return succ_cache[key]

    iterations = 0
    terminated = False
    while iterations < budget:
        iterations += 1
        before = len(cells)
        for c in cells[:before]:
            for u in sys.inputs:
                for c2 in succ(c, u).values():
                    add(c2)
        if len(cells) == before:
            terminated = True
            break

    names = [c.key() for c in cells]
    trans: dict = {}
    out_map = {}
    for i, c in enumerate(cells):
        out_map[names[i]] = sys.output_of(c)
        for u in sys.inputs:
            # cells found in the final, unexpanded round have no recorded edges
            if not terminated and (index[c], u) not in succ_cache:
                continue
            targets = {names[index[c2]] for c2 in succ(c, u).values() if c2 in index}
            if targets:
                trans[(names[i], u)] = targets
    abstraction = FiniteSystem(
        states=names,
        initial={names[index[c]] for c in initial},
        inputs=sys.inputs,
        outputs=sys.outputs,
        output_map=out_map,
        transitions=trans,
    )
    return KAResult(abstraction, dict(zip(names, cells)), terminated, iterations)
