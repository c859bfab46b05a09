"""Knowledge exploration interleaved with cover minimization.

The exploration tree holds nodes <nu, q, c>: an external prefix nu, the
current block q (a guess at the observation-equivalence class) and the cell c
(the knowledge reached by nu).  Each iteration expands the deepest leaves,
then tries to shrink the block of every expanded node to the states whose
one-step successors stay inside the blocks of its children.  Shrunk blocks
are added to the cover; the larger block is kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import OfabsError
from .regions import Region, as_symbolic, union_all
from .systems import FiniteSystem


@dataclass
class Node:
    id: int
    nu: tuple
    q: Region
    c: Region
    parent: int | None
    depth: int
    children: list = field(default_factory=list)   # (u, child id)


@dataclass
class CoverEvent:
    iteration: int
    node: int
    region: Region
    replaced: Region
    rebound: tuple


@dataclass
class ExplorationState:
    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)      # (parent id, u, child id)
    cover: list = field(default_factory=list)
    gamma: set = field(default_factory=set)
    iteration: int = 0
    log: list = field(default_factory=list)

    def pairs(self) -> set:
        """The tree projected to (block, cell) pairs."""
        return {(n.q, n.c) for n in self.nodes}

    def roots(self) -> list:
        return [n for n in self.nodes if n.parent is None]

    def nu_from_tree(self, node_id: int) -> tuple:
        """Rebuild a node's prefix from edge labels and node outputs."""
        path = []
        n = self.nodes[node_id]
        while n.parent is not None:
            p = self.nodes[n.parent]
            u = next(uu for uu, cid in p.children if cid == n.id)
            path.append((u, n.nu[-1]))
            n = p
        nu = (n.nu[0],)
        for u, y in reversed(path):
            nu += (u, y)
        return nu

    def to_json(self) -> dict:
        return {
            "iteration": self.iteration,
            "cover": [q.key() for q in self.cover],
            "nodes": [
                {"id": n.id, "nu": list(n.nu), "q": n.q.key(), "c": n.c.key(),
                 "parent": n.parent}
                for n in self.nodes
            ],
            "edges": [list(e) for e in self.edges],
        }


@dataclass
class Extraction:
    system: FiniteSystem
    alpha: dict          # abstract state name -> Region


@dataclass
class KAMConfig:
    budget: int = 20
    termcond: str = "cover-stable"     # "exact" | "cover-stable" | "budget"
    window: int = 2
    refine_scope: str = "ancestors"    # "ancestors" | "all"
    initial_from_cells: bool = False   # printed Extract: X0 ∩ H^{-1}(y) as initial states

    @classmethod
    def parse(cls, termcond: str, budget: int = 20, **kw) -> "KAMConfig":
        if termcond.startswith("cover-stable"):
            _, _, k = termcond.partition(":")
            return cls(budget=budget, termcond="cover-stable", window=int(k) if k else 2, **kw)
        if termcond in ("exact", "budget"):
            return cls(budget=budget, termcond=termcond, **kw)
        raise OfabsError(f"unknown termination condition {termcond!r}")


@dataclass
class KAMResult:
    exploration: ExplorationState
    extracted: list      # Extraction per iteration, index 0 = iteration 1
    terminated: bool
    termcond_fired_at: int | None

    @property
    def final(self) -> Extraction:
        return self.extracted[-1]

    def cover_additions(self, iteration: int) -> list:
        return [e.region for e in self.exploration.log if e.iteration == iteration]


class KAM:
    """Stepwise driver; :func:`kam` runs it to completion."""

    def __init__(self, system, config: KAMConfig | None = None):
        self.sys = as_symbolic(system)
        self.config = config or KAMConfig()
        self.state = ExplorationState()
        self.extracted: list = []
        self._succ_cache: dict = {}
        self._min_cache: dict = {}
        self._out_cache: dict = {}
        self._subset_cache: dict = {}
        self._stable_streak = 0
        self._by_block: dict = {}
        self.fired_at = None
        st = self.state
        for y, q in self.sys.output_partition().items():
            self._add_cover(q)
        x0 = self.sys.initial_region()
        for q in list(st.cover):
            if not q.intersect(x0).is_empty():
                self._new_node((self.output_of(q),), q, q, None, 0)

    # -- bookkeeping ---------------------------------------------------

    def _add_cover(self, q):
        if q not in self._cover_set():
            self.state.cover.append(q)
            self._cover_by_output().setdefault(self.output_of(q), []).append(q)
            return True
        return False

    def _cover_set(self):
        s = self.__dict__.setdefault("_cover_members", set())
        if len(s) != len(self.state.cover):
            s.clear()
            s.update(self.state.cover)
        return s

    def _cover_by_output(self):
        return self.__dict__.setdefault("_cover_out", {})

    def _new_node(self, nu, q, c, parent, depth):
        n = Node(len(self.state.nodes), nu, q, c, parent, depth)
        self.state.nodes.append(n)
        self._by_block.setdefault(q, []).append(n.id)
        return n

    def _subset(self, a, b) -> bool:
        if a is b or a == b:
            return True
        key = (a, b)
        hit = self._subset_cache.get(key)
        if hit is None:
            hit = a.subset(b)
            self._subset_cache[key] = hit
        return hit

    def _proper(self, a, b) -> bool:
        return a != b and self._subset(a, b)

    def _successors(self, c, u) -> dict:
        key = (c, u)
        hit = self._succ_cache.get(key)
        if hit is None:
            img = self.sys.post(c, u)
            hit = {}
            if not img.is_empty():
                for y in self.sys.outputs:
                    c2 = self.sys.restrict_output(img, y)
                    if not c2.is_empty():
                        hit[y] = c2
            self._succ_cache[key] = hit
        return hit

    def output_of(self, r):
        y = self._out_cache.get(r)
        if y is None:
            y = self._out_cache[r] = self.sys.output_of(r)
        return y

    def minimal_blocks(self, c, y=None) -> list:
        """All minimal cover elements containing ``c``, in canonical order."""
        y = y if y is not None else self.output_of(c)
        pool = self._cover_by_output().get(y, [])
        seen, hit = self._min_cache.get(c, (0, []))
        if seen < len(pool):
            # a block that was not minimal stays non-minimal, so only the
            # previous minima and the newly added blocks compete
            cands = hit + [q for q in pool[seen:] if self._subset(c, q)]
            hit = [q for q in cands if not any(o != q and self._subset(o, q) for o in cands)]
            hit.sort(key=lambda r: r.key())
            self._min_cache[c] = (len(pool), hit)
        return hit

    # -- algorithm -----------------------------------------------------

    def step(self) -> Extraction:
        st = self.state
        st.iteration += 1
        known = len(st.nodes)
        cover_before = len(st.cover)
        depth = max(n.depth for n in st.nodes) if st.nodes else 0
        frontier = [n for n in st.nodes if n.depth == depth]
        for n in frontier:
            for u in self.sys.inputs:
                for y, c2 in self._successors(n.c, u).items():
                    for q2 in self.minimal_blocks(c2, y):
                        child = self._new_node(n.nu + (u, y), q2, c2, n.id, n.depth + 1)
                        n.children.append((u, child.id))
                        st.edges.append((n.id, u, child.id))
            if self._proper(n.c, n.q):
                self.refine(n.id)
        # rebinding treats equal (q, c) pairs alike, so the snapshot taken at
        # the start of the iteration equals the pairs of the nodes present then
        st.gamma = {(n.q, n.c) for n in st.nodes[:known]}
        ext = self.extract()
        self.extracted.append(ext)
        if len(st.cover) == cover_before:
            self._stable_streak += 1
        else:
            self._stable_streak = 0
        if self.fired_at is None and self._termcond():
            self.fired_at = st.iteration
        return ext

    def _termcond(self) -> bool:
        mode = self.config.termcond
        if mode == "exact":
            return self.state.gamma == self.state.pairs()
        if mode == "cover-stable":
            return self._stable_streak >= self.config.window
        return False

    def post_blocks(self, node: Node) -> dict:
        """PostQ_u: union of the blocks of the u-children."""
        nodes = self.state.nodes
        return {
            u: union_all(self.sys, (nodes[cid].q for uu, cid in node.children if uu == u))
            for u in self.sys.inputs
        }

    def refine(self, node_id: int):
        st = self.state
        nodes = st.nodes
        ancestors = set()
        a = nodes[node_id].parent
        while a is not None:
            ancestors.add(a)
            a = nodes[a].parent
        pending = {node_id}
        while pending:
            nid = max(pending, key=lambda i: (nodes[i].depth, i))
            pending.discard(nid)
            n = nodes[nid]
            if not self._proper(n.c, n.q):
                continue
            q = n.q
            s = self.sys.stable_subset(q, self.post_blocks(n))
            if s == q:
                continue
            self._add_cover(s)
            rebound = []
            for mid in list(self._by_block.get(q, ())):
                m = nodes[mid]
                if m.q == q and self._subset(m.c, s):
                    m.q = s
                    rebound.append(mid)
            if rebound:
                moved = set(rebound)
                self._by_block[q] = [i for i in self._by_block[q] if i not in moved]
                self._by_block.setdefault(s, []).extend(rebound)
            st.log.append(CoverEvent(st.iteration, nid, s, q, tuple(rebound)))
            for mid in rebound:
                p = nodes[mid].parent
                if p is None or not self._proper(nodes[p].c, nodes[p].q):
                    continue
                if self.config.refine_scope == "all" or p in ancestors:
                    pending.add(p)

    def extract(self) -> Extraction:
        st = self.state
        blocks: list = []
        seen = set()
        for n in st.nodes:
            if n.q not in seen:
                seen.add(n.q)
                blocks.append(n.q)
        names = {q: q.key() for q in blocks}
        trans: dict = {}
        for pid, u, cid in st.edges:
            key = (names[st.nodes[pid].q], u)
            trans.setdefault(key, set()).add(names[st.nodes[cid].q])
        if self.config.initial_from_cells:
            cells = set(self.sys.initial_cells().values())
            initial = {names[q] for q in blocks if q in cells}
        else:
            initial = {names[n.q] for n in st.roots()}
        system = FiniteSystem(
            states=[names[q] for q in blocks],
            initial=initial,
            inputs=self.sys.inputs,
            outputs=self.sys.outputs,
            output_map={names[q]: self.output_of(q) for q in blocks},
            transitions=trans,
        )
        return Extraction(system, {names[q]: q for q in blocks})

    def run(self) -> KAMResult:
        while self.state.iteration < self.config.budget and self.fired_at is None:
            self.step()
        return self.result()

    def result(self) -> KAMResult:
        return KAMResult(self.state, list(self.extracted), self.fired_at is not None, self.fired_at)


def kam(system, config: KAMConfig | None = None, **kw) -> KAMResult:
    if config is None:
        config = KAMConfig(**kw)
    if config.budget < 1:
        raise ValueError("budget must be at least 1")
    return KAM(system, config).run()


def unique_minimal_cover(state: ExplorationState) -> bool:
    """Every cell of the snapshot gamma is paired with exactly one block.

    Leaves created in the current iteration are not part of the snapshot;
    they may carry one node per minimal block.
    """
    blocks_of: dict = {}
    for q, c in state.gamma:
        blocks_of.setdefault(c, set()).add(q)
    return all(len(v) == 1 for v in blocks_of.values())


def extract(exploration: ExplorationState, system, initial_from_cells: bool = False) -> Extraction:
    """Project an exploration tree onto its blocks."""
    driver = KAM.__new__(KAM)
    driver.sys = as_symbolic(system)
    driver.state = exploration
    driver.config = KAMConfig(initial_from_cells=initial_from_cells)
    driver._out_cache = {}
    return driver.extract()


def refine(driver: KAM, node_id: int) -> ExplorationState:
    driver.refine(node_id)
    return driver.state


@dataclass
class ChainResult:
    found: bool
    iteration: int | None
    extraction: Extraction | None
    game: FiniteSystem | None
    strategy: object = None
    controller: object = None
    chain: list = field(default_factory=list)     # Extraction per iteration tried

    @property
    def exhausted(self) -> bool:
        return not self.found


def refinement_chain(system, L: int, spec, config: KAMConfig | None = None) -> ChainResult:
    """Run KAM one iteration at a time and try synthesis after every Extract."""
    from .synth import AbstractStrategy, output_feedback_game, refine_controller, solve

    if L < 1:
        raise ValueError("L must be at least 1")
    config = config or KAMConfig(budget=L, termcond="budget")
    driver = KAM(system, config)
    chain = []
    for _ in range(L):
        ext = driver.step()
        chain.append(ext)
        game = output_feedback_game(ext.system)
        strat = solve(game, spec)
        if isinstance(strat, AbstractStrategy):
            ctrl = refine_controller(game, strat)
            return ChainResult(True, driver.state.iteration, ext, game, strat, ctrl, chain)
    return ChainResult(False, None, None, None, chain=chain)
