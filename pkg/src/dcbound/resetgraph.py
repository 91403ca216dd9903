"""Reset graphs and reset paths.

The reset graph has an edge per reset: source atom -> reset variable, labeled
with the transition and offset. Analyses that follow reset chains require the
variable part of this graph to be acyclic; variables on reset cycles (and
everything downstream of them) are removed from a working copy of the program.

A reset path is sound when each interior atom is guaranteed to be re-reset
between the completion of the chain and the next use of the edge consuming
it; the optimal paths are the maximal sound ones.
"""

from __future__ import annotations

from dataclasses import dataclass

from dcbound.dcp import Atom, Dcp, Transition, Var, drop_variables

__all__ = [
    "DEFAULT_RESET_PATH_CAP",
    "ResetPathOverflow",
    "ResetEdge",
    "ResetPath",
    "ResetGraph",
    "ResetAnalysis",
    "build_reset_graph",
    "is_sound",
    "optimal_reset_paths",
    "to_dot",
]

DEFAULT_RESET_PATH_CAP = 4_096


class ResetPathOverflow(Exception):
    def __init__(self, cap: int, var: str):
        super().__init__(f"more than {cap} optimal reset paths end in {var}")
        self.cap = cap
        self.var = var


@dataclass(frozen=True)
class ResetEdge:
    src: Atom
    trans: Transition
    offset: int
    dst: str  # variable name

    def __str__(self) -> str:
        off = f",{self.offset:+d}" if self.offset else ""
        return f"{self.src} -[{self.trans.id}{off}]-> {self.dst}"


@dataclass(frozen=True)
class ResetPath:
    """Edges ordered from the originating atom down to the final variable."""

    edges: tuple[ResetEdge, ...]

    def __post_init__(self):
        if not self.edges:
            raise ValueError("a reset path has at least one edge")

    @property
    def in_atom(self) -> Atom:
        return self.edges[0].src

    @property
    def offset(self) -> int:
        return sum(e.offset for e in self.edges)

    @property
    def target(self) -> str:
        return self.edges[-1].dst

    @property
    def transitions(self) -> tuple[Transition, ...]:
        """Distinct transitions along the path, in path order."""
        seen: dict[str, Transition] = {}
        for e in self.edges:
            seen.setdefault(e.trans.id, e.trans)
        return tuple(seen.values())

    @property
    def atoms(self) -> tuple[Atom, ...]:
        """Distinct atoms along the path, origin first."""
        out: list[Atom] = [self.edges[0].src]
        for e in self.edges:
            node: Atom = Var(e.dst)
            if node not in out:
                out.append(node)
        return tuple(out)

    def __str__(self) -> str:
        parts = [str(self.edges[0].src)]
        for e in self.edges:
            off = f",{e.offset:+d}" if e.offset else ""
            parts.append(f"-[{e.trans.id}{off}]-> {e.dst}")
        return " ".join(parts)


@dataclass(frozen=True)
class ResetGraph:
    edges: tuple[ResetEdge, ...]

    @property
    def nodes(self) -> tuple[Atom, ...]:
        seen: list[Atom] = []
        for e in self.edges:
            for node in (e.src, Var(e.dst)):
                if node not in seen:
                    seen.append(node)
        return tuple(sorted(seen, key=str))

    def into(self, var: str) -> list[ResetEdge]:
        return sorted((e for e in self.edges if e.dst == var),
                      key=lambda e: (str(e.src), e.trans.id, e.offset))

    def out_of(self, atom: Atom) -> list[ResetEdge]:
        return sorted((e for e in self.edges if e.src == atom),
                      key=lambda e: (e.dst, e.trans.id, e.offset))

    def path_count(self, src: Atom, dst_var: str) -> int:
        """Number of distinct edge paths from src to dst (1 for src == dst).
        The variable part of the graph is acyclic, so this terminates."""
        target = Var(dst_var)
        memo: dict[Atom, int] = {}

        def walk(node: Atom) -> int:
            if node == target:
                return 1
            if node in memo:
                return memo[node]
            total = sum(walk(Var(e.dst)) for e in self.out_of(node))
            memo[node] = total
            return total

        return walk(src)


@dataclass(frozen=True)
class ResetAnalysis:
    graph: ResetGraph
    removed_vars: frozenset[str]
    pruned: Dcp  # working copy with removed-variable constraints dropped


def _raw_edges(dcp: Dcp) -> list[ResetEdge]:
    edges = []
    for v in dcp.variables:
        for t, a, c in dcp.resets(v):
            edges.append(ResetEdge(src=a, trans=t, offset=c, dst=v))
    return sorted(edges, key=lambda e: (str(e.src), e.dst, e.trans.id, e.offset))


def build_reset_graph(dcp: Dcp) -> ResetAnalysis:
    """Build the reset graph, removing variables on reset cycles plus all
    variables whose values depend on them (forward reachability along reset
    edges), so that the remaining graph is a DAG."""
    edges = _raw_edges(dcp)
    succ: dict[str, set[str]] = {v: set() for v in dcp.variables}
    for e in edges:
        if isinstance(e.src, Var):
            succ[e.src.name].add(e.dst)

    # variable-restricted SCCs (iterative Tarjan)
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = [0]
    cyclic: set[str] = set()

    def strongconnect(root: str) -> None:
        work = [(root, iter(sorted(succ[root])))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(succ[w]))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                if len(comp) > 1:
                    cyclic.update(comp)

    for v in dcp.variables:
        if v not in index:
            strongconnect(v)

    removed = set(cyclic)
    frontier = list(cyclic)
    while frontier:
        v = frontier.pop()
        for w in sorted(succ[v]):
            if w not in removed:
                removed.add(w)
                frontier.append(w)

    if removed:
        pruned = drop_variables(dcp, removed)
        edges = _raw_edges(pruned)
    else:
        pruned = dcp
    return ResetAnalysis(graph=ResetGraph(tuple(edges)),
                         removed_vars=frozenset(removed),
                         pruned=pruned)


# ---------------------------------------------------------------------------
# soundness and optimality
# ---------------------------------------------------------------------------

def _reachable_without_reset(dcp: Dcp, src_loc: str, dst_loc: str,
                             var: str) -> bool:
    """Is there a location path src -> dst (the empty path counts) that never
    takes a transition resetting var?"""
    if src_loc == dst_loc:
        return True
    resetting = {t.id for t, _, _ in dcp.resets(var)}
    seen = {src_loc}
    frontier = [src_loc]
    while frontier:
        loc = frontier.pop()
        for t in dcp.outgoing(loc):
            if t.id in resetting:
                continue
            if t.target == dst_loc:
                return True
            if t.target not in seen:
                seen.add(t.target)
                frontier.append(t.target)
    return False


def is_sound(dcp: Dcp, path: ResetPath) -> bool:
    """Each interior atom must be reset on every location path from the end
    of the chain back to the edge that consumes it."""
    edges = path.edges
    n = len(edges)
    last = edges[-1].trans
    for k in range(n - 1):
        interior = edges[k].dst
        consumer = edges[k + 1].trans
        if _reachable_without_reset(dcp, last.target, consumer.source, interior):
            return False
    return True


def optimal_reset_paths(dcp: Dcp, graph: ResetGraph, var: str,
                        cap: int = DEFAULT_RESET_PATH_CAP) -> list[ResetPath]:
    """Maximal sound reset paths ending in var, by backward extension.

    Soundness is monotone under truncation (each interior condition depends
    only on its own edge pair and the fixed last edge), so pruning unsound
    extensions is complete.
    """
    results: list[ResetPath] = []

    def extend(path: ResetPath) -> None:
        head = path.in_atom
        extended = False
        if isinstance(head, Var):
            for e in graph.into(head.name):
                cand = ResetPath((e,) + path.edges)
                if is_sound(dcp, cand):
                    extended = True
                    extend(cand)
        if not extended:
            results.append(path)
            if len(results) > cap:
                raise ResetPathOverflow(cap, var)

    for e in graph.into(var):
        extend(ResetPath((e,)))
    return results


def to_dot(graph: ResetGraph) -> str:
    """DOT rendering; zero offsets are omitted from edge labels."""
    lines = ["digraph reset_graph {"]
    for node in graph.nodes:
        lines.append(f'  "{node}";')
    for e in sorted(graph.edges, key=lambda e: (str(e.src), e.dst, e.trans.id)):
        label = e.trans.id + (f",{e.offset:+d}" if e.offset else "")
        lines.append(f'  "{e.src}" -> "{e.dst}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
