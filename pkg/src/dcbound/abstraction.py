"""Abstraction of concrete linear programs into difference constraint programs.

Integer-valued linear expressions over the concrete state (norms) become the
abstract variables. For each norm e and concrete transition, e's post-state
value is computed by substituting the updates; the result is matched against
an existing norm plus an integer offset, or split into a non-constant part
(a new norm) plus its constant. Norms over parameters only become symbolic
constants; chains of newly discovered norms are cut at a configurable depth
and the cut norms discarded. Guards e > 0 are added where the concrete guard
syntactically entails them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from dcbound.dcp import (
    Atom,
    Dcp,
    DifferenceConstraint,
    Int,
    SymConst,
    Transition,
    Var,
    enforce_well_definedness,
    validate,
)
from dcbound.localbounds import DEFAULT_CYCLE_CAP, enumerate_simple_cycles
from dcbound.program import HAVOC, ConcreteProgram, ConcreteTransition, LinExpr

__all__ = [
    "DEFAULT_DEPTH_LIMIT",
    "Norm",
    "AbstractStep",
    "AbstractionResult",
    "guess_norms",
    "sym_exec_norm",
    "abstract_transition",
    "infer_guard",
    "abstract_program",
]

DEFAULT_DEPTH_LIMIT = 5

# Norm discovery descends this far past the discard limit so that the full
# chain of a too-deep norm is known (and reported) before being discarded.
_DISCOVERY_SLACK = 8


@dataclass(frozen=True)
class Norm:
    """A linear state expression with a stable printed name."""

    expr: LinExpr

    @property
    def name(self) -> str:
        return self.expr.name()

    def __str__(self) -> str:
        return self.name


def _counter_updates(t: ConcreteTransition) -> set[str]:
    """Variables this transition moves by a nonzero constant: v := v + c."""
    out = set()
    for v, rhs in t.updates:
        if rhs is HAVOC:
            continue
        if rhs.const != 0 and rhs.coeffs == ((v, 1),):
            out.add(v)
    return out


def guess_norms(prog: ConcreteProgram,
                cycle_cap: int = DEFAULT_CYCLE_CAP) -> list[Norm]:
    """Initial norms from loop conditions.

    A guard relation on transition t contributes its positivity facts
    (e.g. a > b gives a-b, a >= b gives a-b+1) whenever some simple cycle
    through t moves a variable of the relation by a nonzero constant: such a
    condition can limit how long the cyclic paths through t keep running.
    Exit conditions whose counters only move on other cycles contribute
    nothing.
    """
    cycles = enumerate_simple_cycles(prog.locations, prog.transitions, cycle_cap)
    counters_by_cycle = []
    for c in cycles:
        counters: set[str] = set()
        for t in c:
            counters |= _counter_updates(t)
        counters_by_cycle.append((frozenset(t.id for t in c), counters))
    norms: list[Norm] = []
    seen: set[LinExpr] = set()
    for t in prog.transitions:
        relevant: set[str] = set()
        for ids, counters in counters_by_cycle:
            if t.id in ids:
                relevant |= counters
        if not relevant:
            continue
        for rel in t.guard:
            involved = (rel.lhs.names | rel.rhs.names) & relevant
            if not involved:
                continue
            for fact in rel.facts():
                if fact.is_const or _names_only_params(fact, prog):
                    continue
                if fact not in seen:
                    seen.add(fact)
                    norms.append(Norm(fact))
    return norms


def _names_only_params(e: LinExpr, prog: ConcreteProgram) -> bool:
    return e.names <= set(prog.params)


def sym_exec_norm(e: LinExpr, t: ConcreteTransition) -> LinExpr | None:
    """e after t: substitute every updated variable; None if a variable of e
    is havoced (no difference constraint can be derived)."""
    updates = t.update_map()
    subst: dict[str, LinExpr] = {}
    for name in e.names:
        rhs = updates.get(name)
        if rhs is HAVOC:
            return None
        if rhs is not None:
            subst[name] = rhs
    return e.substitute(subst)


@dataclass(frozen=True)
class AbstractStep:
    """One derived constraint e' <= rhs + offset. rhs is a constant-free
    linear expression, or constant-only, in which case the constraint's
    right side is the integer atom rhs.const. new_norm is set when the rhs
    had to be added to the norm set."""

    rhs: LinExpr
    offset: int
    new_norm: LinExpr | None


def abstract_transition(e: LinExpr, t: ConcreteTransition,
                        norms: list[LinExpr]) -> AbstractStep | None:
    """Derive the constraint for norm e across t, or None on havoc.

    Tries e itself first (self-increment), then the known norms in insertion
    order, as targets whose difference from the post-state value is a
    constant; otherwise splits off the integer constant and introduces the
    non-constant remainder as a new norm.
    """
    r = sym_exec_norm(e, t)
    if r is None:
        return None
    if r.is_const:
        return AbstractStep(rhs=LinExpr(r.const), offset=0, new_norm=None)
    for cand in [e] + [n for n in norms if n != e]:
        diff = r.sub(cand)
        if diff.is_const:
            return AbstractStep(rhs=cand, offset=diff.const, new_norm=None)
    e4 = r.drop_const()
    return AbstractStep(rhs=e4, offset=r.const, new_norm=e4)


def infer_guard(e: LinExpr, t: ConcreteTransition) -> bool:
    """Sound, syntactic entailment of e > 0 by t's guard: true only when e is
    a positive constant or literally one of the guard's positivity facts."""
    if e.is_const:
        return e.const > 0
    for rel in t.guard:
        for fact in rel.facts():
            if fact == e:
                return True
    return False


@dataclass
class AbstractionResult:
    dcp: Dcp
    norm_vars: dict[str, Norm]          # dcp variable name -> norm
    derived_consts: dict[str, LinExpr]  # dcp constant name -> defining expression
    discarded: list[str]                # canonical names of discarded norms
    warnings: list[str] = field(default_factory=list)

    def rename_comment(self) -> list[str]:
        out = [f"{name} := {norm.name}"
               for name, norm in sorted(self.norm_vars.items())
               if name != norm.name]
        out += [f"{name} := {e.name()} (symbolic constant)"
                for name, e in sorted(self.derived_consts.items())]
        return out


class _NormTable:
    """Norm interning with discovery depths and deterministic order."""

    def __init__(self, prog: ConcreteProgram, discovery_cap: int):
        self.prog = prog
        self.cap = discovery_cap
        self.order: list[LinExpr] = []
        self.depth: dict[LinExpr, int] = {}
        self.kind: dict[LinExpr, str] = {}  # "var" | "const"
        self.too_deep: list[LinExpr] = []

    def intern(self, e: LinExpr, depth: int) -> LinExpr | None:
        if e in self.depth:
            if depth < self.depth[e]:
                self.depth[e] = depth
            return e
        kind = "const" if _names_only_params(e, self.prog) else "var"
        if kind == "var" and depth > self.cap:
            if e not in self.too_deep:
                self.too_deep.append(e)
            return None
        self.order.append(e)
        self.depth[e] = depth
        self.kind[e] = kind
        return e


def abstract_program(prog: ConcreteProgram,
                     depth_limit: int = DEFAULT_DEPTH_LIMIT, *,
                     keep_names: bool = False,
                     cycle_cap: int = DEFAULT_CYCLE_CAP) -> AbstractionResult:
    """Abstract a concrete program into a deterministic, well-defined DCP."""
    warnings: list[str] = []
    table = _NormTable(prog, depth_limit + _DISCOVERY_SLACK)
    for n in guess_norms(prog, cycle_cap):
        table.intern(n.expr, 0)

    # fixpoint: derive one constraint per (norm, transition)
    constraints: dict[tuple[LinExpr, str], AbstractStep] = {}
    processed: set[LinExpr] = set()
    queue = [e for e in table.order if table.kind[e] == "var"]
    while queue:
        e = queue.pop(0)
        if e in processed:
            continue
        processed.add(e)
        for t in prog.transitions:
            step = abstract_transition(e, t, table.order)
            if step is None:
                continue  # havoc: no constraint for this norm here
            if step.new_norm is not None:
                interned = table.intern(step.new_norm, table.depth[e] + 1)
                if interned is None:
                    warnings.append(
                        f"norm {step.new_norm.name()} exceeds the discovery "
                        f"depth; no constraint for {e.name()} on {t.id}")
                    continue
                if table.kind[interned] == "var" and interned not in processed:
                    queue.append(interned)
            constraints[(e, t.id)] = step

    # discard variable norms past the depth limit, with their constraints
    discarded_set = {
        e for e in table.order
        if table.kind[e] == "var" and table.depth[e] > depth_limit
    } | set(table.too_deep)
    discarded_names = [e.name() for e in sorted(
        discarded_set, key=lambda e: (table.depth.get(e, table.cap + 1), e.name()))]
    if discarded_set:
        for name in discarded_names:
            warnings.append(f"discarded norm {name} (depth limit {depth_limit})")
        constraints = {
            (e, tid): step for (e, tid), step in constraints.items()
            if e not in discarded_set
            and (step.rhs.is_const or step.rhs not in discarded_set)
        }

    surviving = [e for e in table.order
                 if e not in discarded_set and table.kind[e] == "var"]
    const_norms = [e for e in table.order if table.kind[e] == "const"]

    # names
    taken = set(prog.params) | set(prog.locations) | {t.id for t in prog.transitions}
    var_name: dict[LinExpr, str] = {}
    for i, e in enumerate(surviving):
        name = e.name() if keep_names else f"v{i}"
        while name in taken or name in var_name.values():
            name += "_"
        var_name[e] = name
        taken.add(name)
    const_name: dict[LinExpr, str] = {}
    derived: dict[str, LinExpr] = {}
    kidx = 0
    for e in const_norms:
        if len(e.coeffs) == 1 and e.coeffs[0][1] == 1 and e.const == 0:
            const_name[e] = e.coeffs[0][0]  # a bare parameter
            continue
        name = e.name() if keep_names else f"k{kidx}"
        kidx += 1
        while name in taken:
            name += "_"
        const_name[e] = name
        derived[name] = e
        taken.add(name)

    def atom_of(rhs: LinExpr) -> Atom:
        if rhs.is_const:
            return Int(rhs.const)
        if rhs in var_name:
            return Var(var_name[rhs])
        return SymConst(const_name[rhs])

    transitions: list[Transition] = []
    for t in prog.transitions:
        ups = []
        for e in surviving:
            step = constraints.get((e, t.id))
            if step is None:
                continue
            ups.append(DifferenceConstraint(var_name[e], atom_of(step.rhs),
                                            step.offset))
        guard = tuple(sorted(var_name[e] for e in surviving if infer_guard(e, t)))
        transitions.append(Transition(
            id=t.id, source=t.source, target=t.target, guard=guard,
            updates=tuple(sorted(ups, key=lambda u: u.lhs)), line=t.line))

    raw = Dcp(
        locations=prog.locations,
        transitions=tuple(sorted(transitions, key=lambda t: t.id)),
        entry=prog.entry, exit=prog.exit,
        variables=tuple(sorted(var_name.values())),
        sym_consts=tuple(sorted(set(prog.params) | set(derived))),
    )
    final, repair_notes = enforce_well_definedness(raw)
    warnings.extend(repair_notes)
    for e, name in var_name.items():
        if name not in final.variables:
            warnings.append(
                f"dropped variable {name} := {e.name()} during the "
                f"well-definedness repair")
    diags = validate(final)
    if diags:  # the construction is supposed to rule this out
        raise AssertionError(
            "abstraction produced an invalid program: "
            + "; ".join(str(d) for d in diags))
    kept_names = set(final.variables)
    return AbstractionResult(
        dcp=final,
        norm_vars={name: Norm(e) for e, name in var_name.items()
                   if name in kept_names},
        derived_consts=derived,
        discarded=discarded_names,
        warnings=warnings,
    )
