"""Guarded difference constraint programs: data model, parser, validation.

A transition carries a set of variables required to be positive (the guard)
and a deterministic set of inequalities x' <= a + c, one per updated variable,
where a is a variable, a named constant, or an integer. Programs are validated
for determinism and well-definedness (every variable that may be read from a
location is constrained on all of that location's incoming transitions).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable

__all__ = [
    "Var",
    "SymConst",
    "Int",
    "Atom",
    "DifferenceConstraint",
    "Transition",
    "Dcp",
    "Diagnostic",
    "DcpError",
    "parse_dcp",
    "validate",
    "drop_variables",
    "enforce_well_definedness",
    "format_dcp",
]


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class SymConst:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Int:
    value: int

    def __str__(self) -> str:
        return str(self.value)


Atom = Var | SymConst | Int


@dataclass(frozen=True)
class DifferenceConstraint:
    """lhs' <= rhs + offset; the lhs is always a variable name."""

    lhs: str
    rhs: Atom
    offset: int

    def __str__(self) -> str:
        if self.offset > 0:
            return f"{self.lhs}' <= {self.rhs} + {self.offset}"
        if self.offset < 0:
            return f"{self.lhs}' <= {self.rhs} - {-self.offset}"
        return f"{self.lhs}' <= {self.rhs}"


@dataclass(frozen=True)
class Transition:
    id: str
    source: str
    target: str
    guard: tuple[str, ...]
    updates: tuple[DifferenceConstraint, ...]
    line: int = field(default=0, compare=False)  # source position only

    def update_for(self, var: str) -> DifferenceConstraint | None:
        for u in self.updates:
            if u.lhs == var:
                return u
        return None

    def defines(self, var: str) -> bool:
        return any(u.lhs == var for u in self.updates)

    def reads(self) -> set[str]:
        """Variable names read in the pre-state (guards and rhs atoms)."""
        used = set(self.guard)
        for u in self.updates:
            if isinstance(u.rhs, Var):
                used.add(u.rhs.name)
        return used


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


class DcpError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class Dcp:
    locations: tuple[str, ...]
    transitions: tuple[Transition, ...]
    entry: str
    exit: str
    variables: tuple[str, ...]
    sym_consts: tuple[str, ...]

    def transition(self, tid: str) -> Transition:
        for t in self.transitions:
            if t.id == tid:
                return t
        raise KeyError(tid)

    def outgoing(self, loc: str) -> list[Transition]:
        return [t for t in self.transitions if t.source == loc]

    def incoming(self, loc: str) -> list[Transition]:
        return [t for t in self.transitions if t.target == loc]

    def resets(self, var: str) -> list[tuple[Transition, Atom, int]]:
        """All (transition, source atom, offset) where var is set from a
        different atom: the update var' <= a + c with a != var."""
        if var not in self.variables:
            raise ValueError(f"unknown variable {var!r}")
        out = []
        for t in self.transitions:
            u = t.update_for(var)
            if u is not None and u.rhs != Var(var):
                out.append((t, u.rhs, u.offset))
        return out

    def increments(self, var: str) -> list[tuple[Transition, int]]:
        """All (transition, offset) with a self-sourced positive offset:
        var' <= var + c and c > 0."""
        if var not in self.variables:
            raise ValueError(f"unknown variable {var!r}")
        out = []
        for t in self.transitions:
            u = t.update_for(var)
            if u is not None and u.rhs == Var(var) and u.offset > 0:
                out.append((t, u.offset))
        return out

    def back_edges(self) -> list[Transition]:
        """Transitions closing a cycle under a depth-first traversal from the
        entry with children visited in transition-id order."""
        out_sorted = {loc: sorted(self.outgoing(loc), key=lambda t: t.id)
                      for loc in self.locations}
        color: dict[str, int] = {loc: 0 for loc in self.locations}  # 0 white 1 grey 2 black
        back: list[Transition] = []
        # iterative DFS: (location, iterator index)
        stack: list[tuple[str, int]] = []
        if self.entry in color:
            color[self.entry] = 1
            stack.append((self.entry, 0))
        while stack:
            loc, i = stack.pop()
            edges = out_sorted[loc]
            if i < len(edges):
                stack.append((loc, i + 1))
                t = edges[i]
                if color[t.target] == 1:
                    back.append(t)
                elif color[t.target] == 0:
                    color[t.target] = 1
                    stack.append((t.target, 0))
            else:
                color[loc] = 2
        return sorted(back, key=lambda t: t.id)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def _liveness(dcp: Dcp) -> dict[str, set[str]]:
    """Backward fixpoint: v is live at l if some path from l reaches a read of
    v (guard or rhs) with no intervening transition that constrains v."""
    live: dict[str, set[str]] = {loc: set() for loc in dcp.locations}
    changed = True
    while changed:
        changed = False
        for t in dcp.transitions:
            wanted = t.reads() | {
                v for v in live.get(t.target, set()) if not t.defines(v)
            }
            cur = live[t.source]
            if not wanted <= cur:
                cur |= wanted
                changed = True
    return live


def defined_at(dcp: Dcp) -> dict[str, set[str]]:
    """Variables constrained on every incoming transition of each location.
    Nothing is defined at the entry."""
    out: dict[str, set[str]] = {}
    for loc in dcp.locations:
        if loc == dcp.entry:
            out[loc] = set()
            continue
        inc = dcp.incoming(loc)
        vars_ = set(dcp.variables)
        for t in inc:
            vars_ &= {u.lhs for u in t.updates}
        out[loc] = vars_
    return out


def validate(dcp: Dcp) -> list[Diagnostic]:
    """Structural and semantic checks; an empty list means the program is
    deterministic and well-defined."""
    diags: list[Diagnostic] = []
    vars_ = set(dcp.variables)
    consts = set(dcp.sym_consts)
    locs = set(dcp.locations)

    for a, b, what in [
        (vars_, consts, "variable and constant"),
        (vars_, locs, "variable and location"),
        (consts, locs, "constant and location"),
    ]:
        for name in sorted(a & b):
            diags.append(Diagnostic(0, 0, f"name {name!r} used as both {what}"))

    seen_ids: set[str] = set()
    for t in dcp.transitions:
        if t.id in seen_ids:
            diags.append(Diagnostic(t.line, 1, f"duplicate transition id {t.id!r}"))
        seen_ids.add(t.id)
        for g in t.guard:
            if g not in vars_:
                diags.append(Diagnostic(
                    t.line, 1, f"transition {t.id}: guard names unknown variable {g!r}"))
        lhs_seen: set[str] = set()
        for u in t.updates:
            if u.lhs not in vars_:
                diags.append(Diagnostic(
                    t.line, 1, f"transition {t.id}: update of unknown variable {u.lhs!r}"))
            if u.lhs in lhs_seen:
                diags.append(Diagnostic(
                    t.line, 1,
                    f"transition {t.id}: determinism violation, "
                    f"variable {u.lhs!r} constrained twice"))
            lhs_seen.add(u.lhs)
            if isinstance(u.rhs, Var) and u.rhs.name not in vars_:
                if u.rhs.name in consts:
                    pass  # parser already classified; defensive only
                else:
                    diags.append(Diagnostic(
                        t.line, 1,
                        f"transition {t.id}: unknown atom {u.rhs.name!r}"))
        if t.source == dcp.exit:
            diags.append(Diagnostic(
                t.line, 1, f"transition {t.id} leaves the exit location"))
        if t.target == dcp.entry:
            diags.append(Diagnostic(
                t.line, 1, f"transition {t.id} enters the entry location"))

    if diags:
        return diags  # liveness needs a structurally sane program

    live = _liveness(dcp)
    defined = defined_at(dcp)
    for loc in sorted(dcp.locations):
        for v in sorted(live[loc]):
            if loc == dcp.entry:
                diags.append(Diagnostic(
                    0, 0,
                    f"variable {v!r} may be read at the entry {loc!r} "
                    f"before it is constrained"))
            elif v not in defined[loc]:
                missing = [t.id for t in dcp.incoming(loc) if not t.defines(v)]
                diags.append(Diagnostic(
                    0, 0,
                    f"variable {v!r} is live at {loc!r} but transition(s) "
                    f"{', '.join(sorted(missing))} into {loc!r} do not constrain it"))
    return diags


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------

def drop_variables(dcp: Dcp, removed: Iterable[str]) -> Dcp:
    """Drop every constraint mentioning a removed variable (either side) and
    every guard on one. The variables stay declared; they just lose all
    constraints, so downstream analyses treat them as unbounded."""
    removed = set(removed)
    new_ts = []
    for t in dcp.transitions:
        ups = tuple(
            u for u in t.updates
            if u.lhs not in removed
            and not (isinstance(u.rhs, Var) and u.rhs.name in removed)
        )
        guard = tuple(g for g in t.guard if g not in removed)
        new_ts.append(replace(t, guard=guard, updates=ups))
    return replace(dcp, transitions=tuple(new_ts))


def enforce_well_definedness(dcp: Dcp) -> tuple[Dcp, list[str]]:
    """Iteratively drop guards and constraints that read a variable not
    defined at the transition's source, then prune constraint-less variables.

    Dropping constraints and guards only enlarges the run set, so any bound
    computed for the result still covers the original behaviour.
    """
    warnings: list[str] = []
    cur = dcp
    while True:
        defined = defined_at(cur)
        changed = False
        new_ts = []
        for t in cur.transitions:
            ok = defined[t.source] if t.source != cur.entry else set()
            guard = []
            for g in t.guard:
                if g in ok:
                    guard.append(g)
                else:
                    warnings.append(
                        f"dropped guard {g} on {t.id}: not defined at {t.source}")
                    changed = True
            ups = []
            for u in t.updates:
                if isinstance(u.rhs, Var) and u.rhs.name not in ok:
                    warnings.append(
                        f"dropped {u} on {t.id}: {u.rhs.name} not defined at {t.source}")
                    changed = True
                else:
                    ups.append(u)
            new_ts.append(replace(t, guard=tuple(guard), updates=tuple(ups)))
        cur = replace(cur, transitions=tuple(new_ts))
        if not changed:
            break
    constrained = {u.lhs for t in cur.transitions for u in t.updates}
    dead = [v for v in cur.variables if v not in constrained]
    if dead:
        for v in dead:
            warnings.append(f"pruned variable {v}: no constraints remain")
        cur = replace(cur, variables=tuple(v for v in cur.variables if v not in dead))
    return cur, warnings


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------
#
# Line-oriented format, '#' starts a comment:
#
#   dcp
#   consts: n, m1, m2
#   vars:   x, y, z
#   entry:  lb
#   exit:   le
#   trans t1: l1 -> l2 guard(x) { x' <= x - 1; r' <= r + 1; }
#
# Variable names may also be written in parenthesized-expression form, e.g.
# (l-i), as produced by `abstract --keep-names`.

_NAME = r"(?:[A-Za-z_][A-Za-z0-9_]*|\([A-Za-z0-9_+\-*]+\))"
_HEADER_RE = re.compile(r"^(consts|vars|entry|exit)\s*:\s*(.*)$")
_TRANS_RE = re.compile(
    rf"^trans\s+(?P<id>{_NAME})\s*:\s*(?P<src>{_NAME})\s*->\s*(?P<tgt>{_NAME})"
    rf"\s*(?:guard\(\s*(?P<guard>{_NAME}(?:\s*,\s*{_NAME})*)\s*\))?"
    r"\s*\{(?P<body>.*)\}\s*$"
)
_UPDATE_RE = re.compile(
    rf"^(?P<lhs>{_NAME})'\s*<=\s*(?P<rhs>{_NAME}|-?\d+)"
    r"(?:\s*(?P<sign>[+-])\s*(?P<off>\d+))?$"
)


def _split_names(raw: str) -> list[str]:
    raw = raw.strip()
    if not raw:
        return []
    return [p.strip() for p in raw.split(",")]


def parse_dcp(text: str) -> Dcp:
    """Parse and validate; raises DcpError carrying positioned diagnostics."""
    diags: list[Diagnostic] = []
    consts: list[str] = []
    variables: list[str] = []
    entry = exit_ = None
    transitions: list[Transition] = []
    locations: list[str] = []
    seen_tag = False

    def add_loc(name: str) -> None:
        if name not in locations:
            locations.append(name)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not seen_tag:
            if line != "dcp":
                diags.append(Diagnostic(lineno, 1, "expected 'dcp' header"))
                break
            seen_tag = True
            continue
        m = _HEADER_RE.match(line)
        if m:
            key, rest = m.group(1), m.group(2)
            names = _split_names(rest)
            if any(not n for n in names):
                diags.append(Diagnostic(lineno, 1, f"empty name in {key} list"))
                continue
            if key == "consts":
                consts.extend(names)
            elif key == "vars":
                variables.extend(names)
            elif key == "entry":
                entry = names[0] if names else None
                if entry:
                    add_loc(entry)
            else:
                exit_ = names[0] if names else None
                if exit_:
                    add_loc(exit_)
            continue
        m = _TRANS_RE.match(line)
        if m:
            guard = tuple(_split_names(m.group("guard") or ""))
            updates = []
            body = m.group("body").strip()
            parts = [p.strip() for p in body.split(";") if p.strip()]
            bad = False
            for part in parts:
                um = _UPDATE_RE.match(part)
                if um is None:
                    col = raw.find(part) + 1
                    diags.append(Diagnostic(lineno, max(col, 1),
                                            f"cannot parse update {part!r}"))
                    bad = True
                    continue
                rhs_txt = um.group("rhs")
                if re.fullmatch(r"-?\d+", rhs_txt):
                    rhs: Atom = Int(int(rhs_txt))
                elif rhs_txt in consts:
                    rhs = SymConst(rhs_txt)
                else:
                    rhs = Var(rhs_txt)
                off = int(um.group("off") or 0)
                if um.group("sign") == "-":
                    off = -off
                updates.append(DifferenceConstraint(um.group("lhs"), rhs, off))
            if bad:
                continue
            add_loc(m.group("src"))
            add_loc(m.group("tgt"))
            transitions.append(Transition(
                id=m.group("id"), source=m.group("src"), target=m.group("tgt"),
                guard=tuple(sorted(guard)),
                updates=tuple(sorted(updates, key=lambda u: u.lhs)),
                line=lineno,
            ))
            continue
        diags.append(Diagnostic(lineno, 1, f"cannot parse line {line!r}"))

    if entry is None:
        diags.append(Diagnostic(0, 0, "missing entry declaration"))
    if exit_ is None:
        diags.append(Diagnostic(0, 0, "missing exit declaration"))
    if diags:
        raise DcpError(diags)

    dcp = Dcp(
        locations=tuple(sorted(locations)),
        transitions=tuple(sorted(transitions, key=lambda t: t.id)),
        entry=entry,
        exit=exit_,
        variables=tuple(sorted(variables)),
        sym_consts=tuple(sorted(consts)),
    )
    diags = validate(dcp)
    if diags:
        raise DcpError(diags)
    return dcp


def format_dcp(dcp: Dcp, header_comments: Iterable[str] = ()) -> str:
    """Serialize in the file format parse_dcp reads."""
    lines = [f"# {c}" for c in header_comments]
    lines.append("dcp")
    lines.append("consts: " + ", ".join(dcp.sym_consts))
    lines.append("vars:   " + ", ".join(dcp.variables))
    lines.append(f"entry:  {dcp.entry}")
    lines.append(f"exit:   {dcp.exit}")
    for t in dcp.transitions:
        guard = f" guard({','.join(t.guard)})" if t.guard else ""
        body = " ".join(f"{u};" for u in t.updates)
        body = f" {body} " if body else " "
        lines.append(f"trans {t.id}: {t.source} -> {t.target}{guard} {{{body}}}")
    return "\n".join(lines) + "\n"
