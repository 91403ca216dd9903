"""Symbolic bound expressions over integers and named nonnegative constants.

Every bound the analyses produce is one of these expressions. Construction
goes through the smart constructors (add, mul, maximum, minimum), which keep
expressions in a canonical normal form so that equal bounds print identically:
nested sums/products/max/min are flattened, integer constants are folded,
like terms are collected, and argument lists are sorted by their printed form.
The undefined element absorbs every operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

__all__ = [
    "BoundExpr",
    "IntConst",
    "SymConst",
    "Sum",
    "Product",
    "Max",
    "Min",
    "Undefined",
    "UNDEFINED",
    "add",
    "mul",
    "maximum",
    "minimum",
    "build",
    "normalize",
    "evaluate",
    "to_str",
    "parse_expr",
    "sym_consts",
    "rename_sym_consts",
    "is_provably_nonneg",
    "EvaluationError",
    "ExprParseError",
]


class EvaluationError(ValueError):
    """A symbolic constant needed by evaluate() is missing from the valuation."""


class ExprParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at offset {pos})")
        self.pos = pos


class BoundExpr:
    """Base class; concrete nodes are the frozen dataclasses below."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_str(self)


@dataclass(frozen=True)
class IntConst(BoundExpr):
    value: int


@dataclass(frozen=True)
class SymConst(BoundExpr):
    name: str


@dataclass(frozen=True)
class Sum(BoundExpr):
    terms: tuple[BoundExpr, ...]


@dataclass(frozen=True)
class Product(BoundExpr):
    factors: tuple[BoundExpr, ...]


@dataclass(frozen=True)
class Max(BoundExpr):
    args: tuple[BoundExpr, ...]


@dataclass(frozen=True)
class Min(BoundExpr):
    args: tuple[BoundExpr, ...]


@dataclass(frozen=True)
class Undefined(BoundExpr):
    pass


UNDEFINED = Undefined()

ZERO = IntConst(0)
ONE_EXPR = IntConst(1)


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def to_str(e: BoundExpr) -> str:
    if isinstance(e, IntConst):
        return str(e.value)
    if isinstance(e, SymConst):
        return e.name
    if isinstance(e, Undefined):
        return "undef"
    if isinstance(e, Sum):
        return " + ".join(to_str(t) for t in e.terms)
    if isinstance(e, Product):
        return "*".join(_factor_str(f) for f in e.factors)
    if isinstance(e, Max):
        return "max(" + ",".join(to_str(a) for a in e.args) + ")"
    if isinstance(e, Min):
        return "min(" + ",".join(to_str(a) for a in e.args) + ")"
    raise TypeError(f"not a BoundExpr: {e!r}")


def _factor_str(f: BoundExpr) -> str:
    # Sums need parentheses in factor position; everything else is atomic.
    if isinstance(f, Sum):
        return "(" + to_str(f) + ")"
    return to_str(f)


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------

def is_provably_nonneg(e: BoundExpr) -> bool:
    """Syntactic nonnegativity: symbolic constants range over the naturals,
    so sums/products of them with nonnegative integer parts cannot be < 0."""
    if isinstance(e, IntConst):
        return e.value >= 0
    if isinstance(e, SymConst):
        return True
    if isinstance(e, Sum):
        return all(is_provably_nonneg(t) for t in e.terms)
    if isinstance(e, Product):
        return all(is_provably_nonneg(f) for f in e.factors)
    if isinstance(e, Max):
        return any(is_provably_nonneg(a) for a in e.args)
    if isinstance(e, Min):
        return all(is_provably_nonneg(a) for a in e.args)
    return False


def normalize(e: BoundExpr) -> BoundExpr:
    if isinstance(e, (IntConst, SymConst, Undefined)):
        return e
    if isinstance(e, Sum):
        return _norm_sum([normalize(t) for t in e.terms])
    if isinstance(e, Product):
        return _norm_product([normalize(f) for f in e.factors])
    if isinstance(e, Max):
        return _norm_maxmin([normalize(a) for a in e.args], Max)
    if isinstance(e, Min):
        return _norm_maxmin([normalize(a) for a in e.args], Min)
    raise TypeError(f"not a BoundExpr: {e!r}")


def _sorted_by_print(items: Iterable[BoundExpr]) -> list[BoundExpr]:
    return sorted(items, key=to_str)


def _term_parts(term: BoundExpr) -> tuple[int, tuple[BoundExpr, ...]]:
    """Split a normalized non-sum term into (integer coefficient, factor key)."""
    if isinstance(term, IntConst):
        return term.value, ()
    if isinstance(term, Product):
        coeff = 1
        rest = []
        for f in term.factors:
            if isinstance(f, IntConst):
                coeff *= f.value
            else:
                rest.append(f)
        return coeff, tuple(rest)
    return 1, (term,)


def _mk_product(coeff: int, factors: list[BoundExpr]) -> BoundExpr:
    if coeff == 0 or not factors:
        return IntConst(coeff)
    parts = list(factors)
    if coeff != 1:
        parts.append(IntConst(coeff))
    parts.sort(key=_factor_str)  # order by the form factors print in
    if len(parts) == 1:
        return parts[0]
    return Product(tuple(parts))


def _norm_sum(terms: list[BoundExpr]) -> BoundExpr:
    flat: list[BoundExpr] = []
    for t in terms:
        if isinstance(t, Undefined):
            return UNDEFINED
        if isinstance(t, Sum):
            flat.extend(t.terms)
        else:
            flat.append(t)
    coeffs: dict[tuple[BoundExpr, ...], int] = {}
    order: list[tuple[BoundExpr, ...]] = []
    for t in flat:
        c, key = _term_parts(t)
        if key not in coeffs:
            coeffs[key] = 0
            order.append(key)
        coeffs[key] += c
    out: list[BoundExpr] = []
    const = coeffs.pop((), 0)
    for key in order:
        if key not in coeffs:
            continue
        c = coeffs[key]
        if c == 0:
            continue
        out.append(_mk_product(c, list(key)))
    if const != 0 or not out:
        out.append(IntConst(const))
    out = _sorted_by_print(out)
    if len(out) == 1:
        return out[0]
    return Sum(tuple(out))


def _norm_product(factors: list[BoundExpr]) -> BoundExpr:
    flat: list[BoundExpr] = []
    for f in factors:
        if isinstance(f, Undefined):
            return UNDEFINED
        if isinstance(f, Product):
            flat.extend(f.factors)
        else:
            flat.append(f)
    coeff = 1
    rest: list[BoundExpr] = []
    for f in flat:
        if isinstance(f, IntConst):
            coeff *= f.value
        else:
            rest.append(f)
    if coeff == 0:
        return ZERO
    rest = _drop_unit_min_factors(rest)
    return _mk_product(coeff, rest)


def _drop_unit_min_factors(factors: list[BoundExpr]) -> list[BoundExpr]:
    # min(1, X) * X == X pointwise when X is a natural: X=0 gives 0 on both
    # sides, X>=1 makes the min collapse to 1.
    changed = True
    out = list(factors)
    while changed:
        changed = False
        for i, f in enumerate(out):
            if not (isinstance(f, Min) and len(f.args) == 2 and ONE_EXPR in f.args):
                continue
            other = f.args[0] if f.args[1] == ONE_EXPR else f.args[1]
            rest = out[:i] + out[i + 1:]
            if other in rest and is_provably_nonneg(other):
                out = rest
                changed = True
                break
    return out


def _norm_maxmin(args: list[BoundExpr], cls: type) -> BoundExpr:
    flat: list[BoundExpr] = []
    for a in args:
        if isinstance(a, Undefined):
            return UNDEFINED
        if isinstance(a, cls):
            flat.extend(a.args)  # type: ignore[attr-defined]
        else:
            flat.append(a)
    ints = [a.value for a in flat if isinstance(a, IntConst)]
    rest: list[BoundExpr] = []
    seen: set[BoundExpr] = set()
    for a in flat:
        if isinstance(a, IntConst) or a in seen:
            continue
        seen.add(a)
        rest.append(a)
    folded: int | None = None
    if ints:
        folded = max(ints) if cls is Max else min(ints)
    if cls is Max and folded is not None and folded <= 0 and any(
        is_provably_nonneg(a) for a in rest
    ):
        # max(e, c) == max(e) when e >= 0 >= c is guaranteed.
        folded = None
    out = list(rest)
    if folded is not None:
        out.append(IntConst(folded))
    if not out:
        return ZERO
    out = _sorted_by_print(out)
    if len(out) == 1:
        return out[0]
    return cls(tuple(out))


# ---------------------------------------------------------------------------
# smart constructors
# ---------------------------------------------------------------------------

def _coerce(x: BoundExpr | int) -> BoundExpr:
    if isinstance(x, int):
        return IntConst(x)
    return x


def add(*args: BoundExpr | int) -> BoundExpr:
    if not args:
        raise ValueError("add() needs at least one argument")
    return _norm_sum([normalize(_coerce(a)) for a in args])


def mul(*args: BoundExpr | int) -> BoundExpr:
    if not args:
        raise ValueError("mul() needs at least one argument")
    return _norm_product([normalize(_coerce(a)) for a in args])


def maximum(*args: BoundExpr | int) -> BoundExpr:
    if not args:
        raise ValueError("maximum() needs at least one argument")
    return _norm_maxmin([normalize(_coerce(a)) for a in args], Max)


def minimum(*args: BoundExpr | int) -> BoundExpr:
    if not args:
        raise ValueError("minimum() needs at least one argument")
    return _norm_maxmin([normalize(_coerce(a)) for a in args], Min)


_BUILDERS = {"add": add, "mul": mul, "max": maximum, "min": minimum}


def build(op: str, args: Iterable[BoundExpr | int]) -> BoundExpr:
    """Apply one of {add, mul, max, min} to a non-empty argument sequence."""
    args = list(args)
    if op not in _BUILDERS:
        raise ValueError(f"unknown operator {op!r}")
    if not args:
        raise ValueError("build() needs at least one argument")
    return _BUILDERS[op](*args)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def evaluate(e: BoundExpr, valuation: Mapping[str, int]) -> int | None:
    """Evaluate under a total assignment of the symbolic constants.

    Returns None for the undefined element. Raises EvaluationError when a
    symbolic constant has no value.
    """
    if isinstance(e, IntConst):
        return e.value
    if isinstance(e, SymConst):
        try:
            return valuation[e.name]
        except KeyError:
            raise EvaluationError(f"no value for symbolic constant {e.name!r}") from None
    if isinstance(e, Undefined):
        return None
    if isinstance(e, Sum):
        vals = [evaluate(t, valuation) for t in e.terms]
        return None if None in vals else sum(vals)  # type: ignore[arg-type]
    if isinstance(e, Product):
        acc = 1
        for f in e.factors:
            v = evaluate(f, valuation)
            if v is None:
                return None
            acc *= v
        return acc
    if isinstance(e, Max):
        vals = [evaluate(a, valuation) for a in e.args]
        return None if None in vals else max(vals)  # type: ignore[type-var]
    if isinstance(e, Min):
        vals = [evaluate(a, valuation) for a in e.args]
        return None if None in vals else min(vals)  # type: ignore[type-var]
    raise TypeError(f"not a BoundExpr: {e!r}")


def sym_consts(e: BoundExpr) -> set[str]:
    if isinstance(e, SymConst):
        return {e.name}
    if isinstance(e, Sum):
        return set().union(*(sym_consts(t) for t in e.terms)) if e.terms else set()
    if isinstance(e, Product):
        return set().union(*(sym_consts(f) for f in e.factors)) if e.factors else set()
    if isinstance(e, (Max, Min)):
        return set().union(*(sym_consts(a) for a in e.args)) if e.args else set()
    return set()


def rename_sym_consts(e: BoundExpr, mapping: Mapping[str, str]) -> BoundExpr:
    """Rename symbolic constants; the result is re-normalized."""
    def walk(x: BoundExpr) -> BoundExpr:
        if isinstance(x, SymConst):
            return SymConst(mapping.get(x.name, x.name))
        if isinstance(x, Sum):
            return Sum(tuple(walk(t) for t in x.terms))
        if isinstance(x, Product):
            return Product(tuple(walk(f) for f in x.factors))
        if isinstance(x, Max):
            return Max(tuple(walk(a) for a in x.args))
        if isinstance(x, Min):
            return Min(tuple(walk(a) for a in x.args))
        return x
    return normalize(walk(e))


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------
#
# expr   := term ('+' term)*
# term   := factor ('*' factor)*
# factor := INT | IDENT | 'max(' expr (',' expr)+ ')'
#         | 'min(' expr (',' expr)+ ')' | '(' expr ')' | 'undef'

_WS = " \t\n\r"


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, str, int]] = []
        i, n = 0, len(text)
        while i < n:
            ch = text[i]
            if ch in _WS:
                i += 1
                continue
            if ch in "+*(),":
                self.toks.append((ch, ch, i))
                i += 1
                continue
            if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
                j = i + 1
                while j < n and text[j].isdigit():
                    j += 1
                self.toks.append(("INT", text[i:j], i))
                i = j
                continue
            if ch.isalpha() or ch == "_":
                j = i + 1
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                self.toks.append(("IDENT", text[i:j], i))
                i = j
                continue
            raise ExprParseError(f"unexpected character {ch!r}", i)
        self.pos = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self) -> tuple[str, str, int]:
        t = self.peek()
        if t is None:
            raise ExprParseError("unexpected end of input", len(self.text))
        self.pos += 1
        return t

    def expect(self, kind: str) -> tuple[str, str, int]:
        t = self.next()
        if t[0] != kind:
            raise ExprParseError(f"expected {kind!r}, found {t[1]!r}", t[2])
        return t


def parse_expr(text: str) -> BoundExpr:
    """Parse the canonical expression syntax; the result is normalized."""
    toks = _Tokens(text)
    e = _parse_sum(toks)
    left = toks.peek()
    if left is not None:
        raise ExprParseError(f"trailing input {left[1]!r}", left[2])
    return e


def _parse_sum(toks: _Tokens) -> BoundExpr:
    terms = [_parse_term(toks)]
    while True:
        t = toks.peek()
        if t is not None and t[0] == "+":
            toks.next()
            terms.append(_parse_term(toks))
        else:
            return add(*terms)


def _parse_term(toks: _Tokens) -> BoundExpr:
    factors = [_parse_factor(toks)]
    while True:
        t = toks.peek()
        if t is not None and t[0] == "*":
            toks.next()
            factors.append(_parse_factor(toks))
        else:
            return mul(*factors)


def _parse_factor(toks: _Tokens) -> BoundExpr:
    kind, val, pos = toks.next()
    if kind == "INT":
        return IntConst(int(val))
    if kind == "(":
        e = _parse_sum(toks)
        toks.expect(")")
        return e
    if kind == "IDENT":
        if val == "undef":
            return UNDEFINED
        if val in ("max", "min"):
            toks.expect("(")
            args = [_parse_sum(toks)]
            while True:
                t = toks.next()
                if t[0] == ",":
                    args.append(_parse_sum(toks))
                elif t[0] == ")":
                    break
                else:
                    raise ExprParseError(f"expected ',' or ')', found {t[1]!r}", t[2])
            if len(args) < 2:
                raise ExprParseError(f"{val}() needs at least two arguments", pos)
            return maximum(*args) if val == "max" else minimum(*args)
        return SymConst(val)
    raise ExprParseError(f"unexpected token {val!r}", pos)
