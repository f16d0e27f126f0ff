"""LTL syntax trees, parsing, normal forms, and fragment classification.

Formulas are immutable and canonically constructed: conjunctions and
disjunctions are flattened, deduplicated, sorted, and simplified with
unit/absorption/complement rules, so structurally equal formulas compare
equal and formula progression has a deterministic, finite state space.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import LtlParseError, UnsupportedNegation


class Formula:
    """Base class; all nodes are frozen dataclasses below."""

    def key(self) -> str:
        return _key(self)

    def __str__(self) -> str:
        return _pretty(self, 0)


@dataclass(frozen=True)
class TrueFormula(Formula):
    pass


@dataclass(frozen=True)
class FalseFormula(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    arg: Formula


@dataclass(frozen=True)
class Always(Formula):
    arg: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    """Dual of until; produced internally by NNF, not by the parser."""

    left: Formula
    right: Formula


TRUE = TrueFormula()
FALSE = FalseFormula()


def _key(f: Formula) -> str:
    cached = getattr(f, "_cached_key", None)
    if cached is not None:
        return cached
    if isinstance(f, TrueFormula):
        k = "1"
    elif isinstance(f, FalseFormula):
        k = "0"
    elif isinstance(f, Atom):
        k = f"p({f.name})"
    elif isinstance(f, Not):
        k = f"!({_key(f.arg)})"
    elif isinstance(f, And):
        k = "&(" + ",".join(_key(a) for a in f.args) + ")"
    elif isinstance(f, Or):
        k = "|(" + ",".join(_key(a) for a in f.args) + ")"
    elif isinstance(f, Next):
        k = f"X({_key(f.arg)})"
    elif isinstance(f, Eventually):
        k = f"F({_key(f.arg)})"
    elif isinstance(f, Always):
        k = f"G({_key(f.arg)})"
    elif isinstance(f, Until):
        k = f"U({_key(f.left)},{_key(f.right)})"
    elif isinstance(f, Release):
        k = f"R({_key(f.left)},{_key(f.right)})"
    else:
        raise TypeError(f"not a formula: {f!r}")
    object.__setattr__(f, "_cached_key", k)
    return k


def _pretty(f: Formula, prec: int) -> str:
    # precedence levels: 0 or, 1 and, 2 until/release, 3 unary/atoms
    if isinstance(f, TrueFormula):
        return "true"
    if isinstance(f, FalseFormula):
        return "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return "!" + _pretty(f.arg, 3)
    if isinstance(f, Next):
        return "X " + _pretty(f.arg, 3)
    if isinstance(f, Eventually):
        return "F " + _pretty(f.arg, 3)
    if isinstance(f, Always):
        return "G " + _pretty(f.arg, 3)
    if isinstance(f, Until):
        s = _pretty(f.left, 3) + " U " + _pretty(f.right, 2)
        return f"({s})" if prec > 2 else s
    if isinstance(f, Release):
        s = _pretty(f.left, 3) + " R " + _pretty(f.right, 2)
        return f"({s})" if prec > 2 else s
    if isinstance(f, And):
        s = " & ".join(_pretty(a, 2) for a in f.args)
        return f"({s})" if prec > 1 else s
    if isinstance(f, Or):
        s = " | ".join(_pretty(a, 1) for a in f.args)
        return f"({s})" if prec > 0 else s
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# canonical constructors


def lnot(f: Formula) -> Formula:
    if f is TRUE or isinstance(f, TrueFormula):
        return FALSE
    if f is FALSE or isinstance(f, FalseFormula):
        return TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def _complementary(members: set[str], f: Formula) -> bool:
    if isinstance(f, Not):
        return _key(f.arg) in members
    return _key(Not(f)) in members


def conj(*formulas: Formula) -> Formula:
    flat: list[Formula] = []
    for f in formulas:
        if isinstance(f, FalseFormula):
            return FALSE
        if isinstance(f, TrueFormula):
            continue
        if isinstance(f, And):
            flat.extend(f.args)
        else:
            flat.append(f)
    seen: dict[str, Formula] = {}
    for f in flat:
        seen.setdefault(_key(f), f)
    keys = set(seen)
    for f in seen.values():
        if _complementary(keys, f):
            return FALSE
    # absorption: x & (x | y) == x
    kept = []
    for k, f in seen.items():
        if isinstance(f, Or) and any(_key(d) in keys for d in f.args):
            continue
        kept.append((k, f))
    if not kept:
        return TRUE
    kept.sort(key=lambda kf: kf[0])
    if len(kept) == 1:
        return kept[0][1]
    return And(tuple(f for _, f in kept))


def disj(*formulas: Formula) -> Formula:
    flat: list[Formula] = []
    for f in formulas:
        if isinstance(f, TrueFormula):
            return TRUE
        if isinstance(f, FalseFormula):
            continue
        if isinstance(f, Or):
            flat.extend(f.args)
        else:
            flat.append(f)
    seen: dict[str, Formula] = {}
    for f in flat:
        seen.setdefault(_key(f), f)
    keys = set(seen)
    for f in seen.values():
        if _complementary(keys, f):
            return TRUE
    # absorption: x | (x & y) == x
    kept = []
    for k, f in seen.items():
        if isinstance(f, And) and any(_key(c) in keys for c in f.args):
            continue
        kept.append((k, f))
    if not kept:
        return FALSE
    kept.sort(key=lambda kf: kf[0])
    if len(kept) == 1:
        return kept[0][1]
    return Or(tuple(f for _, f in kept))


def nxt(f: Formula) -> Formula:
    return Next(f)


def eventually(f: Formula) -> Formula:
    if isinstance(f, (TrueFormula, FalseFormula)):
        return f
    if isinstance(f, Eventually):
        return f
    return Eventually(f)


def always(f: Formula) -> Formula:
    if isinstance(f, (TrueFormula, FalseFormula)):
        return f
    if isinstance(f, Always):
        return f
    return Always(f)


def until(left: Formula, right: Formula) -> Formula:
    if isinstance(right, (TrueFormula, FalseFormula)):
        return right
    if isinstance(left, FalseFormula):
        return right
    return Until(left, right)


def release(left: Formula, right: Formula) -> Formula:
    if isinstance(right, (TrueFormula, FalseFormula)):
        return right
    if isinstance(left, TrueFormula):
        return right
    return Release(left, right)


# ---------------------------------------------------------------------------
# parsing

_UNICODE_ALIASES = {"¬": "!", "∧": "&", "∨": "|"}
_RESERVED = {"G", "F", "X", "U", "true", "false"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        c = _UNICODE_ALIASES.get(c, c)
        if c in "!&|()":
            tokens.append((c, c, i))
            i += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word in ("G", "F", "X", "U", "true", "false"):
                tokens.append((word, word, i))
            else:
                tokens.append(("ident", word, i))
            i = j
            continue
        raise LtlParseError(i, f"unknown token {text[i]!r}")
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        tok = self.take()
        if tok[0] != kind:
            raise LtlParseError(tok[2], f"expected {kind!r}, found {tok[1] or 'end of input'!r}")
        return tok

    def parse(self) -> Formula:
        f = self.parse_or()
        tok = self.peek()
        if tok[0] != "end":
            raise LtlParseError(tok[2], f"unexpected token {tok[1]!r}")
        return f

    def parse_or(self) -> Formula:
        parts = [self.parse_and()]
        while self.peek()[0] == "|":
            self.take()
            parts.append(self.parse_and())
        return disj(*parts) if len(parts) > 1 else parts[0]

    def parse_and(self) -> Formula:
        parts = [self.parse_until()]
        while self.peek()[0] == "&":
            self.take()
            parts.append(self.parse_until())
        return conj(*parts) if len(parts) > 1 else parts[0]

    def parse_until(self) -> Formula:
        left = self.parse_unary()
        if self.peek()[0] == "U":
            self.take()
            right = self.parse_until()  # right-associative
            return until(left, right)
        return left

    def parse_unary(self) -> Formula:
        kind, value, pos = self.peek()
        if kind == "!":
            self.take()
            return lnot(self.parse_unary())
        if kind == "G":
            self.take()
            return always(self.parse_unary())
        if kind == "F":
            self.take()
            return eventually(self.parse_unary())
        if kind == "X":
            self.take()
            return nxt(self.parse_unary())
        if kind == "(":
            self.take()
            f = self.parse_or()
            self.expect(")")
            return f
        if kind == "true":
            self.take()
            return TRUE
        if kind == "false":
            self.take()
            return FALSE
        if kind == "ident":
            self.take()
            return Atom(value)
        raise LtlParseError(pos, f"expected a formula, found {value or 'end of input'!r}")


def parse_ltl(text: str) -> Formula:
    """Parse an LTL formula from its ASCII syntax.

    Precedence: unary (!, G, F, X) > U > & > |, with U right-associative.
    """
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# structural queries


def atoms(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset([f.name])
    if isinstance(f, (TrueFormula, FalseFormula)):
        return frozenset()
    if isinstance(f, (Not, Next, Eventually, Always)):
        return atoms(f.arg)
    if isinstance(f, (Until, Release)):
        return atoms(f.left) | atoms(f.right)
    return frozenset().union(*(atoms(a) for a in f.args))


def is_propositional(f: Formula) -> bool:
    if isinstance(f, (Atom, TrueFormula, FalseFormula)):
        return True
    if isinstance(f, Not):
        return is_propositional(f.arg)
    if isinstance(f, (And, Or)):
        return all(is_propositional(a) for a in f.args)
    return False


def eval_propositional(f: Formula, letter: frozenset[str] | set[str]) -> bool:
    if isinstance(f, TrueFormula):
        return True
    if isinstance(f, FalseFormula):
        return False
    if isinstance(f, Atom):
        return f.name in letter
    if isinstance(f, Not):
        return not eval_propositional(f.arg, letter)
    if isinstance(f, And):
        return all(eval_propositional(a, letter) for a in f.args)
    if isinstance(f, Or):
        return any(eval_propositional(a, letter) for a in f.args)
    raise ValueError(f"not propositional: {f}")


def _contains(f: Formula, kinds: tuple[type, ...]) -> bool:
    if isinstance(f, kinds):
        return True
    if isinstance(f, (Not, Next, Eventually, Always)):
        return _contains(f.arg, kinds)
    if isinstance(f, (Until, Release)):
        return _contains(f.left, kinds) or _contains(f.right, kinds)
    if isinstance(f, (And, Or)):
        return any(_contains(a, kinds) for a in f.args)
    return False


# ---------------------------------------------------------------------------
# negation normal form


def to_nnf(f: Formula) -> Formula:
    """Push negations down to atoms, dualizing temporal operators.

    A negated until over propositional operands becomes the equivalent
    safety form (a release); with temporal operands the dual is outside
    the grammar and UnsupportedNegation is raised.
    """
    if isinstance(f, (Atom, TrueFormula, FalseFormula)):
        return f
    if isinstance(f, And):
        return conj(*(to_nnf(a) for a in f.args))
    if isinstance(f, Or):
        return disj(*(to_nnf(a) for a in f.args))
    if isinstance(f, Next):
        return nxt(to_nnf(f.arg))
    if isinstance(f, Eventually):
        return eventually(to_nnf(f.arg))
    if isinstance(f, Always):
        return always(to_nnf(f.arg))
    if isinstance(f, Until):
        return until(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Release):
        return release(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Not):
        g = f.arg
        if isinstance(g, Atom):
            return f
        if isinstance(g, TrueFormula):
            return FALSE
        if isinstance(g, FalseFormula):
            return TRUE
        if isinstance(g, Not):
            return to_nnf(g.arg)
        if isinstance(g, And):
            return disj(*(to_nnf(lnot(a)) for a in g.args))
        if isinstance(g, Or):
            return conj(*(to_nnf(lnot(a)) for a in g.args))
        if isinstance(g, Next):
            return nxt(to_nnf(lnot(g.arg)))
        if isinstance(g, Eventually):
            return always(to_nnf(lnot(g.arg)))
        if isinstance(g, Always):
            return eventually(to_nnf(lnot(g.arg)))
        if isinstance(g, Until):
            if is_propositional(g.left) and is_propositional(g.right):
                return release(to_nnf(lnot(g.left)), to_nnf(lnot(g.right)))
            raise UnsupportedNegation(
                f"cannot negate until with temporal operands: {g}"
            )
        if isinstance(g, Release):
            return until(to_nnf(lnot(g.left)), to_nnf(lnot(g.right)))
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# fragment classification

CO_SAFE = "co-safe"
SAFE = "safe"
RECURRENCE = "recurrence"
PERSISTENCE = "persistence"
UNSUPPORTED = "unsupported"


def split_conjuncts(f: Formula) -> tuple[Formula, ...]:
    return f.args if isinstance(f, And) else (f,)


def classify_conjunct(f: Formula) -> str:
    if isinstance(f, Always) and isinstance(f.arg, Eventually) and is_propositional(f.arg.arg):
        return RECURRENCE
    if isinstance(f, Eventually) and isinstance(f.arg, Always) and is_propositional(f.arg.arg):
        return PERSISTENCE
    if not _contains(f, (Always, Release)):
        return CO_SAFE
    if not _contains(f, (Eventually, Until)):
        return SAFE
    return UNSUPPORTED


def classify(f: Formula) -> list[str]:
    """Tag each top-level conjunct of an NNF formula with its fragment."""
    return [classify_conjunct(c) for c in split_conjuncts(f)]
