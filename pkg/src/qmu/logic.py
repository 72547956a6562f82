"""Formula syntax: AST, parser, printer, negation normal form, priorities.

Concrete syntax (ASCII):

    formula := "mu" VAR "." formula | "nu" VAR "." formula | disj
    disj    := conj ("\\/" conj)*
    conj    := unary ("/\\" unary)*
    unary   := "<>" unary | "[]" unary | NUMBER "*" unary | "~" unary | atom
    atom    := "|" IDENT "-" NUMBER "|" | VAR | "(" formula ")"

Formulas are well-named: every fixpoint variable is bound at most once and
no name occurs both free and bound.  The parser rejects violations;
programmatic constructions can be repaired with :func:`rename_apart`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

__all__ = [
    "Formula",
    "Pred",
    "Var",
    "And",
    "Or",
    "Diamond",
    "Box",
    "Scale",
    "Mu",
    "Nu",
    "Not",
    "ParseError",
    "parse",
    "format_formula",
    "free_vars",
    "bound_vars",
    "subformulas",
    "substitute",
    "ensure_well_named",
    "rename_apart",
    "is_nnf",
    "to_nnf",
    "PriorityAssignment",
    "assign_priorities",
]


@dataclass(frozen=True)
class Formula:
    """Base class for formula nodes.  Nodes are immutable and hashable."""

    def children(self) -> tuple["Formula", ...]:
        return ()

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Pred(Formula):
    """Distance-to-constant atom: the value |P(state) - constant|."""

    name: str
    constant: float

    def __post_init__(self):
        c = float(self.constant)
        if math.isnan(c) or math.isinf(c) or c < 0.0:
            raise ValueError(f"predicate constant must be finite and nonnegative, got {self.constant}")
        object.__setattr__(self, "constant", c)


@dataclass(frozen=True)
class Var(Formula):
    name: str


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Diamond(Formula):
    child: Formula

    def children(self):
        return (self.child,)


@dataclass(frozen=True)
class Box(Formula):
    child: Formula

    def children(self):
        return (self.child,)


@dataclass(frozen=True)
class Scale(Formula):
    """Multiplication of a formula's value by a positive finite factor."""

    factor: float
    child: Formula

    def __post_init__(self):
        f = float(self.factor)
        if math.isnan(f) or math.isinf(f) or f <= 0.0:
            raise ValueError(f"scale factor must be strictly positive and finite, got {self.factor}")
        object.__setattr__(self, "factor", f)

    def children(self):
        return (self.child,)


@dataclass(frozen=True)
class Mu(Formula):
    """Least fixpoint binder."""

    var: str
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class Nu(Formula):
    """Greatest fixpoint binder."""

    var: str
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class Not(Formula):
    child: Formula

    def children(self):
        return (self.child,)


# ---------------------------------------------------------------------------
# printing

_LEVEL_FORMULA, _LEVEL_DISJ, _LEVEL_CONJ, _LEVEL_UNARY = 0, 1, 2, 3


def _fmt_number(x: float) -> str:
    if x == int(x) and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def _fmt(phi: Formula, level: int) -> str:
    if isinstance(phi, (Mu, Nu)):
        kw = "mu" if isinstance(phi, Mu) else "nu"
        s = f"{kw} {phi.var}. {_fmt(phi.body, _LEVEL_FORMULA)}"
        return f"({s})" if level > _LEVEL_FORMULA else s
    if isinstance(phi, Or):
        s = f"{_fmt(phi.left, _LEVEL_DISJ)} \\/ {_fmt(phi.right, _LEVEL_CONJ)}"
        return f"({s})" if level > _LEVEL_DISJ else s
    if isinstance(phi, And):
        s = f"{_fmt(phi.left, _LEVEL_CONJ)} /\\ {_fmt(phi.right, _LEVEL_UNARY)}"
        return f"({s})" if level > _LEVEL_CONJ else s
    if isinstance(phi, Diamond):
        return f"<> {_fmt(phi.child, _LEVEL_UNARY)}"
    if isinstance(phi, Box):
        return f"[] {_fmt(phi.child, _LEVEL_UNARY)}"
    if isinstance(phi, Scale):
        return f"{_fmt_number(phi.factor)} * {_fmt(phi.child, _LEVEL_UNARY)}"
    if isinstance(phi, Not):
        return f"~ {_fmt(phi.child, _LEVEL_UNARY)}"
    if isinstance(phi, Pred):
        return f"|{phi.name} - {_fmt_number(phi.constant)}|"
    if isinstance(phi, Var):
        return phi.name
    raise TypeError(f"not a formula node: {phi!r}")


def format_formula(phi: Formula) -> str:
    """Pretty-print in the concrete grammar; parse(format_formula(phi)) == phi."""
    return _fmt(phi, _LEVEL_FORMULA)


# ---------------------------------------------------------------------------
# parsing

class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


_TOKEN_RE = re.compile(
    r"""(?P<WS>\s+)
      | (?P<OR>\\/)
      | (?P<AND>/\\)
      | (?P<DIAMOND><>)
      | (?P<BOX>\[\])
      | (?P<NUMBER>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
      | (?P<IDENT>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<DOT>\.)
      | (?P<STAR>\*)
      | (?P<TILDE>~)
      | (?P<PIPE>\|)
      | (?P<MINUS>-)
      | (?P<LP>\()
      | (?P<RP>\))
    """,
    re.VERBOSE,
)

_KEYWORDS = {"mu", "nu"}


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "WS":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("EOF", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.bound: dict[str, int] = {}  # binder name -> position
        self.var_refs: list[tuple[str, int]] = []
        self.scopes: list[str] = []

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, what: str):
        tok = self.peek()
        if tok[0] != kind:
            raise ParseError(f"expected {what}, found {tok[1]!r}" if tok[1] else f"expected {what}", tok[2])
        return self.advance()

    def parse_formula(self) -> Formula:
        kind, text, pos = self.peek()
        if kind == "IDENT" and text in _KEYWORDS:
            self.advance()
            name_tok = self.expect("IDENT", "a variable name")
            name = name_tok[1]
            if name in _KEYWORDS:
                raise ParseError(f"{name!r} is a keyword, not a variable", name_tok[2])
            if name in self.bound:
                raise ParseError(f"variable {name!r} bound more than once", name_tok[2])
            self.bound[name] = name_tok[2]
            self.expect("DOT", "'.'")
            self.scopes.append(name)
            body = self.parse_formula()
            self.scopes.pop()
            return Mu(name, body) if text == "mu" else Nu(name, body)
        return self.parse_disj()

    def parse_disj(self) -> Formula:
        node = self.parse_conj()
        while self.peek()[0] == "OR":
            self.advance()
            node = Or(node, self.parse_conj())
        return node

    def parse_conj(self) -> Formula:
        node = self.parse_unary()
        while self.peek()[0] == "AND":
            self.advance()
            node = And(node, self.parse_unary())
        return node

    def parse_unary(self) -> Formula:
        kind, text, pos = self.peek()
        if kind == "DIAMOND":
            self.advance()
            return Diamond(self.parse_unary())
        if kind == "BOX":
            self.advance()
            return Box(self.parse_unary())
        if kind == "TILDE":
            self.advance()
            return Not(self.parse_unary())
        if kind == "NUMBER":
            self.advance()
            factor = float(text)
            self.expect("STAR", "'*' after a scale factor")
            child = self.parse_unary()
            if factor <= 0.0 or math.isinf(factor):
                raise ParseError(f"scale factor must be strictly positive and finite, got {text}", pos)
            return Scale(factor, child)
        return self.parse_atom()

    def parse_atom(self) -> Formula:
        kind, text, pos = self.peek()
        if kind == "PIPE":
            self.advance()
            name = self.expect("IDENT", "a predicate name")[1]
            self.expect("MINUS", "'-'")
            num_tok = self.expect("NUMBER", "a nonnegative constant")
            self.expect("PIPE", "closing '|'")
            return Pred(name, float(num_tok[1]))
        if kind == "IDENT":
            if text in _KEYWORDS:
                raise ParseError(f"unexpected keyword {text!r}", pos)
            self.advance()
            self.var_refs.append((text, pos))
            return Var(text)
        if kind == "LP":
            self.advance()
            node = self.parse_formula()
            self.expect("RP", "closing ')'")
            return node
        raise ParseError(f"unexpected token {text!r}" if text else "unexpected end of input", pos)


def parse(text: str) -> Formula:
    """Parse concrete syntax into a well-named formula.

    Free variables are allowed (evaluation can supply them through an
    environment); a name occurring both free and bound is rejected, as is
    binding the same variable twice.
    """
    parser = _Parser(text)
    phi = parser.parse_formula()
    tok = parser.peek()
    if tok[0] != "EOF":
        raise ParseError(f"trailing input {tok[1]!r}", tok[2])
    free = free_vars(phi)
    for name, pos in parser.var_refs:
        if name in free and name in parser.bound:
            raise ParseError(f"variable {name!r} occurs both free and bound", pos)
    return phi


# ---------------------------------------------------------------------------
# structural helpers

def free_vars(phi: Formula) -> frozenset[str]:
    if isinstance(phi, Var):
        return frozenset((phi.name,))
    if isinstance(phi, (Mu, Nu)):
        return free_vars(phi.body) - {phi.var}
    out: frozenset[str] = frozenset()
    for child in phi.children():
        out |= free_vars(child)
    return out


def bound_vars(phi: Formula) -> frozenset[str]:
    out: frozenset[str] = frozenset()
    if isinstance(phi, (Mu, Nu)):
        out |= {phi.var}
    for child in phi.children():
        out |= bound_vars(child)
    return out


def _var_occurrences(phi: Formula) -> frozenset[str]:
    if isinstance(phi, Var):
        return frozenset((phi.name,))
    out: frozenset[str] = frozenset()
    for child in phi.children():
        out |= _var_occurrences(child)
    return out


def subformulas(phi: Formula) -> list[Formula]:
    """Distinct subformulas in first-visit preorder."""
    seen: dict[Formula, None] = {}

    def walk(node: Formula):
        if node in seen:
            return
        seen[node] = None
        for child in node.children():
            walk(child)

    walk(phi)
    return list(seen)


def substitute(phi: Formula, name: str, replacement: Formula) -> Formula:
    """Replace free occurrences of ``name``.  Callers are expected to work
    with well-named formulas, where capture cannot happen."""
    if isinstance(phi, Var):
        return replacement if phi.name == name else phi
    if isinstance(phi, (Mu, Nu)):
        if phi.var == name:
            return phi
        return type(phi)(phi.var, substitute(phi.body, name, replacement))
    if isinstance(phi, (And, Or)):
        return type(phi)(substitute(phi.left, name, replacement), substitute(phi.right, name, replacement))
    if isinstance(phi, (Diamond, Box, Not)):
        return type(phi)(substitute(phi.child, name, replacement))
    if isinstance(phi, Scale):
        return Scale(phi.factor, substitute(phi.child, name, replacement))
    return phi


def ensure_well_named(phi: Formula) -> None:
    """Raise ValueError unless binders are unique and free/bound sets disjoint."""
    seen: set[str] = set()

    def walk(node: Formula):
        if isinstance(node, (Mu, Nu)):
            if node.var in seen:
                raise ValueError(f"variable {node.var!r} bound more than once")
            seen.add(node.var)
        for child in node.children():
            walk(child)

    walk(phi)
    clash = free_vars(phi) & seen
    if clash:
        raise ValueError(f"variables occur both free and bound: {sorted(clash)}")


def rename_apart(phi: Formula) -> Formula:
    """Freshen duplicate binders so the result is well-named.

    Free variables keep their names; a binder whose name was already used
    (free or by an earlier binder) gets a fresh primed name.
    """
    used = set(free_vars(phi))
    counter: dict[str, int] = {}

    def fresh(base: str) -> str:
        name = base
        while name in used:
            counter[base] = counter.get(base, 1) + 1
            name = f"{base}_{counter[base]}"
        used.add(name)
        return name

    def walk(node: Formula, env: dict[str, str]) -> Formula:
        if isinstance(node, Var):
            return Var(env.get(node.name, node.name))
        if isinstance(node, (Mu, Nu)):
            name = fresh(node.var)
            body = walk(node.body, {**env, node.var: name})
            return type(node)(name, body)
        if isinstance(node, (And, Or)):
            return type(node)(walk(node.left, env), walk(node.right, env))
        if isinstance(node, (Diamond, Box, Not)):
            return type(node)(walk(node.child, env))
        if isinstance(node, Scale):
            return Scale(node.factor, walk(node.child, env))
        return node

    return walk(phi, {})


# ---------------------------------------------------------------------------
# negation normal form

def is_nnf(phi: Formula) -> bool:
    """Whether negation appears only directly above predicate atoms."""
    if isinstance(phi, Not):
        return isinstance(phi.child, Pred)
    return all(is_nnf(c) for c in phi.children())


def to_nnf(phi: Formula) -> Formula:
    """Push negation down to the atoms.

    Rewrites used, applied top down:
      ~~a = a;  ~(a /\\ b) = ~a \\/ ~b;  ~(a \\/ b) = ~a /\\ ~b;
      ~<> a = [] ~a;  ~[] a = <> ~a;  ~(d * a) = (1/d) * ~a;
      ~mu X. a = nu X. ~a[X := ~X]  (and dually), where the inner double
      negation on the flipped variable cancels.

    Raises ValueError when a bound variable turns out to occur under an odd
    number of negations inside its binder (a non-monotone body), or when a
    negated free variable survives (nothing to rewrite it against).
    """
    ensure_well_named(phi)
    bound = bound_vars(phi)

    def go(node: Formula, negate: bool, flipped: frozenset[str]) -> Formula:
        if isinstance(node, Pred):
            return Not(node) if negate else node
        if isinstance(node, Var):
            if negate != (node.name in flipped):
                if node.name in bound:
                    raise ValueError(
                        f"variable {node.name!r} occurs under an odd number of "
                        f"negations inside its binder"
                    )
                raise ValueError(f"cannot normalise a negated free variable {node.name!r}")
            return node
        if isinstance(node, Not):
            return go(node.child, not negate, flipped)
        if isinstance(node, And):
            ctor = Or if negate else And
            return ctor(go(node.left, negate, flipped), go(node.right, negate, flipped))
        if isinstance(node, Or):
            ctor = And if negate else Or
            return ctor(go(node.left, negate, flipped), go(node.right, negate, flipped))
        if isinstance(node, Diamond):
            ctor = Box if negate else Diamond
            return ctor(go(node.child, negate, flipped))
        if isinstance(node, Box):
            ctor = Diamond if negate else Box
            return ctor(go(node.child, negate, flipped))
        if isinstance(node, Scale):
            factor = 1.0 / node.factor if negate else node.factor
            return Scale(factor, go(node.child, negate, flipped))
        if isinstance(node, Mu):
            if negate:
                return Nu(node.var, go(node.body, True, flipped | {node.var}))
            return Mu(node.var, go(node.body, False, flipped))
        if isinstance(node, Nu):
            if negate:
                return Mu(node.var, go(node.body, True, flipped | {node.var}))
            return Nu(node.var, go(node.body, False, flipped))
        raise TypeError(f"not a formula node: {node!r}")

    return go(phi, False, frozenset())


# ---------------------------------------------------------------------------
# priorities

@dataclass(frozen=True)
class PriorityAssignment:
    """Priorities for bound fixpoint variables plus the overall depth.

    Greatest-fixpoint variables get even priorities, least-fixpoint
    variables odd ones; variables lower in the alternation order get lower
    priorities.  ``depth`` is the alternation depth of the formula and is
    the priority given to every non-variable position of a game built from
    the formula.
    """

    priorities: dict[str, int]
    depth: int


def assign_priorities(phi: Formula) -> PriorityAssignment:
    """Compute alternation levels along dependency chains and derive priorities.

    A binder depends on an enclosing binder when the enclosing variable
    occurs inside its body.  The level of a variable is the length of the
    longest dependency chain of enclosing binders counted by fixpoint-type
    alternations; independent binders do not inflate each other's level.
    """
    ensure_well_named(phi)
    if not is_nnf(phi):
        raise ValueError("priority assignment expects a formula in negation normal form")

    is_nu: dict[str, bool] = {}
    enclosing: dict[str, tuple[str, ...]] = {}
    occurring: dict[str, frozenset[str]] = {}

    def walk(node: Formula, chain: tuple[str, ...]):
        if isinstance(node, (Mu, Nu)):
            is_nu[node.var] = isinstance(node, Nu)
            enclosing[node.var] = chain
            occurring[node.var] = _var_occurrences(node.body)
            walk(node.body, chain + (node.var,))
        else:
            for child in node.children():
                walk(child, chain)

    walk(phi, ())

    deps = {
        y: [x for x in enclosing[y] if x in occurring[y]]
        for y in is_nu
    }

    level: dict[str, int] = {}

    def alt_level(y: str) -> int:
        if y in level:
            return level[y]
        best = 1
        for x in deps[y]:
            cand = alt_level(x) + (1 if is_nu[x] != is_nu[y] else 0)
            best = max(best, cand)
        level[y] = best
        return best

    priorities: dict[str, int] = {}
    for y in is_nu:
        base = alt_level(y) - 1
        want_even = is_nu[y]
        if (base % 2 == 0) != want_even:
            base += 1
        priorities[y] = base

    depth = max(level.values(), default=0)
    return PriorityAssignment(priorities, depth)
