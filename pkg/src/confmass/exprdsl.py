"""Small expression language for analytic chart data.

Metric components, Lee-form components, spinor components and conformal
factors are all given as strings in a tiny arithmetic language and parsed
to immutable trees.  Grammar (EBNF):

    expr      = term , { ("+" | "-") , term } ;
    term      = unary , { ("*" | "/") , unary } ;
    unary     = "-" , unary | power ;
    power     = atom , { "^" , exponent } ;
    exponent  = [ "-" ] , digits ;                (integer literal, |e| <= 64)
    atom      = number | identifier | call | "(" , expr , ")" ;
    call      = funcname , "(" , expr , [ "," , expr ] , ")" ;
    funcname  = "sqrt" | "exp" | "log" | "sin" | "cos" | "atan" | "pow" ;

Precedence is ``^`` > unary minus > ``*`` ``/`` > ``+`` ``-``, left
associative at equal precedence, so ``-x^2`` is ``-(x^2)`` and ``x^2^3``
is ``(x^2)^3``.  Numbers are decimal literals (binary64), optionally in
scientific notation.

Identifiers: ``x1 .. xn`` are the chart coordinates, ``r`` is the derived
radius sqrt(x1^2 + ... + xn^2), and anything else is a named parameter
bound at evaluation time.  Names matching ``x<digits>`` and ``r`` are
reserved and cannot be parameters.

``^`` takes integer literal exponents only and is evaluated by repeated
multiplication; fractional powers must be spelled with ``sqrt`` or
``pow``.  ``pow(u, s)`` uses a direct power when ``s`` contains no
coordinate (so it is constant along the chart) and exp(s*log(u))
otherwise.

Parse errors carry the 0-based byte offset of the offending token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping

import numpy as np

__all__ = [
    "ExprAst", "Num", "Var", "Neg", "BinOp", "Pow", "Call",
    "ParseError", "EvalError",
    "parse", "evaluate", "to_source", "identifiers", "is_coordinate_free",
    "substitute", "derivative", "eadd", "esub", "emul", "ediv",
    "FUNCTIONS", "MAX_INT_EXPONENT", "COORD_RE",
]

FUNCTIONS = {"sqrt": 1, "exp": 1, "log": 1, "sin": 1, "cos": 1, "atan": 1, "pow": 2}
MAX_INT_EXPONENT = 64

#: coordinate-like names are reserved: x1, x2, ... and the radius r
COORD_RE = re.compile(r"^x[0-9]+$")


class ParseError(ValueError):
    """Syntax or grammar error; ``offset`` is the 0-based byte position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class EvalError(ValueError):
    """Raised for unbound identifiers or malformed evaluation input."""


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "ExprAst"


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*', '/'
    left: "ExprAst"
    right: "ExprAst"


@dataclass(frozen=True)
class Pow:
    base: "ExprAst"
    exponent: int


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple["ExprAst", ...]


ExprAst = Num | Var | Neg | BinOp | Pow | Call


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<num>(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?)
      | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # 'num' | 'name' | 'op' | 'end'
    text: str
    offset: int


def _tokenize(src: str) -> list[_Token]:
    out = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", pos)
        if m.lastgroup != "ws":
            out.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    out.append(_Token("end", "", len(src)))
    return out


# ---------------------------------------------------------------------------
# parser (recursive descent)

class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self) -> _Token:
        return self.toks[self.i]

    def next(self) -> _Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, op: str) -> _Token:
        t = self.peek()
        if t.kind != "op" or t.text != op:
            got = repr(t.text) if t.kind != "end" else "end of input"
            raise ParseError(f"expected {op!r}, got {got}", t.offset)
        return self.next()

    def parse(self) -> ExprAst:
        e = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ParseError(f"unexpected {t.text!r}", t.offset)
        return e

    def expr(self) -> ExprAst:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.next().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> ExprAst:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.next().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> ExprAst:
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self) -> ExprAst:
        node = self.atom()
        while self.peek().kind == "op" and self.peek().text == "^":
            self.next()
            node = Pow(node, self.int_exponent())
        return node

    def int_exponent(self) -> int:
        sign = 1
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.next()
            sign = -1
            t = self.peek()
        if t.kind != "num":
            got = repr(t.text) if t.kind != "end" else "end of input"
            raise ParseError(f"expected integer exponent, got {got}", t.offset)
        if not t.text.isdigit():
            raise ParseError(f"exponent must be an integer literal, got {t.text!r}", t.offset)
        self.next()
        e = sign * int(t.text)
        if abs(e) > MAX_INT_EXPONENT:
            raise ParseError(f"exponent {e} exceeds |e| <= {MAX_INT_EXPONENT}", t.offset)
        return e

    def atom(self) -> ExprAst:
        t = self.peek()
        if t.kind == "num":
            self.next()
            return Num(float(t.text))
        if t.kind == "name":
            self.next()
            nt = self.peek()
            if nt.kind == "op" and nt.text == "(":
                return self.call(t)
            return Var(t.text)
        if t.kind == "op" and t.text == "(":
            self.next()
            e = self.expr()
            self.expect_op(")")
            return e
        got = repr(t.text) if t.kind != "end" else "end of input"
        raise ParseError(f"unexpected {got}", t.offset)

    def call(self, name: _Token) -> ExprAst:
        if name.text not in FUNCTIONS:
            raise ParseError(f"unknown function {name.text!r}", name.offset)
        self.expect_op("(")
        args = [self.expr()]
        while self.peek().kind == "op" and self.peek().text == ",":
            self.next()
            args.append(self.expr())
        self.expect_op(")")
        want = FUNCTIONS[name.text]
        if len(args) != want:
            raise ParseError(
                f"{name.text} takes {want} argument{'s' if want > 1 else ''}, got {len(args)}",
                name.offset,
            )
        return Call(name.text, tuple(args))


def parse(src: str) -> ExprAst:
    """Parse ``src`` to an immutable expression tree.

    Raises:
        ParseError: on any syntax problem, with a 0-based byte offset.
    """
    return _Parser(src).parse()


# ---------------------------------------------------------------------------
# evaluation

def _radius(coords: np.ndarray) -> np.ndarray:
    # shared with the jet evaluator: identical summation order keeps the
    # plain value and the jet value part bitwise equal
    s = coords[0] * coords[0]
    for i in range(1, coords.shape[0]):
        s = s + coords[i] * coords[i]
    return np.sqrt(s)


def _ipow(value, e: int):
    """x^e by left-fold repeated multiplication (same order as the jet path)."""
    if e == 0:
        return np.ones_like(value * 1.0)
    acc = value
    for _ in range(abs(e) - 1):
        acc = acc * value
    if e < 0:
        acc = np.divide(1.0, acc)
    return acc


_NP_FN: dict[str, Callable] = {
    "sqrt": np.sqrt, "exp": np.exp, "log": np.log,
    "sin": np.sin, "cos": np.cos, "atan": np.arctan,
}


def identifiers(ast: ExprAst) -> set[str]:
    """All identifier names appearing in the tree."""
    out: set[str] = set()
    stack = [ast]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node.name)
        elif isinstance(node, Neg):
            stack.append(node.arg)
        elif isinstance(node, BinOp):
            stack.extend((node.left, node.right))
        elif isinstance(node, Pow):
            stack.append(node.base)
        elif isinstance(node, Call):
            stack.extend(node.args)
    return out


def is_coordinate_free(ast: ExprAst) -> bool:
    """True if the expression references no coordinate and not ``r``.

    Used to decide the ``pow`` lowering: a coordinate-free exponent is
    constant along the chart, so ``pow(u, s)`` can take the direct power
    branch; otherwise it becomes exp(s*log(u)).  The same structural rule
    is applied by the jet evaluator so both agree bitwise.
    """
    return not any(name == "r" or COORD_RE.match(name) for name in identifiers(ast))


def evaluate(ast: ExprAst, coords, params: Mapping[str, float] | None = None):
    """Evaluate at a point (shape (n,)) or batch of points (shape (n, B)).

    Returns a numpy float64 scalar / array.  Unbound identifiers raise
    EvalError; domain violations (log of a negative number, ...) follow
    IEEE semantics and propagate NaN.
    """
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim not in (1, 2):
        raise EvalError(f"coords must have shape (n,) or (n, B), got {coords.shape}")
    params = params or {}
    n = coords.shape[0]
    r_cache: list = [None]

    def go(node: ExprAst):
        if isinstance(node, Num):
            return np.float64(node.value)
        if isinstance(node, Var):
            name = node.name
            if name == "r":
                if r_cache[0] is None:
                    r_cache[0] = _radius(coords)
                return r_cache[0]
            m = COORD_RE.match(name)
            if m:
                idx = int(name[1:]) - 1
                if not 0 <= idx < n:
                    raise EvalError(f"coordinate {name} out of range for n={n}")
                return coords[idx]
            if name in params:
                return np.float64(params[name])
            raise EvalError(f"unbound identifier {name!r}")
        if isinstance(node, Neg):
            return -go(node.arg)
        if isinstance(node, BinOp):
            a, b = go(node.left), go(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            return np.divide(a, b)
        if isinstance(node, Pow):
            return _ipow(go(node.base), node.exponent)
        if isinstance(node, Call):
            if node.fn == "pow":
                base = go(node.args[0])
                ex = go(node.args[1])
                with np.errstate(invalid="ignore", divide="ignore"):
                    if is_coordinate_free(node.args[1]):
                        return np.power(base, ex)
                    return np.exp(ex * np.log(base))
            with np.errstate(invalid="ignore", divide="ignore"):
                return _NP_FN[node.fn](go(node.args[0]))
        raise EvalError(f"unknown node {node!r}")

    with np.errstate(invalid="ignore", divide="ignore"):
        return go(ast)


# ---------------------------------------------------------------------------
# canonical printer

_LEVEL_ADD, _LEVEL_MUL, _LEVEL_UNARY, _LEVEL_POW, _LEVEL_ATOM = 0, 1, 2, 3, 4


def _level(node: ExprAst) -> int:
    if isinstance(node, BinOp):
        return _LEVEL_ADD if node.op in "+-" else _LEVEL_MUL
    if isinstance(node, Neg):
        return _LEVEL_UNARY
    if isinstance(node, Pow):
        return _LEVEL_POW
    if isinstance(node, Num) and node.value < 0:
        return _LEVEL_UNARY
    return _LEVEL_ATOM


def to_source(ast: ExprAst) -> str:
    """Render a tree back to source.  parse(to_source(parse(s))) == parse(s)."""

    def wrap(node: ExprAst, minlevel: int) -> str:
        s = go(node)
        return f"({s})" if _level(node) < minlevel else s

    def go(node: ExprAst) -> str:
        if isinstance(node, Num):
            return repr(node.value)
        if isinstance(node, Var):
            return node.name
        if isinstance(node, Neg):
            return "-" + wrap(node.arg, _LEVEL_UNARY)
        if isinstance(node, BinOp):
            # left-associative: the right child needs parens at equal level
            lvl = _LEVEL_ADD if node.op in "+-" else _LEVEL_MUL
            lhs = wrap(node.left, lvl)
            rhs = wrap(node.right, lvl + 1)
            if node.op in "+-":
                return f"{lhs} {node.op} {rhs}"
            return f"{lhs}{node.op}{rhs}"
        if isinstance(node, Pow):
            base = wrap(node.base, _LEVEL_ATOM)
            return f"{base}^{node.exponent}"
        if isinstance(node, Call):
            return f"{node.fn}({', '.join(go(a) for a in node.args)})"
        raise TypeError(f"unknown node {node!r}")

    return go(ast)


# ---------------------------------------------------------------------------
# structural helpers: substitution and symbolic derivative
#
# These exist so charts can be transformed in closed form (conformal
# rescaling g -> f g with theta -> theta - df/(2f), and coordinate scaling
# z -> z/sqrt(a)).  They are deliberately simple -- enough algebraic
# simplification to keep trees small, no more.

_ZERO = Num(0.0)
_ONE = Num(1.0)


def _is_const(node: ExprAst, v: float) -> bool:
    return isinstance(node, Num) and node.value == v


def eadd(a: ExprAst, b: ExprAst) -> ExprAst:
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return BinOp("+", a, b)


def esub(a: ExprAst, b: ExprAst) -> ExprAst:
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return Neg(b)
    return BinOp("-", a, b)


def emul(a: ExprAst, b: ExprAst) -> ExprAst:
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return _ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return BinOp("*", a, b)


def ediv(a: ExprAst, b: ExprAst) -> ExprAst:
    if _is_const(a, 0.0):
        return _ZERO
    if _is_const(b, 1.0):
        return a
    return BinOp("/", a, b)


def substitute(ast: ExprAst, mapping: Mapping[str, ExprAst]) -> ExprAst:
    """Replace identifiers by subtrees.  Note ``r`` must be mapped
    explicitly when the coordinates are transformed."""
    if isinstance(ast, Num):
        return ast
    if isinstance(ast, Var):
        return mapping.get(ast.name, ast)
    if isinstance(ast, Neg):
        return Neg(substitute(ast.arg, mapping))
    if isinstance(ast, BinOp):
        return BinOp(ast.op, substitute(ast.left, mapping), substitute(ast.right, mapping))
    if isinstance(ast, Pow):
        return Pow(substitute(ast.base, mapping), ast.exponent)
    if isinstance(ast, Call):
        return Call(ast.fn, tuple(substitute(a, mapping) for a in ast.args))
    raise TypeError(f"unknown node {ast!r}")


def derivative(ast: ExprAst, coord: str) -> ExprAst:
    """Symbolic partial derivative with respect to coordinate ``coord``.

    The derived radius obeys the chain rule d r / d x_i = x_i / r.
    Parameters differentiate to zero.
    """
    if not COORD_RE.match(coord):
        raise ValueError(f"derivative is with respect to a coordinate, got {coord!r}")

    def d(node: ExprAst) -> ExprAst:
        if isinstance(node, Num):
            return _ZERO
        if isinstance(node, Var):
            if node.name == coord:
                return _ONE
            if node.name == "r":
                return ediv(Var(coord), Var("r"))
            return _ZERO
        if isinstance(node, Neg):
            da = d(node.arg)
            return _ZERO if _is_const(da, 0.0) else Neg(da)
        if isinstance(node, BinOp):
            da, db = d(node.left), d(node.right)
            if node.op == "+":
                return eadd(da, db)
            if node.op == "-":
                return esub(da, db)
            if node.op == "*":
                return eadd(emul(da, node.right), emul(node.left, db))
            # quotient rule
            num = esub(emul(da, node.right), emul(node.left, db))
            return ediv(num, Pow(node.right, 2))
        if isinstance(node, Pow):
            db = d(node.base)
            if node.exponent == 0 or _is_const(db, 0.0):
                return _ZERO
            coef = emul(Num(float(node.exponent)), Pow(node.base, node.exponent - 1))
            return emul(coef, db)
        if isinstance(node, Call):
            if node.fn == "pow":
                u, s = node.args
                du, ds = d(u), d(s)
                # d(u^s) = u^s * (ds*log u + s*du/u)
                terms = eadd(emul(ds, Call("log", (u,))), emul(s, ediv(du, u)))
                return emul(Call("pow", (u, s)), terms)
            (u,) = node.args
            du = d(u)
            if _is_const(du, 0.0):
                return _ZERO
            if node.fn == "sqrt":
                return ediv(du, emul(Num(2.0), Call("sqrt", (u,))))
            if node.fn == "exp":
                return emul(Call("exp", (u,)), du)
            if node.fn == "log":
                return ediv(du, u)
            if node.fn == "sin":
                return emul(Call("cos", (u,)), du)
            if node.fn == "cos":
                return Neg(emul(Call("sin", (u,)), du))
            if node.fn == "atan":
                return ediv(du, eadd(_ONE, Pow(u, 2)))
        raise TypeError(f"unknown node {node!r}")

    return d(ast)
