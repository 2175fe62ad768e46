"""Scalar expressions over named chart coordinates.

A small expression language: a recursive-descent parser, a printer that
round-trips through the parser, exact symbolic differentiation and numeric
evaluation (scalars or numpy arrays, broadcast together).

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | base ('^' integer)?
    base   := number | ident | ident '(' expr ')' | '(' expr ')'

Recognized functions are ``sin``, ``cos``, ``sqrt`` and ``exp``; the only
named constant is ``pi``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Union

import numpy as np

__all__ = [
    "ACTION",
    "NONCOMPACT",
    "PERIODIC",
    "Coordinate",
    "Chart",
    "ScalarExpr",
    "Const",
    "Var",
    "Add",
    "Mul",
    "Div",
    "Neg",
    "Pow",
    "Func",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "DomainError",
    "NotPolynomialError",
    "parse",
    "to_string",
    "differentiate",
    "evaluate",
    "substitute",
    "variables",
    "polynomial_coefficients",
    "numerically_equal",
    "as_expr",
]

ACTION = "action"
NONCOMPACT = "noncompact"
PERIODIC = "periodic"
_KINDS = (ACTION, NONCOMPACT, PERIODIC)

FUNCTIONS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
    "exp": np.exp,
}
CONSTANTS = {"pi": math.pi}


class ExprSyntaxError(SyntaxError):
    def __init__(self, message: str, position: int, source: str = ""):
        super().__init__(f"{message} at position {position}")
        self.position = position
        self.source = source


class UnknownIdentifierError(NameError):
    def __init__(self, name: str):
        super().__init__(f"unknown identifier {name!r}")
        self.name = name


class DomainError(ArithmeticError):
    """Raised when evaluation leaves the domain of an operation."""

    def __init__(self, message: str, subexpr: "ScalarExpr"):
        super().__init__(f"{message} in {to_string(subexpr)!r}")
        self.subexpr = subexpr


class NotPolynomialError(ValueError):
    pass


# ---------------------------------------------------------------- charts


@dataclass(frozen=True)
class Coordinate:
    name: str
    kind: str
    period: float | None = None

    def __post_init__(self):
        if not re.fullmatch(r"[a-zA-Z][a-zA-Z0-9_]*", self.name):
            raise ValueError(f"invalid coordinate name {self.name!r}")
        if self.name in FUNCTIONS or self.name in CONSTANTS:
            raise ValueError(f"coordinate name {self.name!r} is reserved")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown coordinate kind {self.kind!r}")
        if self.kind == PERIODIC:
            if self.period is None or not self.period > 0:
                raise ValueError(f"periodic coordinate {self.name!r} needs a positive period")
        elif self.period is not None:
            raise ValueError(f"only periodic coordinates carry a period ({self.name!r})")


@dataclass(frozen=True)
class Chart:
    """Ordered list of coordinates with their kinds."""

    coords: tuple[Coordinate, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        names = [c.name for c in self.coords]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in {names}")

    @classmethod
    def of(cls, *specs) -> "Chart":
        """Build a chart from ``name``, ``(name, kind)`` or ``(name, kind, period)``.

        Bare names default to the noncompact kind.
        """
        coords = []
        for spec in specs:
            if isinstance(spec, Coordinate):
                coords.append(spec)
            elif isinstance(spec, str):
                coords.append(Coordinate(spec, NONCOMPACT))
            else:
                coords.append(Coordinate(*spec))
        return cls(tuple(coords))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.coords)

    def index(self, name: str) -> int:
        for i, c in enumerate(self.coords):
            if c.name == name:
                return i
        raise UnknownIdentifierError(name)

    def __getitem__(self, name: str) -> Coordinate:
        return self.coords[self.index(name)]

    def __contains__(self, name) -> bool:
        return name in self.names

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def to_json(self) -> list:
        out = []
        for c in self.coords:
            item = {"name": c.name, "kind": c.kind}
            if c.period is not None:
                item["period"] = c.period
            out.append(item)
        return out

    @classmethod
    def from_json(cls, data) -> "Chart":
        coords = []
        for item in data:
            if isinstance(item, str):
                coords.append(Coordinate(item, NONCOMPACT))
            else:
                coords.append(Coordinate(item["name"], item.get("kind", NONCOMPACT), item.get("period")))
        return cls(tuple(coords))


# ----------------------------------------------------------------- nodes


class ScalarExpr:
    """Base class of expression nodes. Nodes are immutable and compare structurally."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n: int):
        return power(self, n)

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True, repr=False)
class Const(ScalarExpr):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))

    def __repr__(self):
        return f"Const({self.value!r})"


@dataclass(frozen=True, repr=False)
class Var(ScalarExpr):
    name: str

    def __repr__(self):
        return f"Var({self.name!r})"


@dataclass(frozen=True, repr=False)
class Add(ScalarExpr):
    left: ScalarExpr
    right: ScalarExpr

    def __repr__(self):
        return f"Add({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Mul(ScalarExpr):
    left: ScalarExpr
    right: ScalarExpr

    def __repr__(self):
        return f"Mul({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Div(ScalarExpr):
    left: ScalarExpr
    right: ScalarExpr

    def __repr__(self):
        return f"Div({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Neg(ScalarExpr):
    arg: ScalarExpr

    def __repr__(self):
        return f"Neg({self.arg!r})"


@dataclass(frozen=True, repr=False)
class Pow(ScalarExpr):
    base: ScalarExpr
    exponent: int

    def __post_init__(self):
        if int(self.exponent) != self.exponent:
            raise ValueError("only integer exponents are supported")
        object.__setattr__(self, "exponent", int(self.exponent))

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exponent})"


@dataclass(frozen=True, repr=False)
class Func(ScalarExpr):
    name: str
    arg: ScalarExpr

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ValueError(f"unsupported function {self.name!r}")

    def __repr__(self):
        return f"Func({self.name!r}, {self.arg!r})"


ZERO = Const(0.0)
ONE = Const(1.0)

ExprLike = Union[ScalarExpr, float, int]


def as_expr(value) -> ScalarExpr:
    if isinstance(value, ScalarExpr):
        return value
    if isinstance(value, (int, float, np.floating, np.integer)):
        return Const(float(value))
    raise TypeError(f"cannot convert {type(value).__name__} to an expression")


# -------------------------------------------------- simplifying builders
# Constant folding and zero/one elimination only.


def _is_const(e, value=None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


def add(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if isinstance(b, Neg):
        return sub(a, b.arg)
    return Add(a, b)


def sub(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    if a == b:
        return ZERO
    return Add(a, Neg(b))


def neg(a: ScalarExpr) -> ScalarExpr:
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mul(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a, -1.0):
        return neg(b)
    if _is_const(b, -1.0):
        return neg(a)
    return Mul(a, b)


def div(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if _is_const(b, 0.0):
        return Div(a, b)  # left for evaluate() to report
    if _is_const(a) and _is_const(b):
        return Const(a.value / b.value)
    if _is_const(a, 0.0):
        return ZERO
    if _is_const(b, 1.0):
        return a
    return Div(a, b)


def power(a: ScalarExpr, n: int) -> ScalarExpr:
    if n == 0:
        return ONE
    if n == 1:
        return a
    if _is_const(a) and not (a.value == 0.0 and n < 0):
        return Const(a.value**n)
    return Pow(a, n)


def func(name: str, a: ScalarExpr) -> ScalarExpr:
    if _is_const(a):
        if name == "sqrt" and a.value < 0:
            return Func(name, a)
        return Const(float(FUNCTIONS[name](a.value)))
    return Func(name, a)


# ----------------------------------------------------------------- parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[a-zA-Z][a-zA-Z0-9_]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(src: str):
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if m is None:
            bad = pos + (len(src[pos:]) - len(src[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {src[bad]!r}", bad, src)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str, names: set[str] | None, constants: Mapping[str, float]):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0
        self.names = names
        self.constants = constants

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, message: str):
        kind, text, pos = self.tok
        if kind == "end":
            message = f"{message}, got end of input"
        else:
            message = f"{message}, got {text!r}"
        raise ExprSyntaxError(message, pos, self.src)

    def accept(self, op: str) -> bool:
        if self.tok[0] == "op" and self.tok[1] == op:
            self.i += 1
            return True
        return False

    def expect(self, op: str):
        if not self.accept(op):
            self.error(f"expected {op!r}")

    def parse(self) -> ScalarExpr:
        e = self.expr()
        if self.tok[0] != "end":
            self.error("unexpected token")
        return e

    def expr(self) -> ScalarExpr:
        e = self.term()
        while True:
            if self.accept("+"):
                e = Add(e, self.term())
            elif self.accept("-"):
                e = Add(e, Neg(self.term()))
            else:
                return e

    def term(self) -> ScalarExpr:
        e = self.factor()
        while True:
            if self.accept("*"):
                e = Mul(e, self.factor())
            elif self.accept("/"):
                e = Div(e, self.factor())
            else:
                return e

    def factor(self) -> ScalarExpr:
        if self.accept("-"):
            return Neg(self.factor())
        b = self.base()
        if self.accept("^"):
            sign = -1 if self.accept("-") else 1
            kind, text, _ = self.tok
            if kind != "num" or not text.isdigit():
                self.error("expected integer exponent")
            self.i += 1
            b = Pow(b, sign * int(text))
        return b

    def base(self) -> ScalarExpr:
        kind, text, pos = self.tok
        if kind == "num":
            self.i += 1
            return Const(float(text))
        if kind == "id":
            self.i += 1
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(text, arg)
            if self.tok[0] == "op" and self.tok[1] == "(":
                raise UnknownIdentifierError(text)
            if text in self.constants:
                return Const(self.constants[text])
            if text in CONSTANTS:
                return Const(CONSTANTS[text])
            if self.names is not None and text not in self.names:
                raise UnknownIdentifierError(text)
            return Var(text)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.error("expected a number, identifier or '('")


def parse(
    src: str,
    chart: Chart | Iterable[str] | None = None,
    constants: Mapping[str, float] | None = None,
) -> ScalarExpr:
    """Parse ``src`` into an expression tree.

    Identifiers must name coordinates of ``chart`` (any identifier is accepted
    when ``chart`` is None). Names in ``constants`` are replaced by their
    numeric values at parse time.
    """
    if chart is None:
        names = None
    elif isinstance(chart, Chart):
        names = set(chart.names)
    else:
        names = set(chart)
    return _Parser(src, names, dict(constants or {})).parse()


# ---------------------------------------------------------------- printer

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _fmt_number(v: float) -> str:
    if v == math.pi:
        return "pi"
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _prec(e: ScalarExpr) -> int:
    if isinstance(e, Const):
        return _PREC_NEG if (e.value < 0 or math.copysign(1.0, e.value) < 0) else _PREC_ATOM
    if isinstance(e, (Var, Func)):
        return _PREC_ATOM
    if isinstance(e, Add):
        return _PREC_ADD
    if isinstance(e, (Mul, Div)):
        return _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_NEG
    return _PREC_POW


def _wrap(e: ScalarExpr, needs: bool) -> str:
    s = to_string(e)
    return f"({s})" if needs else s


def to_string(e: ScalarExpr) -> str:
    """Print ``e`` in the parser's grammar; parsing the result gives back the same tree."""
    if isinstance(e, Const):
        v = e.value
        if math.copysign(1.0, v) < 0:
            return "-" + _fmt_number(-v)
        return _fmt_number(v)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({to_string(e.arg)})"
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _prec(e.arg) < _PREC_NEG)
    if isinstance(e, Pow):
        return _wrap(e.base, _prec(e.base) < _PREC_ATOM) + f"^{e.exponent}"
    if isinstance(e, Add):
        left = _wrap(e.left, False)
        if isinstance(e.right, Neg):
            inner = e.right.arg
            return f"{left} - " + _wrap(inner, _prec(inner) <= _PREC_ADD)
        return f"{left} + " + _wrap(e.right, _prec(e.right) <= _PREC_ADD)
    if isinstance(e, (Mul, Div)):
        op = "*" if isinstance(e, Mul) else "/"
        left = _wrap(e.left, _prec(e.left) < _PREC_MUL)
        return f"{left}{op}" + _wrap(e.right, _prec(e.right) <= _PREC_MUL)
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------- queries


def variables(e: ScalarExpr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, (Add, Mul, Div)):
        return variables(e.left) | variables(e.right)
    if isinstance(e, (Neg, Func)):
        return variables(e.arg)
    if isinstance(e, Pow):
        return variables(e.base)
    raise TypeError(f"not an expression node: {e!r}")


def substitute(e: ScalarExpr, mapping: Mapping[str, ExprLike]) -> ScalarExpr:
    """Replace variables by expressions, simplifying as the tree is rebuilt."""
    if isinstance(e, Var):
        return as_expr(mapping[e.name]) if e.name in mapping else e
    if isinstance(e, Const):
        return e
    if isinstance(e, Add):
        return add(substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Mul):
        return mul(substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Div):
        return div(substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Neg):
        return neg(substitute(e.arg, mapping))
    if isinstance(e, Pow):
        return power(substitute(e.base, mapping), e.exponent)
    if isinstance(e, Func):
        return func(e.name, substitute(e.arg, mapping))
    raise TypeError(f"not an expression node: {e!r}")


# -------------------------------------------------------- differentiation


def differentiate(e: ScalarExpr, coord: str, chart: Chart | None = None) -> ScalarExpr:
    """Exact partial derivative of ``e`` with respect to ``coord``."""
    if chart is not None and coord not in chart:
        raise UnknownIdentifierError(coord)
    return _d(e, coord)


def _d(e: ScalarExpr, x: str) -> ScalarExpr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == x else ZERO
    if isinstance(e, Add):
        return add(_d(e.left, x), _d(e.right, x))
    if isinstance(e, Neg):
        return neg(_d(e.arg, x))
    if isinstance(e, Mul):
        u, v = e.left, e.right
        return add(mul(_d(u, x), v), mul(u, _d(v, x)))
    if isinstance(e, Div):
        u, v = e.left, e.right
        du, dv = _d(u, x), _d(v, x)
        if _is_const(dv, 0.0):
            return div(du, v)
        return div(sub(mul(du, v), mul(u, dv)), power(v, 2))
    if isinstance(e, Pow):
        du = _d(e.base, x)
        if _is_const(du, 0.0):
            return ZERO
        return mul(mul(Const(e.exponent), power(e.base, e.exponent - 1)), du)
    if isinstance(e, Func):
        du = _d(e.arg, x)
        if _is_const(du, 0.0):
            return ZERO
        if e.name == "sin":
            outer = func("cos", e.arg)
        elif e.name == "cos":
            outer = neg(func("sin", e.arg))
        elif e.name == "exp":
            outer = e
        else:  # sqrt
            outer = div(ONE, mul(Const(2.0), e))
        return mul(outer, du)
    raise TypeError(f"not an expression node: {e!r}")


# ------------------------------------------------------------- evaluation


def evaluate(e: ScalarExpr, point: Mapping[str, object]):
    """Evaluate ``e`` at ``point`` (name -> float or array).

    Array-valued coordinates broadcast against each other; the result is a
    float for scalar inputs and an ndarray otherwise.
    """
    value = _eval(e, point)
    if isinstance(value, np.ndarray) and value.ndim == 0:
        return float(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _eval(e: ScalarExpr, point):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            v = point[e.name]
        except KeyError:
            raise UnknownIdentifierError(e.name) from None
        return np.asarray(v, dtype=float) if not isinstance(v, float) else v
    if isinstance(e, Add):
        return _eval(e.left, point) + _eval(e.right, point)
    if isinstance(e, Mul):
        return _eval(e.left, point) * _eval(e.right, point)
    if isinstance(e, Neg):
        return -_eval(e.arg, point)
    if isinstance(e, Div):
        num = _eval(e.left, point)
        den = _eval(e.right, point)
        if np.any(np.asarray(den) == 0):
            raise DomainError("division by zero", e)
        return num / den
    if isinstance(e, Pow):
        b = _eval(e.base, point)
        if e.exponent < 0:
            if np.any(np.asarray(b) == 0):
                raise DomainError("zero raised to a negative power", e)
            return 1.0 / b ** (-e.exponent)
        return b**e.exponent
    if isinstance(e, Func):
        a = _eval(e.arg, point)
        if e.name == "sqrt" and np.any(np.asarray(a) < 0):
            raise DomainError("square root of a negative number", e)
        if isinstance(a, float):
            return float(FUNCTIONS[e.name](a))
        return FUNCTIONS[e.name](a)
    raise TypeError(f"not an expression node: {e!r}")


def numerically_equal(
    a: ScalarExpr,
    b: ScalarExpr,
    points: Iterable[Mapping[str, float]],
    tol: float = 1e-10,
) -> bool:
    """Compare two expressions at sample points (relative to magnitude, floor 1)."""
    for p in points:
        va, vb = evaluate(a, p), evaluate(b, p)
        if abs(va - vb) > tol * max(1.0, abs(va), abs(vb)):
            return False
    return True


# ------------------------------------------------------------ polynomials

Poly = dict[tuple[int, ...], float]


def polynomial_coefficients(e: ScalarExpr, names: Iterable[str]) -> Poly:
    """Expand ``e`` as a polynomial in ``names``.

    Returns a map from exponent tuples (ordered as ``names``) to coefficients.
    Any other variable, a non-integer or negative power of a symbol, or a
    function of a symbol raises NotPolynomialError.
    """
    names = tuple(names)
    poly = _poly(e, names)
    return {k: v for k, v in poly.items() if v != 0.0}


def _poly(e, names) -> Poly:
    zero = (0,) * len(names)
    if isinstance(e, Const):
        return {zero: e.value}
    if isinstance(e, Var):
        if e.name not in names:
            raise NotPolynomialError(f"symbol {e.name!r} is not one of {names}")
        k = [0] * len(names)
        k[names.index(e.name)] = 1
        return {tuple(k): 1.0}
    if isinstance(e, Add):
        return _padd(_poly(e.left, names), _poly(e.right, names))
    if isinstance(e, Neg):
        return {k: -v for k, v in _poly(e.arg, names).items()}
    if isinstance(e, Mul):
        return _pmul(_poly(e.left, names), _poly(e.right, names))
    if isinstance(e, Div):
        den = _poly(e.right, names)
        if set(den) - {zero}:
            raise NotPolynomialError(f"division by a non-constant in {to_string(e)!r}")
        c = den.get(zero, 0.0)
        if c == 0.0:
            raise DomainError("division by zero", e)
        return {k: v / c for k, v in _poly(e.left, names).items()}
    if isinstance(e, Pow):
        base = _poly(e.base, names)
        if e.exponent < 0:
            if set(base) - {zero}:
                raise NotPolynomialError(f"negative power of a symbol in {to_string(e)!r}")
            return {zero: base.get(zero, 0.0) ** e.exponent}
        out = {zero: 1.0}
        for _ in range(e.exponent):
            out = _pmul(out, base)
        return out
    if isinstance(e, Func):
        arg = _poly(e.arg, names)
        if set(arg) - {zero}:
            raise NotPolynomialError(f"function of a symbol in {to_string(e)!r}")
        return {zero: float(evaluate(Func(e.name, Const(arg.get(zero, 0.0))), {}))}
    raise TypeError(f"not an expression node: {e!r}")


def _padd(p: Poly, q: Poly) -> Poly:
    out = dict(p)
    for k, v in q.items():
        out[k] = out.get(k, 0.0) + v
    return out


def _pmul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for k1, v1 in p.items():
        for k2, v2 in q.items():
            k = tuple(a + b for a, b in zip(k1, k2))
            out[k] = out.get(k, 0.0) + v1 * v2
    return out
