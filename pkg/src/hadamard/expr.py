"""A tiny math DSL for real functions of one variable ``x``.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = primary [ "^" unary ] ;
    primary = number | "x" | "e" | "pi" | name "(" expr ")" | "(" expr ")" ;
    name    = "exp" | "log" | "sqrt" | "abs" ;
    number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
            | "." digits [ exponent ] ;

``^`` is right-associative and binds tighter than unary minus, so ``-x^2`` is
``-(x^2)`` and ``2^3^2`` is ``2^(3^2)``.  Implicit multiplication is not
supported.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from typing import Union

import numpy as np

FUNCTIONS = ("exp", "log", "sqrt", "abs")
CONSTANTS = {"e": math.e, "pi": math.pi}
BINARY_SYMBOLS = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}
_SYMBOL_TO_OP = {v: k for k, v in BINARY_SYMBOLS.items()}


class ExprError(ValueError):
    """Base class for DSL errors."""


class ParseError(ExprError):
    """Syntax error at a UTF-8 byte offset."""

    def __init__(self, offset: int, expected: tuple[str, ...], found: str = ""):
        self.offset = offset
        self.expected = tuple(expected)
        self.found = found
        what = f" but found {found!r}" if found else ""
        super().__init__(f"syntax error at offset {offset}: expected {' or '.join(self.expected)}{what}")


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at offset {offset}")


# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Variable:
    name: str = "x"


@dataclass(frozen=True)
class Constant:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Expr"


Expr = Union[Number, Variable, Constant, Unary, Binary, Call]


@dataclass(frozen=True)
class EvalOutcome:
    """Either a finite value or a domain fault description."""

    value: float = math.nan
    fault: str | None = None

    @property
    def ok(self) -> bool:
        return self.fault is None


# -- lexer -------------------------------------------------------------------


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    pos: int  # character index


# the grammar is ASCII; str.isdigit() would also accept e.g. Arabic-Indic digits
_DIGITS = frozenset(string.digits)
_IDENT_START = frozenset(string.ascii_letters + "_")
_IDENT_CHARS = _IDENT_START | _DIGITS


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
        elif ch in _DIGITS or (ch == "." and i + 1 < n and source[i + 1] in _DIGITS):
            j = i
            while j < n and source[j] in _DIGITS:
                j += 1
            if j < n and source[j] == ".":
                j += 1
                while j < n and source[j] in _DIGITS:
                    j += 1
            # an exponent only counts when digits follow, otherwise "2e" is 2 then e
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k] in _DIGITS:
                    while k < n and source[k] in _DIGITS:
                        k += 1
                    j = k
            tokens.append(_Token("num", source[i:j], i))
            i = j
        elif ch in _IDENT_START:
            j = i
            while j < n and source[j] in _IDENT_CHARS:
                j += 1
            tokens.append(_Token("ident", source[i:j], i))
            i = j
        elif ch in "+-*/^()":
            tokens.append(_Token("op", ch, i))
            i += 1
        else:
            raise ParseError(_byte_offset(source, i), ("expression",), ch)
    tokens.append(_Token("end", "", n))
    return tokens


def _byte_offset(source: str, char_index: int) -> int:
    return len(source[:char_index].encode("utf-8"))


# -- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def _error(self, expected: tuple[str, ...]) -> ParseError:
        tok = self.tok
        return ParseError(_byte_offset(self.source, tok.pos), expected, tok.text)

    def _is_op(self, symbols: str) -> bool:
        return self.tok.kind == "op" and self.tok.text in symbols

    def _expect(self, symbol: str) -> None:
        if not self._is_op(symbol):
            raise self._error((repr(symbol),))
        self.i += 1

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "end":
            raise self._error(("operator", "end of input"))
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self._is_op("+-"):
            op = _SYMBOL_TO_OP[self.tok.text]
            self.i += 1
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self._is_op("*/"):
            op = _SYMBOL_TO_OP[self.tok.text]
            self.i += 1
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self._is_op("-"):
            self.i += 1
            return Unary("neg", self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self._is_op("^"):
            self.i += 1
            return Binary("pow", base, self.unary())
        return base

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            value = float(tok.text)
            if not math.isfinite(value):
                raise ParseError(_byte_offset(self.source, tok.pos), ("finite number",), tok.text)
            self.i += 1
            return Number(value)
        if tok.kind == "ident":
            self.i += 1
            if tok.text == "x":
                return Variable()
            if tok.text in CONSTANTS:
                return Constant(tok.text)
            if tok.text in FUNCTIONS:
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return Call(tok.text, arg)
            raise UnknownIdentifierError(tok.text, _byte_offset(self.source, tok.pos))
        if self._is_op("("):
            self.i += 1
            node = self.expr()
            self._expect(")")
            return node
        raise self._error(("expression",))


def parse(source: str) -> Expr:
    """Parse DSL text into an expression tree."""
    return _Parser(source).parse()


def as_expr(e: Expr | str) -> Expr:
    return parse(e) if isinstance(e, str) else e


# -- printing ----------------------------------------------------------------


def _format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def pretty(e: Expr) -> str:
    """Fully parenthesized canonical text; ``parse(pretty(e)) == e``."""
    if isinstance(e, Number):
        return _format_number(e.value)
    if isinstance(e, Variable):
        return e.name
    if isinstance(e, Constant):
        return e.name
    if isinstance(e, Unary):
        return f"(-{pretty(e.operand)})"
    if isinstance(e, Binary):
        return f"({pretty(e.left)}{BINARY_SYMBOLS[e.op]}{pretty(e.right)})"
    if isinstance(e, Call):
        return f"{e.name}({pretty(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


# -- scalar evaluation -------------------------------------------------------


class DomainFault(ArithmeticError):
    """Raised by compiled scalar functions outside their domain."""


def _finite(r: float) -> float:
    if not math.isfinite(r):
        raise DomainFault("non-finite result")
    return r


def _pow(a: float, b: float) -> float:
    if a == 0.0 and b < 0:
        raise DomainFault("division by zero")
    if a < 0 and not b.is_integer():
        raise DomainFault("pow of negative base with non-integer exponent")
    try:
        return _finite(math.pow(a, b))
    except OverflowError:
        raise DomainFault("non-finite result") from None


def _exp(v: float) -> float:
    try:
        return _finite(math.exp(v))
    except OverflowError:
        raise DomainFault("non-finite result") from None


def _log(v: float) -> float:
    if v <= 0:
        raise DomainFault("log of non-positive")
    return math.log(v)


def _sqrt(v: float) -> float:
    if v < 0:
        raise DomainFault("sqrt of negative")
    return math.sqrt(v)


def _div(a: float, b: float) -> float:
    if b == 0.0:
        raise DomainFault("division by zero")
    return _finite(a / b)


_CALLS = {"exp": _exp, "log": _log, "sqrt": _sqrt, "abs": abs}
_BINARY = {
    "add": lambda a, b: _finite(a + b),
    "sub": lambda a, b: _finite(a - b),
    "mul": lambda a, b: _finite(a * b),
    "div": _div,
    "pow": _pow,
}


def _compile(e: Expr):
    if isinstance(e, Number):
        v = e.value
        return lambda x: v
    if isinstance(e, Variable):
        return lambda x: x
    if isinstance(e, Constant):
        v = CONSTANTS[e.name]
        return lambda x: v
    if isinstance(e, Unary):
        inner = _compile(e.operand)
        return lambda x: -inner(x)
    if isinstance(e, Call):
        fn, inner = _CALLS[e.name], _compile(e.arg)
        return lambda x: fn(inner(x))
    if isinstance(e, Binary):
        op, left, right = _BINARY[e.op], _compile(e.left), _compile(e.right)
        return lambda x: op(left(x), right(x))
    raise TypeError(f"not an expression node: {e!r}")


def _codegen(e: Expr):
    """Straight-line Python source for ``e``.

    Arithmetic results are checked for overflow inline (``t - t`` is NaN for
    an infinity); ``math`` functions signal their own domain errors.
    """
    lines: list[str] = []
    consts: dict[str, float] = {}

    def emit(node) -> str:
        if isinstance(node, Variable):
            return "x"
        if isinstance(node, (Number, Constant)):
            name = f"k{len(consts)}"
            consts[name] = node.value if isinstance(node, Number) else CONSTANTS[node.name]
            return name
        t = f"t{len(lines)}"
        if isinstance(node, Unary):
            lines.append(f"{t} = -{emit(node.operand)}")
        elif isinstance(node, Call):
            fn = "abs" if node.name == "abs" else f"_{node.name}"
            lines.append(f"{t} = {fn}({emit(node.arg)})")
        elif node.op == "pow":
            a, b = emit(node.left), emit(node.right)
            lines.append(f"{t} = _pow({a}, {b})")
        else:
            a, b = emit(node.left), emit(node.right)
            lines.append(f"{t} = {a} {BINARY_SYMBOLS[node.op]} {b}")
            lines.append(f"if {t} - {t}: raise OverflowError")
        return t

    result = emit(e)
    body = "\n    ".join(lines + [f"return {result}"])
    namespace = {"_exp": math.exp, "_log": math.log, "_sqrt": math.sqrt, "_pow": math.pow, **consts}
    exec(f"def _f(x):\n    {body}\n", namespace)
    return namespace["_f"]


def scalar_function(e: Expr | str):
    """Compile ``e`` to ``float -> float``; raises :class:`DomainFault` on faults."""
    e = as_expr(e)
    fast = _codegen(e)
    slow = None

    def fn(x: float) -> float:
        nonlocal slow
        x = float(x)
        try:
            if x - x:
                raise OverflowError
            return fast(x)
        except (ArithmeticError, ValueError):
            pass
        # rerun on the checked path for a precise fault description
        if slow is None:
            slow = _compile(e)
        slow(_finite(x))
        raise DomainFault("non-finite result")

    return fn


def evaluate(e: Expr | str, x: float) -> EvalOutcome:
    """Evaluate at a single point; domain faults come back as values."""
    try:
        return EvalOutcome(value=scalar_function(e)(x))
    except DomainFault as fault:
        return EvalOutcome(fault=str(fault))


# -- vectorized evaluation ---------------------------------------------------


def _veval(e: Expr, x: np.ndarray, bad: np.ndarray):
    # Non-finite intermediates can only become finite again through exp,
    # division or pow, so finiteness is checked at those inputs and at the end.
    if isinstance(e, Number):
        return e.value
    if isinstance(e, Variable):
        return x
    if isinstance(e, Constant):
        return CONSTANTS[e.name]
    if isinstance(e, Unary):
        return -_veval(e.operand, x, bad)
    if isinstance(e, Call):
        v = _veval(e.arg, x, bad)
        if e.name == "exp":
            bad |= ~np.isfinite(v)
            return np.exp(v)
        if e.name == "log":
            bad |= v <= 0
            return np.log(np.where(v > 0, v, 1.0))
        if e.name == "sqrt":
            bad |= v < 0
            return np.sqrt(np.where(v >= 0, v, 0.0))
        return np.abs(v)
    a = _veval(e.left, x, bad)
    b = _veval(e.right, x, bad)
    if e.op == "add":
        return a + b
    if e.op == "sub":
        return a - b
    if e.op == "mul":
        return a * b
    if e.op == "div":
        bad |= (b == 0) | ~np.isfinite(b)
        return a / np.where(b == 0, 1.0, b)
    bad |= ~(np.isfinite(a) & np.isfinite(b))
    bad |= (a == 0) & (b < 0)
    bad |= (a < 0) & (b != np.floor(b))
    return np.power(a, b)


def evaluate_array(e: Expr | str, x) -> np.ndarray:
    """Evaluate on an array of abscissae.

    Faulting entries are returned as NaN; a fault anywhere in the tree marks
    the entry even when later operations would produce a finite number.
    """
    e = as_expr(e)
    x = np.asarray(x, dtype=np.float64)
    bad = ~np.isfinite(x)
    with np.errstate(all="ignore"):
        r = np.array(np.broadcast_to(_veval(e, x, bad), x.shape), dtype=np.float64)
        bad |= ~np.isfinite(r)
    r[bad] = np.nan
    return r


def compile_expr(e: Expr | str):
    """Return a vectorized callable for ``e`` (NaN marks domain faults)."""
    e = as_expr(e)

    def fn(x):
        return evaluate_array(e, x)

    fn.expr = e
    return fn


def depends_on_x(e: Expr) -> bool:
    if isinstance(e, Variable):
        return True
    if isinstance(e, Unary):
        return depends_on_x(e.operand)
    if isinstance(e, Binary):
        return depends_on_x(e.left) or depends_on_x(e.right)
    if isinstance(e, Call):
        return depends_on_x(e.arg)
    return False


def product(fs) -> Expr:
    """Left-nested product expression of one or more factors."""
    fs = [as_expr(f) for f in fs]
    if not fs:
        raise ValueError("product needs at least one factor")
    out = fs[0]
    for f in fs[1:]:
        out = Binary("mul", out, f)
    return out
