"""Tiny expression language for nonlinearities f(u).

Grammar (one variable ``u``, two functions)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | atom ('^' factor)?
    atom   := number | 'u' | func '(' expr ')' | '(' expr ')'
    func   := 'exp' | 'log'

``^`` binds tightest and is right-associative. Trees are immutable dataclasses,
so structural equality is ``==`` and trees are hashable (compiled evaluators are
cached per tree).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

__all__ = [
    "Expr", "Const", "Var", "Add", "Sub", "Mul", "Div", "Pow", "Neg", "Exp", "Log",
    "ExprError", "ExprSyntaxError", "ExprDomainError", "NotLogRepresentable",
    "parse", "to_string", "simplify", "differentiate", "evaluate", "eval_log",
    "compile_expr", "compile_log", "log_expr", "U",
]


class ExprError(Exception):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class ExprDomainError(ExprError, ValueError):
    pass


class NotLogRepresentable(ExprError):
    """The log of the node cannot be formed without the (overflowing) value."""


class Expr:
    __slots__ = ()

    def __str__(self) -> str:
        return to_string(self)


@dataclass(frozen=True, slots=True)
class Const(Expr):
    value: float


@dataclass(frozen=True, slots=True)
class Var(Expr):
    pass


@dataclass(frozen=True, slots=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Pow(Expr):
    base: Expr
    exponent: Expr


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, slots=True)
class Exp(Expr):
    arg: Expr


@dataclass(frozen=True, slots=True)
class Log(Expr):
    arg: Expr


U = Var()
_ZERO = Const(0.0)
_ONE = Const(1.0)


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)
_FUNCS = {"exp": Exp, "log": Log}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            while text[pos].isspace():
                pos += 1
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), _byte_offset(text, start)))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(text, n)))
    return tokens


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, val, off = self.take()
        if val != value or kind != "op":
            found = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", off)

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.factor()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def factor(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.factor())
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            return Pow(base, self.factor())
        return base

    def atom(self) -> Expr:
        kind, val, off = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "ident":
            if val == "u":
                return U
            if val in _FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return _FUNCS[val](arg)
            raise ExprSyntaxError(f"unknown identifier {val!r}", off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {found}", off)


def parse(text: str) -> Expr:
    """Parse ``text`` and return the simplified tree."""
    if not text.strip():
        raise ExprSyntaxError("empty input", 0)
    p = _Parser(text)
    tree = p.expr()
    kind, val, off = p.peek()
    if kind != "end":
        raise ExprSyntaxError(f"unexpected trailing {val!r}", off)
    return simplify(tree)


# ---------------------------------------------------------------------------
# printing

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}
_SYMBOL = {Add: "+", Sub: "-", Mul: "*", Div: "/"}


def _prec(e: Expr) -> int:
    if isinstance(e, Const) and (e.value < 0 or math.copysign(1.0, e.value) < 0):
        return 3
    return _PREC.get(type(e), 5)


def _fmt_number(x: float) -> str:
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x)) if x != 0 or math.copysign(1.0, x) > 0 else "-0"
    return repr(x)


def to_string(e: Expr) -> str:
    """Print with minimal parentheses; ``parse(to_string(e)) == simplify(e)``."""
    if isinstance(e, Const):
        return _fmt_number(e.value)
    if isinstance(e, Var):
        return "u"
    if isinstance(e, (Exp, Log)):
        name = "exp" if isinstance(e, Exp) else "log"
        return f"{name}({to_string(e.arg)})"
    if isinstance(e, Neg):
        inner = to_string(e.arg)
        return f"-({inner})" if _prec(e.arg) < 3 else f"-{inner}"
    if isinstance(e, Pow):
        b = to_string(e.base)
        x = to_string(e.exponent)
        if _prec(e.base) <= 4:
            b = f"({b})"
        if _prec(e.exponent) < 4:
            x = f"({x})"
        return f"{b}^{x}"
    p = _PREC[type(e)]
    left = to_string(e.left)
    right = to_string(e.right)
    if _prec(e.left) < p:
        left = f"({left})"
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {_SYMBOL[type(e)]} {right}"


# ---------------------------------------------------------------------------
# simplification (smart constructors)

def _is_const(e: Expr, value: float | None = None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


def _fold(fn: Callable[..., float], *args: float) -> Const | None:
    try:
        out = fn(*args)
    except (ArithmeticError, ValueError):
        return None
    if isinstance(out, complex) or not math.isfinite(out):
        return None
    return Const(float(out))


def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        c = _fold(lambda x, y: x + y, a.value, b.value)
        if c is not None:
            return c
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if isinstance(b, Neg):
        return sub(a, b.arg)
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        c = _fold(lambda x, y: x - y, a.value, b.value)
        if c is not None:
            return c
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    if isinstance(b, Neg):
        return add(a, b.arg)
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        c = _fold(lambda x, y: x * y, a.value, b.value)
        if c is not None:
            return c
    if _is_const(b) and not _is_const(a):
        a, b = b, a
    if _is_const(a, 0.0):
        return _ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(a, -1.0):
        return neg(b)
    if _is_const(a) and isinstance(b, Mul) and _is_const(b.left):
        c = _fold(lambda x, y: x * y, a.value, b.left.value)
        if c is not None:
            return mul(c, b.right)
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0.0):
        raise ExprDomainError("division by a statically zero denominator")
    if _is_const(a) and _is_const(b):
        c = _fold(lambda x, y: x / y, a.value, b.value)
        if c is not None:
            return c
    if _is_const(b, 1.0):
        return a
    if _is_const(a, 0.0):
        return _ZERO
    return Div(a, b)


def power(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0.0):
        return _ONE
    if _is_const(b, 1.0):
        return a
    if _is_const(a, 1.0):
        return _ONE
    if _is_const(a) and _is_const(b):
        c = _fold(math.pow, a.value, b.value)
        if c is not None:
            return c
    return Pow(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def exp_(a: Expr) -> Expr:
    if isinstance(a, Const):
        c = _fold(math.exp, a.value)
        if c is not None:
            return c
    if isinstance(a, Log):
        # exp(log g) = g only where g > 0; keep the node
        return Exp(a)
    return Exp(a)


def log_(a: Expr) -> Expr:
    if isinstance(a, Const):
        if a.value <= 0:
            raise ExprDomainError(f"log of statically non-positive constant {a.value}")
        c = _fold(math.log, a.value)
        if c is not None:
            return c
    if isinstance(a, Exp):
        return a.arg
    return Log(a)


def simplify(e: Expr) -> Expr:
    """Bottom-up constant folding and identity removal (idempotent)."""
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Add):
        return add(simplify(e.left), simplify(e.right))
    if isinstance(e, Sub):
        return sub(simplify(e.left), simplify(e.right))
    if isinstance(e, Mul):
        return mul(simplify(e.left), simplify(e.right))
    if isinstance(e, Div):
        return div(simplify(e.left), simplify(e.right))
    if isinstance(e, Pow):
        return power(simplify(e.base), simplify(e.exponent))
    if isinstance(e, Neg):
        return neg(simplify(e.arg))
    if isinstance(e, Exp):
        return exp_(simplify(e.arg))
    if isinstance(e, Log):
        return log_(simplify(e.arg))
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# differentiation

def _depends_on_u(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, Const):
        return False
    if isinstance(e, (Neg, Exp, Log)):
        return _depends_on_u(e.arg)
    if isinstance(e, Pow):
        return _depends_on_u(e.base) or _depends_on_u(e.exponent)
    return _depends_on_u(e.left) or _depends_on_u(e.right)


def differentiate(e: Expr) -> Expr:
    """Exact d/du of ``e``, simplified."""
    if isinstance(e, Const):
        return _ZERO
    if isinstance(e, Var):
        return _ONE
    if isinstance(e, Add):
        return add(differentiate(e.left), differentiate(e.right))
    if isinstance(e, Sub):
        return sub(differentiate(e.left), differentiate(e.right))
    if isinstance(e, Mul):
        a, b = e.left, e.right
        return add(mul(differentiate(a), b), mul(a, differentiate(b)))
    if isinstance(e, Div):
        a, b = e.left, e.right
        if not _depends_on_u(b):
            return div(differentiate(a), b)
        return div(sub(mul(differentiate(a), b), mul(a, differentiate(b))), power(b, Const(2.0)))
    if isinstance(e, Neg):
        return neg(differentiate(e.arg))
    if isinstance(e, Exp):
        return mul(differentiate(e.arg), e)
    if isinstance(e, Log):
        return div(differentiate(e.arg), e.arg)
    if isinstance(e, Pow):
        b, x = e.base, e.exponent
        if not _depends_on_u(x):
            # c * b^(c-1) * b'
            return mul(mul(x, power(b, sub(x, _ONE))), differentiate(b))
        # b^x * (x' log b + x b'/b)
        return mul(e, add(mul(differentiate(x), log_(b)), div(mul(x, differentiate(b)), b)))
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# evaluation

def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _safe_pow(b: float, x: float) -> float:
    try:
        return math.pow(b, x)
    except OverflowError:
        if b < 0 and x.is_integer() and int(x) % 2 == 1:
            return -math.inf
        return math.inf
    except ValueError:
        raise ExprDomainError(f"power {b}^{x} is not real") from None


def _safe_log(x: float) -> float:
    if x <= 0 or math.isnan(x):
        raise ExprDomainError(f"log of non-positive value {x}")
    return math.log(x)


def _safe_div(a: float, b: float) -> float:
    if b == 0:
        raise ExprDomainError("division by zero")
    return a / b


def _build(e: Expr) -> Callable[[float], float]:
    if isinstance(e, Const):
        c = e.value
        return lambda u: c
    if isinstance(e, Var):
        return lambda u: u
    if isinstance(e, Neg):
        g = _build(e.arg)
        return lambda u: -g(u)
    if isinstance(e, Exp):
        g = _build(e.arg)
        return lambda u: _safe_exp(g(u))
    if isinstance(e, Log):
        g = _build(e.arg)
        return lambda u: _safe_log(g(u))
    if isinstance(e, Pow):
        b = _build(e.base)
        if isinstance(e.exponent, Const):
            c = e.exponent.value
            if c == 2.0:
                def square(u: float) -> float:
                    x = b(u)
                    return x * x
                return square
            return lambda u: _safe_pow(b(u), c)
        x = _build(e.exponent)
        return lambda u: _safe_pow(b(u), x(u))
    lf, rf = _build(e.left), _build(e.right)
    if isinstance(e, Add):
        return lambda u: lf(u) + rf(u)
    if isinstance(e, Sub):
        return lambda u: lf(u) - rf(u)
    if isinstance(e, Mul):
        return lambda u: lf(u) * rf(u)
    if isinstance(e, Div):
        return lambda u: _safe_div(lf(u), rf(u))
    raise TypeError(f"not an expression node: {e!r}")


@lru_cache(maxsize=512)
def compile_expr(e: Expr) -> Callable[[float], float]:
    """Return a fast scalar evaluator; overflow gives +/-inf, domain errors raise."""
    g = _build(e)

    def f(u: float) -> float:
        val = g(u)
        if val != val:
            raise ExprDomainError(f"expression {to_string(e)} is undefined (NaN) at u={u}")
        return val

    return f


def evaluate(e: Expr, u: float) -> float:
    return compile_expr(e)(float(u))


def _build_log(e: Expr) -> Callable[[float], float]:
    if isinstance(e, Const):
        if e.value > 0:
            lc = math.log(e.value)
            return lambda u: lc
        if e.value == 0:
            return lambda u: -math.inf
        return _not_rep(e)
    if isinstance(e, Var):
        def lvar(u: float) -> float:
            if u > 0:
                return math.log(u)
            if u == 0:
                return -math.inf
            raise NotLogRepresentable(f"log of negative u={u}")
        return lvar
    if isinstance(e, Exp):
        g = _build(e.arg)
        return g
    if isinstance(e, Mul):
        la, lb = _build_log(e.left), _build_log(e.right)
        return lambda u: la(u) + lb(u)
    if isinstance(e, Div):
        la, lb = _build_log(e.left), _build_log(e.right)
        return lambda u: la(u) - lb(u)
    if isinstance(e, Pow):
        lb = _build_log(e.base)
        x = _build(e.exponent)

        def lpow(u: float) -> float:
            xv = x(u)
            lv = lb(u)
            if lv == -math.inf:
                if xv > 0:
                    return -math.inf
                raise NotLogRepresentable("0 raised to a non-positive power")
            return xv * lv
        return lpow
    if isinstance(e, Log):
        lg = _build_log(e.arg)

        def llog(u: float) -> float:
            inner = lg(u)  # = log(g(u))
            if inner > 0:
                return math.log(inner)
            if inner == 0:
                return -math.inf
            raise NotLogRepresentable("log of a value below 1 is negative")
        return llog
    # additive nodes and negation: direct value when representable, else log-sum-exp
    direct = _build(e)
    if isinstance(e, Add):
        la, lb = _build_log(e.left), _build_log(e.right)

        def ladd(u: float) -> float:
            val = direct(u)
            if 0 < val < math.inf:
                return math.log(val)
            x, y = la(u), lb(u)
            hi, lo = max(x, y), min(x, y)
            if hi == -math.inf:
                return -math.inf
            return hi + math.log1p(math.exp(lo - hi))
        return ladd
    if isinstance(e, Sub):
        la, lb = _build_log(e.left), _build_log(e.right)

        def lsub(u: float) -> float:
            val = direct(u)
            if 0 < val < math.inf:
                return math.log(val)
            if val == 0:
                return -math.inf
            x, y = la(u), lb(u)
            if x <= y:
                raise NotLogRepresentable("difference is not positive")
            return x + math.log1p(-math.exp(y - x))
        return lsub

    def lother(u: float) -> float:
        val = direct(u)
        if 0 < val < math.inf:
            return math.log(val)
        if val == 0:
            return -math.inf
        raise NotLogRepresentable(f"cannot take log of {to_string(e)} at u={u}")
    return lother


def _not_rep(e: Expr) -> Callable[[float], float]:
    def f(u: float) -> float:
        raise NotLogRepresentable(f"{to_string(e)} is not positive")
    return f


@lru_cache(maxsize=512)
def compile_log(e: Expr) -> Callable[[float], float]:
    """Overflow-safe evaluator of ``log(e(u))`` built from structural rules."""
    g = _build_log(e)

    def f(u: float) -> float:
        try:
            val = g(u)
        except ExprDomainError as exc:
            raise NotLogRepresentable(str(exc)) from None
        if val != val:
            raise NotLogRepresentable(f"log of {to_string(e)} undefined at u={u}")
        return val

    return f


def eval_log(e: Expr, u: float) -> float:
    """log(e(u)) without forming e(u); raises NotLogRepresentable when impossible."""
    return compile_log(e)(float(u))


def log_expr(e: Expr) -> Expr:
    """Symbolic log(e) by the same structural rules as ``eval_log``.

    Differentiating the result gives e'/e without forming e, which removes the
    cancellation in f''/f - (f'/f)^2 for exponential-type f.
    """
    if isinstance(e, Const):
        if e.value <= 0:
            raise NotLogRepresentable(f"log of non-positive constant {e.value}")
        return Const(math.log(e.value))
    if isinstance(e, Exp):
        return e.arg
    if isinstance(e, Mul):
        return add(log_expr(e.left), log_expr(e.right))
    if isinstance(e, Div):
        return sub(log_expr(e.left), log_expr(e.right))
    if isinstance(e, Pow) and not _depends_on_u(e.exponent):
        return mul(e.exponent, log_expr(e.base))
    if isinstance(e, Neg):
        raise NotLogRepresentable("log of a negated expression")
    return log_(e)
