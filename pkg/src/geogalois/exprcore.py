"""Symbolic expressions in x, y, z: parsing, canonical form, derivatives.

Grammar (whitespace insignificant, no implicit multiplication)::

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' unary | factor
    factor := base ('^' integer)?
    base   := number | ident | '(' expr ')' | func '(' expr ')'
    func   := 'sin' | 'cos' | 'exp'
    ident  := 'x' | 'y' | 'z'

Exponents are integers, optionally negative (``x^-2`` or ``x^(-2)``), with
magnitude at most 2**16.

Every constructor below returns canonical form: flattened sums and
products, folded constants, collected powers and like terms, operands in
a fixed order.  Nothing is expanded except a rational coefficient times a
single sum.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

import mpmath
from mpmath import iv

from .exactalg import Poly, RatFun

VARIABLES = ("x", "y", "z")
FUNCTIONS = ("sin", "cos", "exp")
MAX_EXPONENT = 2**16


class ExprError(Exception):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.reason = message


class UnknownIdentifier(ParseError):
    pass


class NonIntegerExponent(ParseError):
    pass


class NotRational(ExprError):
    """An elementary-function node survived where a rational function is needed."""


class WrongVariable(ExprError):
    pass


class DivisionByZeroPossible(ExprError, ZeroDivisionError):
    pass


# ---------------------------------------------------------------------------
# node types


class Expr:
    __slots__ = ()

    def __str__(self) -> str:
        return to_string(self)

    # arithmetic sugar so tests and callers can build trees directly
    def __add__(self, o):
        return add(self, _lift(o))

    def __radd__(self, o):
        return add(_lift(o), self)

    def __sub__(self, o):
        return add(self, mul(Num(-1), _lift(o)))

    def __rsub__(self, o):
        return add(_lift(o), mul(Num(-1), self))

    def __mul__(self, o):
        return mul(self, _lift(o))

    def __rmul__(self, o):
        return mul(_lift(o), self)

    def __truediv__(self, o):
        return mul(self, power(_lift(o), -1))

    def __rtruediv__(self, o):
        return mul(_lift(o), power(self, -1))

    def __neg__(self):
        return mul(Num(-1), self)

    def __pow__(self, k: int):
        return power(self, k)


@dataclass(frozen=True, slots=True, repr=False)
class Num(Expr):
    value: Fraction

    def __init__(self, value):
        object.__setattr__(self, "value", Fraction(value))

    def __repr__(self):
        return f"Num({self.value})"


@dataclass(frozen=True, slots=True, repr=False)
class Var(Expr):
    name: str

    def __repr__(self):
        return f"Var({self.name})"


@dataclass(frozen=True, slots=True, repr=False)
class Add(Expr):
    args: tuple

    def __repr__(self):
        return f"Add{self.args!r}"


@dataclass(frozen=True, slots=True, repr=False)
class Mul(Expr):
    args: tuple

    def __repr__(self):
        return f"Mul{self.args!r}"


@dataclass(frozen=True, slots=True, repr=False)
class Pow(Expr):
    base: Expr
    exp: int

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exp})"


@dataclass(frozen=True, slots=True, repr=False)
class Func(Expr):
    name: str
    arg: Expr

    def __repr__(self):
        return f"Func({self.name}, {self.arg!r})"


ZERO = Num(0)
ONE = Num(1)
X, Y, Z = Var("x"), Var("y"), Var("z")


def _lift(o) -> Expr:
    if isinstance(o, Expr):
        return o
    if isinstance(o, (int, Fraction)):
        return Num(o)
    raise TypeError(f"cannot use {type(o).__name__} in an expression")


# ---------------------------------------------------------------------------
# canonical constructors



def sort_key(e: Expr) -> tuple:
    if isinstance(e, Num):
        return (0, e.value)
    if isinstance(e, Var):
        return (1, e.name)
    if isinstance(e, Pow):
        # keep a power next to its base
        return sort_key(e.base)[:2] + (e.exp,)
    if isinstance(e, Func):
        return (2, e.name, sort_key(e.arg))
    if isinstance(e, Mul):
        return (4, tuple(sort_key(a) for a in e.args))
    return (5, tuple(sort_key(a) for a in e.args))


def _key_str(e: Expr) -> str:
    return repr(sort_key(e))


def _split_coeff(e: Expr) -> tuple[Fraction, Expr | None]:
    if isinstance(e, Num):
        return e.value, None
    if isinstance(e, Mul) and isinstance(e.args[0], Num):
        rest = e.args[1:]
        return e.args[0].value, rest[0] if len(rest) == 1 else Mul(rest)
    return Fraction(1), e


def _split_power(e: Expr) -> tuple[Expr, int]:
    if isinstance(e, Pow):
        return e.base, e.exp
    return e, 1


def add(*terms: Expr) -> Expr:
    flat: list[Expr] = []
    for t in terms:
        if isinstance(t, Add):
            flat.extend(t.args)
        else:
            flat.append(t)
    const = Fraction(0)
    coeffs: dict[Expr, Fraction] = {}
    order: list[Expr] = []
    for t in flat:
        c, rest = _split_coeff(t)
        if rest is None:
            const += c
            continue
        if rest not in coeffs:
            coeffs[rest] = Fraction(0)
            order.append(rest)
        coeffs[rest] += c
    out = []
    for rest in sorted(order, key=_key_str):
        c = coeffs[rest]
        if c:
            out.append(rest if c == 1 else _scaled(c, rest))
    if const:
        out.append(Num(const))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Add(tuple(out))


def _scaled(c: Fraction, rest: Expr) -> Expr:
    if isinstance(rest, Mul):
        return Mul((Num(c),) + rest.args)
    return Mul((Num(c), rest))


def mul(*factors: Expr) -> Expr:
    flat: list[Expr] = []
    for f in factors:
        if isinstance(f, Mul):
            flat.extend(f.args)
        else:
            flat.append(f)
    coeff = Fraction(1)
    exps: dict[Expr, int] = {}
    order: list[Expr] = []
    for f in flat:
        if isinstance(f, Num):
            coeff *= f.value
            continue
        b, k = _split_power(f)
        if b not in exps:
            exps[b] = 0
            order.append(b)
        exps[b] += k
    if coeff == 0:
        return ZERO
    rest = []
    for b in sorted(order, key=_key_str):
        k = exps[b]
        if k == 0:
            continue
        rest.append(b if k == 1 else Pow(b, k))
    if not rest:
        return Num(coeff)
    if len(rest) == 1:
        single = rest[0]
        if coeff == 1:
            return single
        if isinstance(single, Add):
            return add(*(mul(Num(coeff), t) for t in single.args))
        return Mul((Num(coeff), single))
    if coeff != 1:
        rest.insert(0, Num(coeff))
    return Mul(tuple(rest))


def power(base: Expr, k: int) -> Expr:
    if not isinstance(k, int):
        raise TypeError("exponents must be integers")
    if k == 0:
        return ONE
    if k == 1:
        return base
    if isinstance(base, Num):
        if base.value == 0 and k < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return Num(base.value**k)
    if isinstance(base, Pow):
        return power(base.base, base.exp * k)
    if isinstance(base, Mul):
        return mul(*(power(f, k) for f in base.args))
    return Pow(base, k)


def func(name: str, arg: Expr) -> Expr:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name}")
    if isinstance(arg, Num) and arg.value == 0:
        return ONE if name in ("cos", "exp") else ZERO
    return Func(name, arg)


def canonicalize(e: Expr) -> Expr:
    """Rebuild ``e`` through the canonical constructors (idempotent)."""
    if isinstance(e, (Num, Var)):
        return e
    if isinstance(e, Add):
        return add(*(canonicalize(a) for a in e.args))
    if isinstance(e, Mul):
        return mul(*(canonicalize(a) for a in e.args))
    if isinstance(e, Pow):
        return power(canonicalize(e.base), e.exp)
    if isinstance(e, Func):
        return func(e.name, canonicalize(e.arg))
    raise TypeError(e)


# ---------------------------------------------------------------------------
# parsing


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str, cls=ParseError, at: int | None = None):
        raise cls(msg, self.pos if at is None else at)

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str) -> None:
        if not self.take(ch):
            got = self.peek()
            self.error(f"expected {ch!r}, found {got!r}" if got else f"expected {ch!r}, found end of input")

    def integer(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected an integer")
        return int(self.text[start : self.pos])

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            if self.take("+"):
                e = add(e, self.term())
            elif self.take("-"):
                e = add(e, mul(Num(-1), self.term()))
            else:
                return e

    def term(self) -> Expr:
        e = self.unary()
        while True:
            if self.take("*"):
                e = mul(e, self.unary())
            elif self.peek() == "/":
                at = self.pos
                self.pos += 1
                d = self.unary()
                if d == ZERO:
                    self.error("division by zero", at=at)
                e = mul(e, power(d, -1))
            else:
                return e

    def unary(self) -> Expr:
        if self.take("-"):
            return mul(Num(-1), self.unary())
        return self.factor()

    def factor(self) -> Expr:
        b = self.base()
        if self.take("^"):
            k = self.exponent()
            if b == ZERO and k < 0:
                self.error("division by zero")
            b = power(b, k)
        return b

    def exponent(self) -> int:
        self.skip()
        at = self.pos
        paren = self.take("(")
        neg = self.take("-")
        self.skip()
        if not (self.pos < len(self.text) and self.text[self.pos].isdigit()):
            self.error("exponent must be an integer", NonIntegerExponent, at=at)
        k = self.integer()
        if self.peek() in (".", "/") and (paren or self.peek() == "."):
            self.error("exponent must be an integer", NonIntegerExponent, at=at)
        if paren:
            self.expect(")")
        if k > MAX_EXPONENT:
            self.error(f"exponent exceeds {MAX_EXPONENT}", at=at)
        return -k if neg else k

    def base(self) -> Expr:
        ch = self.peek()
        if not ch:
            self.error("unexpected end of input")
        if ch.isdigit():
            return Num(self.integer())
        if ch == "(":
            self.pos += 1
            e = self.expr()
            self.expect(")")
            return e
        if ch.isalpha():
            start = self.pos
            while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
                self.pos += 1
            name = self.text[start : self.pos]
            if name in VARIABLES:
                return Var(name)
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return func(name, arg)
            self.error(f"unknown identifier {name!r}", UnknownIdentifier, at=start)
        self.error(f"unexpected {ch!r}")


def parse(text: str) -> Expr:
    """Parse ``text`` into canonical form.

    >>> str(parse("1/(x^2-y^2)"))
    '1/(x^2 - y^2)'
    """
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# printing


def _atom(e: Expr) -> str:
    s = to_string(e)
    if isinstance(e, (Var, Func)) or (isinstance(e, Num) and e.value.denominator == 1 and e.value >= 0):
        return s
    return f"({s})"


def _pow_str(b: Expr, k: int) -> str:
    return _atom(b) if k == 1 else f"{_atom(b)}^{k}"


def _mul_str(e: Mul) -> tuple[bool, str]:
    """Render a product; returns (negative, magnitude string)."""
    c, _ = _split_coeff(e)
    args = e.args[1:] if isinstance(e.args[0], Num) else e.args
    numer, denom = [], []
    for a in args:
        b, k = _split_power(a)
        (numer if k > 0 else denom).append((b, abs(k)))
    neg = c < 0
    c = abs(c)
    parts = []
    if c.numerator != 1 or not numer:
        parts.append(str(c.numerator))
    parts += [_pow_str(b, k) for b, k in numer]
    s = "*".join(parts)
    den = c.denominator
    dparts = ([str(den)] if den != 1 else []) + [_pow_str(b, k) for b, k in denom]
    if dparts:
        s += "/" + (dparts[0] if len(dparts) == 1 else "(" + "*".join(dparts) + ")")
    return neg, s


def _signed(e: Expr) -> tuple[bool, str]:
    if isinstance(e, Num):
        return e.value < 0, str(abs(e.value))
    if isinstance(e, Mul):
        return _mul_str(e)
    if isinstance(e, Pow) and e.exp < 0:
        return _mul_str(Mul((e,)))
    return False, to_string(e)


def to_string(e: Expr) -> str:
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({to_string(e.arg)})"
    if isinstance(e, Pow):
        if e.exp < 0:
            return _mul_str(Mul((e,)))[1]
        return _pow_str(e.base, e.exp)
    if isinstance(e, Mul):
        neg, s = _mul_str(e)
        return "-" + s if neg else s
    if isinstance(e, Add):
        out = ""
        for i, t in enumerate(e.args):
            neg, s = _signed(t)
            if i == 0:
                out = ("-" if neg else "") + s
            else:
                out += (" - " if neg else " + ") + s
        return out
    raise TypeError(e)


# ---------------------------------------------------------------------------
# calculus and substitution


def differentiate(e: Expr, v: str) -> Expr:
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == v else ZERO
    if isinstance(e, Add):
        return add(*(differentiate(a, v) for a in e.args))
    if isinstance(e, Mul):
        terms = []
        for i, f in enumerate(e.args):
            df = differentiate(f, v)
            if df != ZERO:
                terms.append(mul(*e.args[:i], df, *e.args[i + 1 :]))
        return add(*terms)
    if isinstance(e, Pow):
        db = differentiate(e.base, v)
        if db == ZERO:
            return ZERO
        return mul(Num(e.exp), power(e.base, e.exp - 1), db)
    if isinstance(e, Func):
        da = differentiate(e.arg, v)
        if da == ZERO:
            return ZERO
        if e.name == "sin":
            return mul(func("cos", e.arg), da)
        if e.name == "cos":
            return mul(Num(-1), func("sin", e.arg), da)
        return mul(e, da)
    raise TypeError(e)


def free_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Num):
        return set()
    if isinstance(e, (Add, Mul)):
        return set().union(*(free_vars(a) for a in e.args))
    if isinstance(e, Pow):
        return free_vars(e.base)
    return free_vars(e.arg)


def has_functions(e: Expr) -> bool:
    if isinstance(e, Func):
        return True
    if isinstance(e, (Add, Mul)):
        return any(has_functions(a) for a in e.args)
    if isinstance(e, Pow):
        return has_functions(e.base)
    return False


def substitute(e: Expr, bindings: Mapping[str, Expr]) -> Expr:
    """Replace variables; raises ZeroDivisionError if a pole is hit exactly."""
    if isinstance(e, Var):
        b = bindings.get(e.name)
        return e if b is None else _lift(b)
    if isinstance(e, Num):
        return e
    if isinstance(e, Add):
        return add(*(substitute(a, bindings) for a in e.args))
    if isinstance(e, Mul):
        return mul(*(substitute(a, bindings) for a in e.args))
    if isinstance(e, Pow):
        return power(substitute(e.base, bindings), e.exp)
    return func(e.name, substitute(e.arg, bindings))


def to_ratfun(e: Expr, v: str) -> RatFun:
    """Convert a function-free expression in the single variable ``v``."""
    if isinstance(e, Num):
        return RatFun(Poly([e.value], v))
    if isinstance(e, Var):
        if e.name != v:
            raise WrongVariable(f"variable {e.name} remains; expected only {v}")
        return RatFun.from_poly(Poly.gen(v))
    if isinstance(e, Func):
        raise NotRational(f"{e.name}(...) is not a rational function")
    if isinstance(e, Add):
        acc = RatFun(Poly([], v))
        for a in e.args:
            acc = acc + to_ratfun(a, v)
        return acc
    if isinstance(e, Mul):
        acc = RatFun(Poly([1], v))
        for a in e.args:
            acc = acc * to_ratfun(a, v)
        return acc
    if isinstance(e, Pow):
        b = to_ratfun(e.base, v)
        if b.is_zero() and e.exp < 0:
            raise ZeroDivisionError("pole of the expression")
        return b**e.exp
    raise TypeError(e)


def from_ratfun(r: RatFun) -> Expr:
    v = Var(r.var)

    def poly_expr(p: Poly) -> Expr:
        return add(*(mul(Num(c), power(v, k)) for k, c in enumerate(p.coeffs) if c))

    return mul(poly_expr(r.num), power(poly_expr(r.den), -1))


# ---------------------------------------------------------------------------
# numerics


@contextmanager
def ivprec(bits: int):
    """Temporarily set the precision of mpmath's interval context."""
    old = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = old


def rat_interval(q: Fraction | int):
    """Rigorous enclosure of a rational in the current ``iv`` precision."""
    q = Fraction(q)
    if q.denominator == 1:
        return iv.mpf(q.numerator)
    return iv.mpf(q.numerator) / q.denominator


def _contains_zero(z) -> bool:
    if isinstance(z, iv.mpc):
        return z.real.a <= 0 <= z.real.b and z.imag.a <= 0 <= z.imag.b
    return z.a <= 0 <= z.b


def _to_interval(val):
    if isinstance(val, (iv.mpc,)):
        return val
    if isinstance(val, (int, Fraction)):
        return iv.mpc(rat_interval(val), 0)
    if isinstance(val, complex):
        return iv.mpc(val.real, val.imag)
    if isinstance(val, tuple):
        return iv.mpc(*val)
    return iv.mpc(val, 0)


def eval_interval(e: Expr, bindings: Mapping[str, object], precision: int = 64):
    """Rigorous complex-interval enclosure of ``e`` at the given bit precision.

    Bindings may be rationals, ``iv.mpc`` values or ``(re, im)`` interval pairs.
    """
    with ivprec(precision):
        env = {k: _to_interval(v) for k, v in bindings.items()}
        return _ev(e, env)


def _ev(e: Expr, env):
    if isinstance(e, Num):
        return iv.mpc(rat_interval(e.value), 0)
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise ExprError(f"variable {e.name} is not bound") from None
    if isinstance(e, Add):
        acc = _ev(e.args[0], env)
        for a in e.args[1:]:
            acc = acc + _ev(a, env)
        return acc
    if isinstance(e, Mul):
        acc = _ev(e.args[0], env)
        for a in e.args[1:]:
            acc = acc * _ev(a, env)
        return acc
    if isinstance(e, Pow):
        b = _ev(e.base, env)
        if e.exp < 0:
            if _contains_zero(b):
                raise DivisionByZeroPossible(f"denominator {to_string(e.base)} may vanish")
            b = 1 / b
        k = abs(e.exp)
        acc = None
        while k:
            if k & 1:
                acc = b if acc is None else acc * b
            b = b * b
            k >>= 1
        return acc
    a = _ev(e.arg, env)
    return getattr(iv, e.name)(a)


def _py_source(e: Expr, num: Callable[[Fraction], str]) -> str:
    if isinstance(e, Num):
        return num(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Add):
        return "(" + " + ".join(_py_source(a, num) for a in e.args) + ")"
    if isinstance(e, Mul):
        return "(" + " * ".join(_py_source(a, num) for a in e.args) + ")"
    if isinstance(e, Pow):
        return f"({_py_source(e.base, num)} ** {e.exp})"
    return f"{e.name}({_py_source(e.arg, num)})"


def compile_expr(e: Expr, variables=VARIABLES, backend: str = "float") -> Callable:
    """Compile to a Python callable ``f(*variables)``.

    ``backend="float"`` uses :mod:`math`; ``backend="mp"`` uses :mod:`mpmath`
    at the caller's ``mp`` precision.
    """
    if backend == "float":
        ns = {"sin": math.sin, "cos": math.cos, "exp": math.exp}
        num = lambda q: repr(float(q)) if q.denominator != 1 else f"{q.numerator}.0"
    elif backend == "mp":
        ns = {"sin": mpmath.sin, "cos": mpmath.cos, "exp": mpmath.exp, "mpf": mpmath.mpf}
        num = lambda q: f"(mpf({q.numerator}) / {q.denominator})"
    else:
        raise ValueError(backend)
    src = f"lambda {', '.join(variables)}: {_py_source(e, num)}"
    return eval(src, ns)
