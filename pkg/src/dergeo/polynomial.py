"""Multivariate polynomials with exact rational coefficients.

Coefficients live in a dict keyed by exponent tuples of fixed arity;
zero coefficients are never stored.  Includes evaluation, partial
derivatives, composition with optional degree truncation, and a parser
for the ASCII grammar used in cospan files (rational coefficients,
``^`` powers, implicit multiplication, variables x0, x1, ...).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .errors import InvariantViolation


class Polynomial:
    """A polynomial in a fixed number of variables over the rationals."""

    __slots__ = ("nvars", "coeffs")

    def __init__(self, nvars: int, coeffs: Mapping | None = None):
        self.nvars = nvars
        cleaned = {}
        if coeffs:
            for mono, c in coeffs.items():
                c = Fraction(c)
                if not c:
                    continue
                mono = tuple(int(e) for e in mono)
                if len(mono) != nvars or any(e < 0 for e in mono):
                    raise InvariantViolation("polynomial-bad-exponent", repr(mono))
                cleaned[mono] = cleaned.get(mono, Fraction(0)) + c
                if not cleaned[mono]:
                    del cleaned[mono]
        self.coeffs = cleaned

    @classmethod
    def constant(cls, nvars: int, value) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: Fraction(value)})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Polynomial":
        if not 0 <= i < nvars:
            raise InvariantViolation("polynomial-variable-index", f"x{i} with {nvars} vars")
        mono = tuple(1 if k == i else 0 for k in range(nvars))
        return cls(nvars, {mono: Fraction(1)})

    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        return max((sum(m) for m in self.coeffs), default=0)

    def constant_term(self) -> Fraction:
        return self.coeffs.get((0,) * self.nvars, Fraction(0))

    def _check(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise InvariantViolation("polynomial-arity-mismatch")
            return other
        return Polynomial.constant(self.nvars, other)

    def __add__(self, other):
        other = self._check(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, Fraction(0)) + c
        return Polynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        out = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise InvariantViolation("polynomial-negative-power")
        result = Polynomial.constant(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self.coeffs == other.coeffs
        return self.coeffs == self._check(other).coeffs

    def evaluate(self, point: Sequence) -> Fraction:
        if len(point) != self.nvars:
            raise InvariantViolation("polynomial-point-arity")
        point = [Fraction(x) for x in point]
        total = Fraction(0)
        for m, c in self.coeffs.items():
            term = c
            for x, e in zip(point, m):
                if e:
                    term *= x ** e
            total += term
        return total

    def partial(self, i: int) -> "Polynomial":
        out = {}
        for m, c in self.coeffs.items():
            if m[i]:
                dm = tuple(e - 1 if k == i else e for k, e in enumerate(m))
                out[dm] = out.get(dm, Fraction(0)) + c * m[i]
        return Polynomial(self.nvars, out)

    def truncate(self, max_degree: int) -> "Polynomial":
        return Polynomial(
            self.nvars, {m: c for m, c in self.coeffs.items() if sum(m) <= max_degree}
        )

    def compose(self, subs: Sequence["Polynomial"], max_degree: int | None = None, arity: int | None = None) -> "Polynomial":
        """Substitute a polynomial for each variable.

        With max_degree set, intermediate products are truncated, which
        is sound for reading off jets when every substituted polynomial
        has zero constant term or the target degree is final anyway.
        The arity parameter pins the target variable count when the
        substitution list is empty (zero-variable source).
        """
        if len(subs) != self.nvars:
            raise InvariantViolation("polynomial-substitution-arity")
        if arity is None:
            arity = subs[0].nvars if subs else 0
        for s in subs:
            if s.nvars != arity:
                raise InvariantViolation("polynomial-substitution-arity")
        result = Polynomial(arity)
        # cache powers of each substituted polynomial
        pow_cache: dict = {}

        def power_of(i, e):
            if (i, e) not in pow_cache:
                if e == 0:
                    pow_cache[(i, e)] = Polynomial.constant(arity, 1)
                else:
                    p = power_of(i, e - 1) * subs[i]
                    if max_degree is not None:
                        p = p.truncate(max_degree)
                    pow_cache[(i, e)] = p
            return pow_cache[(i, e)]

        for m, c in self.coeffs.items():
            term = Polynomial.constant(arity, c)
            for i, e in enumerate(m):
                if e:
                    term = term * power_of(i, e)
                    if max_degree is not None:
                        term = term.truncate(max_degree)
            result = result + term
        if max_degree is not None:
            result = result.truncate(max_degree)
        return result

    def shift(self, point: Sequence) -> "Polynomial":
        """Recentre at a point: returns q with q(u) = p(point + u)."""
        subs = [
            Polynomial.constant(self.nvars, Fraction(point[i]))
            + Polynomial.variable(self.nvars, i)
            for i in range(self.nvars)
        ]
        return self.compose(subs)

    def __repr__(self):
        return f"Polynomial({self.nvars}, {poly_to_string(self)!r})"


def monomials_up_to(nvars: int, max_degree: int) -> list:
    """All exponent tuples of total degree <= max_degree, ordered by
    (degree, lexicographic)."""
    out = [()]
    for _ in range(nvars):
        out = [m + (e,) for m in out for e in range(max_degree + 1 - sum(m))]
    return sorted(out, key=lambda m: (sum(m), m))


def poly_to_string(p: Polynomial) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for m, c in sorted(p.coeffs.items(), key=lambda kv: (sum(kv[0]), kv[0])):
        factors = [f"x{i}^{e}" if e > 1 else f"x{i}" for i, e in enumerate(m) if e]
        if not factors:
            parts.append(str(c))
        elif c == 1:
            parts.append("*".join(factors))
        elif c == -1:
            parts.append("-" + "*".join(factors))
        else:
            parts.append(str(c) + "*" + "*".join(factors))
    out = parts[0]
    for term in parts[1:]:
        out += ("" if term.startswith("-") else "+") + term
    return out


class _Parser:
    def __init__(self, text: str, nvars: int):
        self.text = text
        self.pos = 0
        self.nvars = nvars

    def error(self, msg):
        raise InvariantViolation("polynomial-parse", f"{msg} at position {self.pos} in {self.text!r}")

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expr(self) -> Polynomial:
        sign = 1
        ch = self.peek()
        if ch in "+-":
            self.pos += 1
            sign = -1 if ch == "-" else 1
        result = self.term() * sign
        while True:
            ch = self.peek()
            if ch == "+":
                self.pos += 1
                result = result + self.term()
            elif ch == "-":
                self.pos += 1
                result = result - self.term()
            else:
                return result

    def term(self) -> Polynomial:
        result = self.factor()
        while True:
            ch = self.peek()
            if ch == "*":
                self.pos += 1
                result = result * self.factor()
            elif ch.isalnum() or ch == "(":
                result = result * self.factor()
            else:
                return result

    def factor(self) -> Polynomial:
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            e = self.integer()
            return base ** e
        return base

    def integer(self) -> int:
        ch = self.peek()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            self.error("expected integer")
        return int(self.text[start : self.pos])

    def atom(self) -> Polynomial:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            inner = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return inner
        if ch.isdigit():
            num = self.integer()
            if self.peek() == "/":
                self.pos += 1
                den = self.integer()
                return Polynomial.constant(self.nvars, Fraction(num, den))
            return Polynomial.constant(self.nvars, num)
        if ch == "x":
            self.pos += 1
            i = self.integer()
            if i >= self.nvars:
                self.error(f"variable x{i} out of range for {self.nvars} variables")
            return Polynomial.variable(self.nvars, i)
        self.error(f"unexpected character {ch!r}")


def parse_polynomial(text: str, nvars: int) -> Polynomial:
    """Parse the ASCII grammar: rational coefficients, ``^`` powers,
    implicit or explicit ``*``, variables named x0..x{n-1}."""
    parser = _Parser(text, nvars)
    result = parser.expr()
    if parser.peek():
        parser.error("trailing input")
    return result


def parse_rational(text) -> Fraction:
    """Exact rational from "p/q" strings or plain integers."""
    if isinstance(text, str):
        return Fraction(text)
    if isinstance(text, int):
        return Fraction(text)
    raise InvariantViolation("rational-parse", repr(text))
