"""Exact multivariate polynomials with rational coefficients.

Polynomials are immutable values keyed by exponent vectors. Every identity
check in the symbolic layers compares against the literal zero polynomial, so
no floating point is ever involved here.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Iterable, Mapping, Union

Scalar = Union[int, Fraction]


class DimensionError(ValueError):
    """Operands live in incompatible spaces."""


class PolynomialSyntaxError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


class Polynomial:
    __slots__ = ("num_vars", "_terms", "_hash")

    def __init__(self, num_vars: int, terms: Mapping[tuple, Scalar] | None = None):
        if num_vars < 0:
            raise DimensionError("num_vars must be non-negative")
        self.num_vars = num_vars
        clean = {}
        if terms:
            for exps, c in terms.items():
                exps = tuple(int(e) for e in exps)
                if len(exps) != num_vars or any(e < 0 for e in exps):
                    raise DimensionError(f"bad exponent vector {exps} for {num_vars} variables")
                c = Fraction(c)
                if c:
                    clean[exps] = clean.get(exps, 0) + c
                    if not clean[exps]:
                        del clean[exps]
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, num_vars: int, terms: dict) -> "Polynomial":
        # trusted constructor: terms already canonical
        p = cls.__new__(cls)
        p.num_vars = num_vars
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def zero(cls, num_vars: int) -> "Polynomial":
        return cls._raw(num_vars, {})

    @classmethod
    def constant(cls, num_vars: int, c: Scalar) -> "Polynomial":
        c = Fraction(c)
        return cls._raw(num_vars, {(0,) * num_vars: c} if c else {})

    @classmethod
    def variable(cls, num_vars: int, i: int) -> "Polynomial":
        if not 0 <= i < num_vars:
            raise DimensionError(f"variable index {i} out of range for {num_vars} variables")
        exps = [0] * num_vars
        exps[i] = 1
        return cls._raw(num_vars, {tuple(exps): Fraction(1)})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and (0,) * self.num_vars in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.num_vars, Fraction(0))

    def total_degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def _check(self, other: "Polynomial") -> None:
        if self.num_vars != other.num_vars:
            raise DimensionError(f"num_vars mismatch: {self.num_vars} vs {other.num_vars}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(self.num_vars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Polynomial._raw(self.num_vars, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.num_vars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Polynomial.zero(self.num_vars)
            return Polynomial._raw(self.num_vars, {e: c * other for e, c in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial._raw(self.num_vars, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        out = Polynomial.constant(self.num_vars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self == Polynomial.constant(self.num_vars, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.num_vars == other.num_vars and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num_vars, frozenset(self._terms.items())))
        return self._hash

    def partial(self, i: int) -> "Polynomial":
        return poly_partial(self, i)

    def evaluate(self, point: Iterable[Scalar]) -> Fraction:
        point = [Fraction(x) for x in point]
        if len(point) != self.num_vars:
            raise DimensionError("point dimension does not match num_vars")
        total = Fraction(0)
        for exps, c in self._terms.items():
            term = c
            for x, e in zip(point, exps):
                if e:
                    term *= x**e
            total += term
        return total

    def __repr__(self) -> str:
        return f"Polynomial({self.num_vars}, {poly_format(self)!r})"

    def __str__(self) -> str:
        return poly_format(self)


def poly_arith(p: Polynomial, q: Polynomial, op: str) -> Polynomial:
    if p.num_vars != q.num_vars:
        raise DimensionError(f"num_vars mismatch: {p.num_vars} vs {q.num_vars}")
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise ValueError(f"unknown operation {op!r}")


def poly_partial(p: Polynomial, i: int) -> Polynomial:
    if not 0 <= i < p.num_vars:
        raise DimensionError(f"variable index {i} out of range for {p.num_vars} variables")
    out = {}
    for exps, c in p._terms.items():
        e = exps[i]
        if e:
            new = exps[:i] + (e - 1,) + exps[i + 1 :]
            out[new] = c * e
    return Polynomial._raw(p.num_vars, out)


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def poly_format(p: Polynomial) -> str:
    if p.is_zero():
        return "0"
    pieces = []
    for exps in sorted(p._terms, reverse=True):
        c = p._terms[exps]
        factors = []
        for i, e in enumerate(exps):
            if e == 1:
                factors.append(f"x{i}")
            elif e > 1:
                factors.append(f"x{i}^{e}")
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if not factors:
            body = _format_coeff(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = _format_coeff(mag) + "*" + "*".join(factors)
        pieces.append((sign, body))
    first_sign, first = pieces[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


class _Parser:
    def __init__(self, text: str, num_vars: int):
        self.text = text
        self.num_vars = num_vars
        self.pos = 0

    def error(self, message: str, pos: int | None = None):
        raise PolynomialSyntaxError(message, self.text, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def integer(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected integer")
        return int(self.text[start : self.pos])

    def factor(self) -> tuple:
        self.skip()
        if self.peek() != "x":
            self.error("expected variable 'x<index>'")
        start = self.pos
        self.pos += 1
        if self.pos >= len(self.text) or not self.text[self.pos].isdigit():
            self.error("expected variable index")
        idx = self.integer()
        if idx >= self.num_vars:
            self.error(f"variable x{idx} out of range for {self.num_vars} variables", start)
        power = 1
        if self.peek() == "^":
            self.pos += 1
            power = self.integer()
            if power < 1:
                self.error("exponent must be a positive integer")
        exps = [0] * self.num_vars
        exps[idx] = power
        return tuple(exps)

    def term(self) -> tuple:
        coeff = Fraction(1)
        exps = [0] * self.num_vars
        if self.peek().isdigit():
            coeff = Fraction(self.integer())
            if self.peek() == "/":
                self.pos += 1
                den_pos = self.pos
                den = self.integer()
                if den == 0:
                    self.error("zero denominator", den_pos)
                coeff /= den
            if self.peek() != "*":
                return tuple(exps), coeff
            self.pos += 1
        while True:
            f = self.factor()
            exps = [a + b for a, b in zip(exps, f)]
            if self.peek() != "*":
                break
            self.pos += 1
        return tuple(exps), coeff

    def parse(self) -> Polynomial:
        terms: dict = {}
        sign = 1
        if self.peek() in "+-" and self.peek():
            sign = -1 if self.peek() == "-" else 1
            self.pos += 1
        while True:
            exps, c = self.term()
            terms[exps] = terms.get(exps, 0) + sign * c
            nxt = self.peek()
            if nxt == "":
                break
            if nxt not in "+-":
                self.error(f"unexpected character {nxt!r}")
            sign = -1 if nxt == "-" else 1
            self.pos += 1
        return Polynomial(self.num_vars, terms)


def poly_parse(text: str, num_vars: int) -> Polynomial:
    """Parse ``"3/2*x0^2*x1 - x2 + 1"`` style text into a polynomial.

    A single leading sign is accepted so that formatted output with a
    negative leading coefficient parses back.
    """
    if not isinstance(text, str):
        raise PolynomialSyntaxError("expected a string", repr(text), 0)
    if not text.strip():
        raise PolynomialSyntaxError("empty polynomial", text, 0)
    return _Parser(text, num_vars).parse()


def monomials(num_vars: int, max_degree: int) -> list[tuple]:
    """Exponent vectors of total degree <= max_degree, ordered by degree."""
    out = []
    for d in range(max_degree + 1):
        level = set()
        for combo in combinations_with_replacement(range(num_vars), d):
            exps = [0] * num_vars
            for i in combo:
                exps[i] += 1
            level.add(tuple(exps))
        out.extend(sorted(level, reverse=True))
        if num_vars == 0:
            break
    return out


def random_poly(
    num_vars: int,
    max_degree: int,
    rng: random.Random,
    n_terms: int = 3,
    coeff_range: int = 5,
) -> Polynomial:
    """Sparse random polynomial with small rational coefficients."""
    pool = monomials(num_vars, max_degree)
    terms = {}
    for exps in rng.sample(pool, min(n_terms, len(pool))):
        num = rng.randint(-coeff_range, coeff_range)
        den = rng.choice((1, 1, 2, 3))
        terms[exps] = Fraction(num, den)
    return Polynomial(num_vars, terms)
