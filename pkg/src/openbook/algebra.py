"""Exact polynomial arithmetic for mixed and real polynomials.

Mixed polynomials live in ``z_1..z_n`` and their conjugates with Gaussian
rational coefficients.  Real polynomial maps live in ``x_1..x_m`` with
rational coefficients.  Realification uses the interleaved convention
``z_j = x_{2j-1} + i x_{2j}``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Callable, Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np

MAX_EXPONENT = 2 ** 16

Exp = Tuple[int, ...]


class ParseError(ValueError):
    """Malformed polynomial text.  ``pos`` is the 0-based character offset."""

    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}")


class ExponentOverflow(ValueError):
    pass


def _check_exp(e: Exp) -> Exp:
    if any(k > MAX_EXPONENT for k in e):
        raise ExponentOverflow(f"exponent exceeds bound {MAX_EXPONENT}: {e}")
    return e


# ---------------------------------------------------------------------------
# Gaussian rationals
# ---------------------------------------------------------------------------


@total_ordering
@dataclass(frozen=True)
class GaussianRational:
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @classmethod
    def of(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        if isinstance(value, (MixedPolynomial, RealPoly)):
            raise TypeError("not a scalar")
        return cls(Fraction(value), Fraction(0))

    def __add__(self, other):
        try:
            o = GaussianRational.of(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        if isinstance(other, (MixedPolynomial, RealPoly)):
            return NotImplemented
        return self + (-GaussianRational.of(other))

    def __rsub__(self, other):
        return GaussianRational.of(other) - self

    def __mul__(self, other):
        try:
            o = GaussianRational.of(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = GaussianRational.of(other)
        except TypeError:
            return NotImplemented
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * o.conjugate()
        return GaussianRational(num.re / den, num.im / den)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            o = GaussianRational.of(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __lt__(self, other):
        o = GaussianRational.of(other)
        return (self.re, self.im) < (o.re, o.im)

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({_fmt_frac(self.re)}, {_fmt_frac(self.im)})"

    def __str__(self):
        return _fmt_gauss(self)


I = GaussianRational(Fraction(0), Fraction(1))


def _fmt_frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _fmt_gauss(c: GaussianRational) -> str:
    if c.im == 0:
        return _fmt_frac(c.re)
    if c.re == 0:
        if c.im == 1:
            return "i"
        if c.im == -1:
            return "-i"
        return f"{_fmt_frac(c.im)}*i"
    sign = "+" if c.im > 0 else "-"
    im = abs(c.im)
    im_s = "i" if im == 1 else f"{_fmt_frac(im)}*i"
    return f"({_fmt_frac(c.re)} {sign} {im_s})"


# ---------------------------------------------------------------------------
# Real polynomials
# ---------------------------------------------------------------------------


def _graded_key(e: Exp):
    return (sum(e), e)


class RealPoly:
    """Sparse polynomial over Q in ``m`` variables."""

    __slots__ = ("m", "terms", "_hash")

    def __init__(self, m: int, terms: Mapping[Exp, object] | None = None):
        self.m = m
        clean: Dict[Exp, Fraction] = {}
        for e, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                if len(e) != m:
                    raise ValueError(f"exponent {e} does not match {m} variables")
                clean[_check_exp(tuple(e))] = c
        self.terms = clean
        self._hash = None

    # constructors
    @classmethod
    def const(cls, m: int, c) -> "RealPoly":
        return cls(m, {(0,) * m: c})

    @classmethod
    def var(cls, m: int, j: int) -> "RealPoly":
        e = [0] * m
        e[j] = 1
        return cls(m, {tuple(e): 1})

    # arithmetic
    def _coerce(self, other) -> "RealPoly":
        if isinstance(other, RealPoly):
            if other.m != self.m:
                raise ValueError("variable count mismatch")
            return other
        return RealPoly.const(self.m, other)

    def __add__(self, other):
        o = self._coerce(other)
        out = dict(self.terms)
        for e, c in o.terms.items():
            out[e] = out.get(e, 0) + c
        return RealPoly(self.m, out)

    __radd__ = __add__

    def __neg__(self):
        return RealPoly(self.m, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        out: Dict[Exp, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return RealPoly(self.m, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = RealPoly.const(self.m, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, RealPoly):
            return self.m == other.m and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == RealPoly.const(self.m, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.m, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def diff(self, j: int) -> "RealPoly":
        out = {}
        for e, c in self.terms.items():
            if e[j]:
                f = list(e)
                f[j] -= 1
                out[tuple(f)] = c * e[j]
        return RealPoly(self.m, out)

    def gradient(self) -> Tuple["RealPoly", ...]:
        return tuple(self.diff(j) for j in range(self.m))

    def substitute(self, values: Sequence["RealPoly"]) -> "RealPoly":
        """Compose with polynomials ``values`` (one per variable, any common ring size)."""
        m2 = values[0].m
        out = RealPoly(m2)
        cache: Dict[Tuple[int, int], RealPoly] = {}
        for e, c in self.terms.items():
            t = RealPoly.const(m2, c)
            for j, k in enumerate(e):
                if k:
                    if (j, k) not in cache:
                        cache[(j, k)] = values[j] ** k
                    t = t * cache[(j, k)]
            out = out + t
        return out

    def __call__(self, point):
        return self.eval(point)

    def eval(self, point: Sequence):
        if len(point) != self.m:
            raise ValueError(f"point has dimension {len(point)}, polynomial has {self.m} variables")
        total = 0
        for e, c in self.terms.items():
            t = c if _is_exact(point) else float(c)
            for x, k in zip(point, e):
                if k:
                    t = t * x ** k
            total = total + t
        return total

    def coefficient_content(self) -> Fraction:
        return sum((abs(c) for c in self.terms.values()), Fraction(0))

    def primitive(self) -> "RealPoly":
        """Scale to integer coefficients with gcd 1 and positive leading coefficient."""
        if not self.terms:
            return self
        from math import gcd, lcm

        den = 1
        for c in self.terms.values():
            den = lcm(den, c.denominator)
        nums = [int(c * den) for c in self.terms.values()]
        g = 0
        for v in nums:
            g = gcd(g, v)
        lead = self.terms[max(self.terms, key=_graded_key)]
        s = 1 if lead > 0 else -1
        return RealPoly(self.m, {e: c * den / g * s for e, c in self.terms.items()})

    def to_str(self, names: Sequence[str] | None = None) -> str:
        names = names or default_names("x", self.m)
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=_graded_key, reverse=True):
            c = self.terms[e]
            mono = _mono_str(names, e)
            parts.append(_join_coeff(_fmt_frac(abs(c)), mono, c < 0))
        return _join_terms(parts)

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"RealPoly({self.to_str()!r})"


def _is_exact(point) -> bool:
    return all(isinstance(v, (int, Fraction, GaussianRational)) for v in point)


def _mono_str(names, e, conj_names=None, f=None) -> str:
    factors = []
    for name, k in zip(names, e):
        if k == 1:
            factors.append(name)
        elif k > 1:
            factors.append(f"{name}^{k}")
    if conj_names is not None:
        for name, k in zip(conj_names, f):
            if k == 1:
                factors.append(name)
            elif k > 1:
                factors.append(f"{name}^{k}")
    return "*".join(factors)


def _join_coeff(coeff: str, mono: str, negative: bool):
    if not mono:
        body = coeff
    elif coeff == "1":
        body = mono
    else:
        body = f"{coeff}*{mono}"
    return ("-" if negative else "+", body)


def _join_terms(parts) -> str:
    sign, body = parts[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def default_names(prefix: str, k: int) -> Tuple[str, ...]:
    return tuple(f"{prefix}{j + 1}" for j in range(k))


@dataclass(frozen=True)
class RealPolyMap:
    """Polynomial map R^m -> R^p; V is the common zero set of ``components``."""

    components: Tuple[RealPoly, ...]
    names: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.components:
            raise ValueError("a map needs at least one component")
        m = self.components[0].m
        if any(c.m != m for c in self.components):
            raise ValueError("components disagree on variable count")
        if len(self.components) > m:
            raise ValueError(f"target dimension {len(self.components)} exceeds source dimension {m}")
        if not self.names:
            object.__setattr__(self, "names", default_names("x", m))

    @property
    def m(self) -> int:
        return self.components[0].m

    @property
    def p(self) -> int:
        return len(self.components)

    def jacobian(self) -> Tuple[Tuple[RealPoly, ...], ...]:
        return tuple(c.gradient() for c in self.components)

    def eval(self, point):
        return tuple(c.eval(point) for c in self.components)

    def __call__(self, point):
        return self.eval(point)

    def to_str(self) -> str:
        return "; ".join(c.to_str(self.names) for c in self.components)

    def __str__(self):
        return self.to_str()


# ---------------------------------------------------------------------------
# Mixed polynomials
# ---------------------------------------------------------------------------

MixedKey = Tuple[Exp, Exp]


class MixedPolynomial:
    """Polynomial in z and conj(z) with Gaussian rational coefficients."""

    __slots__ = ("n", "terms", "_hash")

    def __init__(self, n: int, terms: Mapping[MixedKey, object] | None = None):
        self.n = n
        clean: Dict[MixedKey, GaussianRational] = {}
        for (nu, mu), c in (terms or {}).items():
            c = GaussianRational.of(c)
            if c:
                if len(nu) != n or len(mu) != n:
                    raise ValueError("exponent length mismatch")
                clean[(_check_exp(tuple(nu)), _check_exp(tuple(mu)))] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def const(cls, n: int, c) -> "MixedPolynomial":
        z = (0,) * n
        return cls(n, {(z, z): c})

    @classmethod
    def z(cls, n: int, j: int) -> "MixedPolynomial":
        e = [0] * n
        e[j] = 1
        return cls(n, {(tuple(e), (0,) * n): 1})

    @classmethod
    def zbar(cls, n: int, j: int) -> "MixedPolynomial":
        e = [0] * n
        e[j] = 1
        return cls(n, {((0,) * n, tuple(e)): 1})

    def _coerce(self, other) -> "MixedPolynomial":
        if isinstance(other, MixedPolynomial):
            if other.n != self.n:
                raise ValueError("variable count mismatch")
            return other
        return MixedPolynomial.const(self.n, other)

    def __add__(self, other):
        o = self._coerce(other)
        out = dict(self.terms)
        for k, c in o.terms.items():
            out[k] = out.get(k, GaussianRational()) + c
        return MixedPolynomial(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return MixedPolynomial(self.n, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        out: Dict[MixedKey, GaussianRational] = {}
        for (n1, m1), c1 in self.terms.items():
            for (n2, m2), c2 in o.terms.items():
                k = (tuple(a + b for a, b in zip(n1, n2)), tuple(a + b for a, b in zip(m1, m2)))
                out[k] = out.get(k, GaussianRational()) + c1 * c2
        return MixedPolynomial(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = MixedPolynomial.const(self.n, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, MixedPolynomial):
            return self.n == other.n and self.terms == other.terms
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self == MixedPolynomial.const(self.n, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_holomorphic(self) -> bool:
        return all(not any(mu) for _, mu in self.terms)

    def conjugate(self) -> "MixedPolynomial":
        return MixedPolynomial(self.n, {(mu, nu): c.conjugate() for (nu, mu), c in self.terms.items()})

    def degree(self) -> int:
        return max((sum(nu) + sum(mu) for nu, mu in self.terms), default=-1)

    def support(self) -> Tuple[Exp, ...]:
        """Distinct points nu + mu, sorted."""
        return tuple(sorted({tuple(a + b for a, b in zip(nu, mu)) for nu, mu in self.terms}))

    def dz(self, j: int) -> "MixedPolynomial":
        out = {}
        for (nu, mu), c in self.terms.items():
            if nu[j]:
                f = list(nu)
                f[j] -= 1
                out[(tuple(f), mu)] = c * nu[j]
        return MixedPolynomial(self.n, out)

    def dzbar(self, j: int) -> "MixedPolynomial":
        out = {}
        for (nu, mu), c in self.terms.items():
            if mu[j]:
                f = list(mu)
                f[j] -= 1
                out[(nu, tuple(f))] = c * mu[j]
        return MixedPolynomial(self.n, out)

    def eval(self, point: Sequence):
        if len(point) != self.n:
            raise ValueError(f"point has dimension {len(point)}, polynomial has {self.n} variables")
        exact = _is_exact(point)
        if exact:
            pts = [GaussianRational.of(v) for v in point]
            total = GaussianRational()
            for (nu, mu), c in self.terms.items():
                t = c
                for zj, a, b in zip(pts, nu, mu):
                    for _ in range(a):
                        t = t * zj
                    for _ in range(b):
                        t = t * zj.conjugate()
                total = total + t
            return total
        pts = [complex(v) for v in point]
        total = 0j
        for (nu, mu), c in self.terms.items():
            t = complex(c)
            for zj, a, b in zip(pts, nu, mu):
                if a:
                    t *= zj ** a
                if b:
                    t *= zj.conjugate() ** b
            total += t
        return total

    def __call__(self, point):
        return self.eval(point)

    def to_str(self, names: Sequence[str] | None = None) -> str:
        names = names or default_names("z", self.n)
        conj_names = [f"conj({s})" for s in names]
        if not self.terms:
            return "0"

        def key(k):
            nu, mu = k
            return (sum(nu) + sum(mu), nu + mu)

        parts = []
        for k in sorted(self.terms, key=key, reverse=True):
            c = self.terms[k]
            mono = _mono_str(names, k[0], conj_names, k[1])
            if c.im == 0:
                parts.append(_join_coeff(_fmt_frac(abs(c.re)), mono, c.re < 0))
            elif c.re == 0:
                coeff = "i" if abs(c.im) == 1 else f"{_fmt_frac(abs(c.im))}*i"
                parts.append(("-" if c.im < 0 else "+", coeff if not mono else f"{coeff}*{mono}"))
            else:
                parts.append(_join_coeff(_fmt_gauss(c), mono, False))
        return _join_terms(parts)

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"MixedPolynomial({self.to_str()!r})"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


class _Parser:
    """Recursive descent over ``+ - * / ^ ( )`` with caller-supplied atoms."""

    def __init__(self, text: str, atom: Callable[[str, int], object],
                 number: Callable[[Fraction], object], offset: int = 0):
        self.text = text
        self.atom = atom
        self.number = number
        self.offset = offset
        self.tokens = []
        pos = 0
        while pos < len(text):
            mt = _TOKEN.match(text, pos)
            if mt is None or mt.end() == pos:
                break
            if mt.group(1) is not None:
                self.tokens.append(("num", mt.group(1), mt.start(1)))
            elif mt.group(2) is not None:
                self.tokens.append(("name", mt.group(2), mt.start(2)))
            else:
                self.tokens.append(("op", mt.group(3), mt.start(3)))
            pos = mt.end()
        self.i = 0

    def error(self, msg, pos=None):
        if pos is None:
            pos = self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text)
        raise ParseError(msg, pos + self.offset, self.text)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("end", "", len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            self.i -= 1
            self.error(f"expected '{op}'")
        return tok

    def parse(self):
        if not self.tokens:
            self.error("empty expression", 0)
        value = self.expr()
        if self.i != len(self.tokens):
            self.error(f"unexpected token '{self.peek()[1]}'")
        return value

    def expr(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            value = self.term()
            if tok[1] == "-":
                value = -value
        else:
            value = self.term()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                rhs = self.term()
                value = value + rhs if tok[1] == "+" else value - rhs
            else:
                return value

    def term(self):
        value = self.factor()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] == "*":
                self.take()
                value = value * self.factor()
            elif tok[0] == "op" and tok[1] == "/":
                self.take()
                num = self.take()
                if num[0] != "num":
                    self.i -= 1
                    self.error("only division by a nonzero integer literal is allowed")
                if int(num[1]) == 0:
                    self.error("division by zero", num[2])
                value = value * self.number(Fraction(1, int(num[1])))
            else:
                return value

    def factor(self):
        base = self.unary()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            num = self.take()
            if num[0] != "num":
                self.i -= 1
                self.error("exponent must be a non-negative integer literal")
            k = int(num[1])
            if k > MAX_EXPONENT:
                raise ExponentOverflow(f"exponent {k} exceeds bound {MAX_EXPONENT} at position {num[2] + self.offset}")
            return base ** k
        return base

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return -self.unary()
        return self.atom_()

    def atom_(self):
        tok = self.take()
        kind, val, pos = tok
        if kind == "num":
            return self.number(Fraction(int(val)))
        if kind == "op" and val == "(":
            value = self.expr()
            self.expect(")")
            return value
        if kind == "name":
            if val == "conj":
                self.expect("(")
                name = self.take()
                if name[0] != "name":
                    self.i -= 1
                    self.error("conj() takes a variable name")
                self.expect(")")
                return self.atom("conj:" + name[1], name[2] + self.offset)
            return self.atom(val, pos + self.offset)
        if kind == "end":
            self.error("unexpected end of input", pos)
        self.i -= 1
        self.error(f"unexpected token '{val}'")


_VARS_HEADER = re.compile(r"^\s*vars\s*:\s*([^\n;]*?)\s*(?:\n|;|$)")


def _split_header(text: str):
    mt = _VARS_HEADER.match(text)
    if not mt:
        return None, text, 0
    names = tuple(s.strip() for s in mt.group(1).replace(",", " ").split() if s.strip())
    return names, text[mt.end():], mt.end()


def parse_mixed(text: str, names: Sequence[str] | None = None) -> MixedPolynomial:
    """Parse a mixed polynomial; variables default to ``z1..zk`` (k inferred)."""
    header, body, offset = _split_header(text)
    names = tuple(names or header or ())
    if not names:
        idx = [int(s) for s in re.findall(r"\bz(\d+)\b", body)]
        names = default_names("z", max(idx, default=1))
    n = len(names)
    lookup = {s: j for j, s in enumerate(names)}

    def atom(name: str, pos: int):
        conj = name.startswith("conj:")
        base = name[5:] if conj else name
        if base == "i" and not conj and "i" not in lookup:
            return MixedPolynomial.const(n, I)
        if base not in lookup:
            raise ParseError(f"unknown variable '{base}'", pos, text)
        j = lookup[base]
        return MixedPolynomial.zbar(n, j) if conj else MixedPolynomial.z(n, j)

    return _Parser(body, atom, lambda q: MixedPolynomial.const(n, q), offset).parse()


def parse_real(text: str, names: Sequence[str]) -> RealPoly:
    m = len(names)
    lookup = {s: j for j, s in enumerate(names)}

    def atom(name: str, pos: int):
        if name.startswith("conj:"):
            raise ParseError("conj() is not allowed in a real polynomial", pos, text)
        if name not in lookup:
            raise ParseError(f"unknown variable '{name}'", pos, text)
        return RealPoly.var(m, lookup[name])

    return _Parser(text, atom, lambda q: RealPoly.const(m, q)).parse()


def parse_real_map(text: str, names: Sequence[str] | None = None) -> RealPolyMap:
    """Parse ``;``-separated components.  Variables default to ``x1..xm``."""
    header, body, offset = _split_header(text)
    names = tuple(names or header or ())
    if not names:
        idx = [int(s) for s in re.findall(r"\bx(\d+)\b", body)]
        names = default_names("x", max(idx, default=1))
    comps = []
    start = 0
    for piece in body.split(";"):
        if piece.strip():
            lookup = {s: j for j, s in enumerate(names)}
            m = len(names)

            def atom(name, pos, lookup=lookup, m=m):
                if name.startswith("conj:"):
                    raise ParseError("conj() is not allowed in a real map", pos, text)
                if name not in lookup:
                    raise ParseError(f"unknown variable '{name}'", pos, text)
                return RealPoly.var(m, lookup[name])

            comps.append(_Parser(piece, atom, lambda q, m=m: RealPoly.const(m, q), offset + start).parse())
        start += len(piece) + 1
    if not comps:
        raise ParseError("no components", 0, text)
    if len(comps) > len(names):
        raise ValueError(f"target dimension {len(comps)} exceeds source dimension {len(names)}")
    return RealPolyMap(tuple(comps), names)


# ---------------------------------------------------------------------------
# Wirtinger calculus, realification, conj products
# ---------------------------------------------------------------------------


def wirtinger(f: MixedPolynomial):
    """Return ``(df, dbar_f)`` with z and conj(z) treated as independent."""
    return (tuple(f.dz(j) for j in range(f.n)), tuple(f.dzbar(j) for j in range(f.n)))


def conj_product(g: MixedPolynomial, h: MixedPolynomial) -> MixedPolynomial:
    if not (g.is_holomorphic() and h.is_holomorphic()):
        raise ValueError("conj_product expects holomorphic g and h")
    return g * h.conjugate()


def realify_pair(f: MixedPolynomial) -> Tuple[RealPoly, RealPoly]:
    """(Re f, Im f) in x1..x2n with z_j = x_{2j-1} + i x_{2j}."""
    m = 2 * f.n
    # complex-coefficient real polynomials as dict exp -> GaussianRational
    cache: Dict[Tuple[int, int, int], Dict[Exp, GaussianRational]] = {}

    def cmul(a, b):
        out: Dict[Exp, GaussianRational] = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = out.get(e, GaussianRational()) + c1 * c2
        return {e: c for e, c in out.items() if c}

    def zpow(j, a, b):
        key = (j, a, b)
        if key not in cache:
            ex = [0] * m
            ex[2 * j] = 1
            ey = [0] * m
            ey[2 * j + 1] = 1
            z = {tuple(ex): GaussianRational(Fraction(1)), tuple(ey): I}
            zb = {tuple(ex): GaussianRational(Fraction(1)), tuple(ey): -I}
            r = {(0,) * m: GaussianRational(Fraction(1))}
            for _ in range(a):
                r = cmul(r, z)
            for _ in range(b):
                r = cmul(r, zb)
            cache[key] = r
        return cache[key]

    acc: Dict[Exp, GaussianRational] = {}
    for (nu, mu), c in f.terms.items():
        t = {(0,) * m: c}
        for j in range(f.n):
            if nu[j] or mu[j]:
                t = cmul(t, zpow(j, nu[j], mu[j]))
        for e, v in t.items():
            acc[e] = acc.get(e, GaussianRational()) + v
    re_part = RealPoly(m, {e: c.re for e, c in acc.items()})
    im_part = RealPoly(m, {e: c.im for e, c in acc.items()})
    return re_part, im_part


def realify(f: MixedPolynomial) -> RealPolyMap:
    re_part, im_part = realify_pair(f)
    return RealPolyMap((re_part, im_part), default_names("x", 2 * f.n))


def complex_to_real(z: Sequence) -> Tuple:
    """Interleave a complex point into its realified coordinates."""
    out = []
    for v in z:
        if isinstance(v, (GaussianRational, int, Fraction)):
            g = GaussianRational.of(v)
            out.extend([g.re, g.im])
        else:
            v = complex(v)
            out.extend([v.real, v.imag])
    return tuple(out)


def evaluate(f, point):
    """Evaluate a MixedPolynomial, RealPoly or RealPolyMap at ``point``."""
    return f.eval(point)


# ---------------------------------------------------------------------------
# Fast float evaluation
# ---------------------------------------------------------------------------


class CompiledPoly:
    """Float snapshot of a RealPoly for vectorized evaluation."""

    def __init__(self, poly: RealPoly):
        self.m = poly.m
        keys = list(poly.terms)
        self.exps = np.array(keys, dtype=np.int64).reshape(len(keys), poly.m)
        self.coeffs = np.array([float(poly.terms[k]) for k in keys], dtype=float)
        self.degree = poly.degree()

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if not len(self.coeffs):
            return np.zeros(X.shape[0])
        mon = np.prod(X[:, None, :] ** self.exps[None, :, :], axis=2)
        return mon @ self.coeffs

    def magnitude(self, X: np.ndarray) -> np.ndarray:
        """Sum of absolute term values, the natural scale for cancellation tests."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if not len(self.coeffs):
            return np.zeros(X.shape[0])
        mon = np.prod(np.abs(X[:, None, :]) ** self.exps[None, :, :], axis=2)
        return mon @ np.abs(self.coeffs)


# ---------------------------------------------------------------------------
# Arcs and truncated Laurent expansions (t -> infinity)
# ---------------------------------------------------------------------------


def _is_zero(c) -> bool:
    if isinstance(c, (int, Fraction, GaussianRational)):
        return c == 0
    if isinstance(c, (float, complex, np.floating, np.complexfloating)):
        return c == 0
    try:
        import sympy

        return sympy.expand(c) == 0
    except Exception:  # pragma: no cover - exotic coefficient types
        return c == 0


def _conj(c):
    if isinstance(c, (int, Fraction)):
        return c
    if isinstance(c, GaussianRational):
        return c.conjugate()
    if hasattr(c, "conjugate"):
        return c.conjugate()
    return c


@dataclass(frozen=True)
class Arc:
    """Truncated arc ``x_j(t) = sum_k a_{j,k} t^(w_j - k)``, t -> infinity.

    ``coeffs[j]`` is ``None`` for an inactive (identically zero) variable.
    """

    lead: Tuple[int, ...]
    coeffs: Tuple[Tuple | None, ...]
    complex_ring: bool = False

    def __post_init__(self):
        if len(self.lead) != len(self.coeffs):
            raise ValueError("lead exponents and coefficient lists differ in length")
        for c in self.coeffs:
            if c is not None and _is_zero(c[0]):
                raise ValueError("active variables need a nonzero leading coefficient")

    @property
    def n(self) -> int:
        return len(self.lead)

    @property
    def order(self) -> int:
        return min((len(c) - 1 for c in self.coeffs if c is not None), default=0)

    def is_unbounded(self) -> bool:
        return any(c is not None and w > 0 for w, c in zip(self.lead, self.coeffs))

    def active(self) -> Tuple[int, ...]:
        return tuple(j for j, c in enumerate(self.coeffs) if c is not None)

    def point(self, t: float) -> np.ndarray:
        dtype = complex if self.complex_ring else float
        out = np.zeros(self.n, dtype=dtype)
        for j, (w, c) in enumerate(zip(self.lead, self.coeffs)):
            if c is not None:
                out[j] = sum(complex(a) * t ** (w - k) if self.complex_ring else float(a) * t ** (w - k)
                             for k, a in enumerate(c))
        return out

    def to_json(self) -> dict:
        def enc(a):
            if isinstance(a, Fraction):
                return _fmt_frac(a)
            if isinstance(a, GaussianRational):
                return str(a)
            if isinstance(a, complex):
                return [a.real, a.imag]
            try:
                return float(a)
            except TypeError:
                return str(a)

        return {
            "lead_exponents": list(self.lead),
            "coefficients": [None if c is None else [enc(a) for a in c] for c in self.coeffs],
            "ring": "complex" if self.complex_ring else "real",
        }


@dataclass(frozen=True)
class LaurentExpansion:
    """Coefficients of ``t^top, t^(top-1), ..., t^valid_down_to``.

    ``leading_exponent`` is the first exponent with a nonzero coefficient, or
    ``None`` if every coefficient in the valid window vanishes.
    """

    top: int
    coeffs: Tuple
    valid_down_to: int

    @property
    def leading_exponent(self):
        for k, c in enumerate(self.coeffs):
            if not _is_zero(c):
                return self.top - k
        return None

    @property
    def leading_coefficient(self):
        for c in self.coeffs:
            if not _is_zero(c):
                return c
        return 0

    def coefficient(self, exponent: int):
        if exponent > self.top:
            return 0
        if exponent < self.valid_down_to:
            raise ValueError(f"exponent {exponent} lies below the valid order {self.valid_down_to}")
        return self.coeffs[self.top - exponent]

    def is_zero(self) -> bool:
        return self.leading_exponent is None


def _series_mul(a, b, K):
    out = [0] * (K + 1)
    for i, x in enumerate(a[:K + 1]):
        if _is_zero(x):
            continue
        for j in range(K + 1 - i):
            out[i + j] = out[i + j] + x * b[j]
    return out


def arc_substitute(g, arc: Arc) -> LaurentExpansion:
    """Expand ``g(x(t))`` for a RealPoly or MixedPolynomial ``g``."""
    K = arc.order
    if isinstance(g, MixedPolynomial):
        if g.n != arc.n:
            raise ValueError("arc and polynomial disagree on variable count")
        items = [((nu, mu), c) for (nu, mu), c in g.terms.items()]
        conj_coeffs = [None if c is None else tuple(_conj(a) for a in c) for c in arc.coeffs]
    else:
        if g.m != arc.n:
            raise ValueError("arc and polynomial disagree on variable count")
        items = [((e, (0,) * g.m), c) for e, c in g.terms.items()]
        conj_coeffs = arc.coeffs

    powers: Dict[Tuple[int, int, bool], list] = {}

    def power(j, k, conj):
        key = (j, k, conj)
        if key not in powers:
            base = list((conj_coeffs if conj else arc.coeffs)[j][:K + 1])
            r = [1] + [0] * K
            for _ in range(k):
                r = _series_mul(r, base, K)
            powers[key] = r
        return powers[key]

    contributions = []
    for (nu, mu), c in items:
        if any((nu[j] or mu[j]) and arc.coeffs[j] is None for j in range(arc.n)):
            continue
        lead = sum((nu[j] + mu[j]) * arc.lead[j] for j in range(arc.n))
        s = [c] + [0] * K
        for j in range(arc.n):
            if nu[j]:
                s = _series_mul(s, power(j, nu[j], False), K)
            if mu[j]:
                s = _series_mul(s, power(j, mu[j], True), K)
        contributions.append((lead, s))
    if not contributions:
        return LaurentExpansion(0, (0,), 0 - K)
    top = max(lead for lead, _ in contributions)
    coeffs = [0] * (K + 1)
    for lead, s in contributions:
        shift = top - lead
        for k in range(K + 1 - shift):
            coeffs[shift + k] = coeffs[shift + k] + s[k]
    coeffs = [_normalize_scalar(c) for c in coeffs]
    return LaurentExpansion(top, tuple(coeffs), top - K)


def _normalize_scalar(c):
    if isinstance(c, GaussianRational) and c.im == 0:
        return c.re
    return c
