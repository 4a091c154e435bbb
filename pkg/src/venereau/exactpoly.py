"""Exact sparse multivariate Laurent polynomials over the integers.

A :class:`Poly` is an immutable mapping from exponent tuples to nonzero
Python ints, tied to a :class:`RingSpec` that names the variables and says
which of them may carry negative exponents.  Terms are kept canonical
(no zero coefficients, one entry per monomial) and are listed in
graded-lexicographic descending order, using the ring's variable order.

The text format used throughout the package::

    ring: x y z u; laurent: x
    x^3*y^2*u + y + x^4*z - 2*x^-1*z^2
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

__all__ = [
    "RingSpec", "Poly", "PolyError", "RingMismatchError", "IntegralityError",
    "NotDivisibleError", "ParseError",
    "add", "sub", "neg", "mul", "power", "substitute", "partial_derivative",
    "jacobian2", "exact_div", "monomial_ideal_member", "reduce_mod_monomials",
    "coeff_in", "eval_at", "format_ring", "parse_ring", "format_poly",
    "parse_poly",
]


class PolyError(ValueError):
    pass


class RingMismatchError(PolyError):
    pass


class IntegralityError(PolyError):
    """A negative exponent landed on a variable that is not inverted."""


class NotDivisibleError(ArithmeticError):
    pass


class ParseError(PolyError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class RingSpec:
    """Ordered variable names plus per-variable Laurent flags."""

    variables: tuple
    laurent_flags: tuple

    def __post_init__(self):
        if len(self.variables) != len(self.laurent_flags):
            raise PolyError("one Laurent flag per variable is required")
        if len(set(self.variables)) != len(self.variables):
            raise PolyError(f"duplicate variable names in {self.variables}")
        for v in self.variables:
            if not isinstance(v, str) or not _NAME.match(v):
                raise PolyError(f"invalid variable name {v!r}")

    @classmethod
    def of(cls, variables, laurent=()):
        if isinstance(variables, str):
            variables = variables.split()
        if isinstance(laurent, str):
            laurent = laurent.split()
        variables = tuple(variables)
        unknown = set(laurent) - set(variables)
        if unknown:
            raise PolyError(f"Laurent flags for unknown variables {sorted(unknown)}")
        return cls(variables, tuple(v in laurent for v in variables))

    @property
    def nvars(self):
        return len(self.variables)

    @property
    def laurent(self):
        return tuple(v for v, f in zip(self.variables, self.laurent_flags) if f)

    def index(self, name):
        try:
            return self.variables.index(name)
        except ValueError:
            raise PolyError(f"unknown variable {name!r} in ring {self.variables}") from None

    def with_laurent(self, laurent):
        return RingSpec.of(self.variables, laurent)

    def drop(self, names):
        keep = [(v, f) for v, f in zip(self.variables, self.laurent_flags) if v not in names]
        return RingSpec(tuple(v for v, _ in keep), tuple(f for _, f in keep))

    def permits(self, exps):
        for e, flag in zip(exps, self.laurent_flags):
            if e < 0 and not flag:
                return False
        return True

    # constructors
    def zero(self):
        return Poly(self, {})

    def one(self):
        return self.const(1)

    def const(self, c):
        return Poly(self, {(0,) * self.nvars: c})

    def var(self, name, exp=1):
        exps = [0] * self.nvars
        exps[self.index(name)] = exp
        return Poly(self, {tuple(exps): 1})

    def gens(self):
        return tuple(self.var(v) for v in self.variables)

    def monomial(self, exps, coeff=1):
        if isinstance(exps, Mapping):
            vec = [0] * self.nvars
            for name, e in exps.items():
                vec[self.index(name)] = e
            exps = vec
        return Poly(self, {tuple(exps): coeff})

    def __str__(self):
        return format_ring(self)


def _key(exps):
    """Sort key for graded-lex descending order (smallest key = leading term)."""
    return (-sum(exps), tuple(-e for e in exps))


class Poly:
    """Immutable canonical sparse polynomial."""

    __slots__ = ("ring", "_d", "_hash")

    def __init__(self, ring, terms=None, _check=True):
        self.ring = ring
        self._hash = None
        if terms is None:
            terms = {}
        if _check:
            d = {}
            items = terms.items() if isinstance(terms, Mapping) else ((e, c) for c, e in terms)
            n = ring.nvars
            for exps, c in items:
                exps = tuple(int(e) for e in exps)
                if len(exps) != n:
                    raise PolyError(f"exponent vector {exps} does not fit ring {ring.variables}")
                if not isinstance(c, int):
                    if isinstance(c, Fraction) and c.denominator == 1:
                        c = c.numerator
                    else:
                        raise PolyError(f"coefficients must be integers, got {c!r}")
                c = d.get(exps, 0) + c
                if c:
                    d[exps] = c
                else:
                    d.pop(exps, None)
            for exps in d:
                if not ring.permits(exps):
                    raise IntegralityError(
                        f"negative exponent in {_fmt_monomial(ring, exps)} not permitted in "
                        f"ring {format_ring(ring)}")
            terms = d
        self._d = terms

    # -- basic accessors ------------------------------------------------
    @property
    def terms(self):
        """Terms as (coefficient, exponents) pairs, leading term first."""
        return [(self._d[e], e) for e in sorted(self._d, key=_key)]

    def items(self):
        return self._d.items()

    def coefficient(self, exps):
        return self._d.get(tuple(exps), 0)

    def __len__(self):
        return len(self._d)

    def __bool__(self):
        return bool(self._d)

    @property
    def is_zero(self):
        return not self._d

    def is_constant(self):
        return not self._d or (len(self._d) == 1 and not any(next(iter(self._d))))

    def is_monomial(self):
        return len(self._d) == 1

    def is_unit(self):
        """True for +-1 times a monomial whose variables are all inverted."""
        if len(self._d) != 1:
            return False
        (exps, c), = self._d.items()
        if c not in (1, -1):
            return False
        return all(e == 0 or f for e, f in zip(exps, self.ring.laurent_flags))

    def leading_term(self):
        e = min(self._d, key=_key)
        return self._d[e], e

    def total_degree(self):
        return max((sum(e) for e in self._d), default=-1)

    def degree(self, var):
        i = self.ring.index(var)
        return max((e[i] for e in self._d), default=-1)

    def min_degree(self, var):
        i = self.ring.index(var)
        return min((e[i] for e in self._d), default=0)

    def involves(self, var):
        i = self.ring.index(var)
        return any(e[i] for e in self._d)

    def variables(self):
        return tuple(v for i, v in enumerate(self.ring.variables)
                     if any(e[i] for e in self._d))

    def to_ring(self, ring):
        """Re-home this polynomial in ``ring``, matching variables by name."""
        if ring == self.ring:
            return self
        pos = []
        for i, v in enumerate(self.ring.variables):
            if v in ring.variables:
                pos.append((i, ring.index(v)))
            elif any(e[i] for e in self._d):
                raise RingMismatchError(f"variable {v!r} is missing from {ring.variables}")
        n = ring.nvars
        d = {}
        for exps, c in self._d.items():
            vec = [0] * n
            for i, j in pos:
                vec[j] = exps[i]
            d[tuple(vec)] = c
        return Poly(ring, d)

    # -- equality / hashing --------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ring == other.ring and self._d == other._d
        if isinstance(other, int):
            return self == self.ring.const(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self._d.items())))
        return self._hash

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.ring != self.ring:
                raise RingMismatchError(
                    f"ring mismatch: {format_ring(self.ring)} vs {format_ring(other.ring)}")
            return other
        if isinstance(other, int):
            return self.ring.const(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        d = dict(self._d)
        for e, c in other._d.items():
            c = d.get(e, 0) + c
            if c:
                d[e] = c
            else:
                del d[e]
        return Poly(self.ring, d, _check=False)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ring, {e: -c for e, c in self._d.items()}, _check=False)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, int):
            if other == 0:
                return self.ring.zero()
            return Poly(self.ring, {e: c * other for e, c in self._d.items()}, _check=False)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = self._d, other._d
        if len(a) < len(b):
            a, b = b, a
        d = {}
        get = d.get
        blist = list(b.items())
        for ea, ca in a.items():
            for eb, cb in blist:
                e = tuple([i + j for i, j in zip(ea, eb)])
                d[e] = get(e, 0) + ca * cb
        d = {e: c for e, c in d.items() if c}
        return Poly(self.ring, d, _check=False)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse_unit() ** (-n)
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def inverse_unit(self):
        """Inverse of a monomial unit; raises IntegralityError otherwise."""
        if len(self._d) != 1:
            raise IntegralityError(f"{self} is not a monomial, hence not invertible")
        (exps, c), = self._d.items()
        if c not in (1, -1):
            raise IntegralityError(f"coefficient {c} is not a unit over the integers")
        return Poly(self.ring, {tuple(-e for e in exps): c})

    def mul_monomial(self, exps, coeff=1):
        d = {tuple([i + j for i, j in zip(e, exps)]): c * coeff for e, c in self._d.items()}
        return Poly(self.ring, d)

    # -- printing -------------------------------------------------------
    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)!r}; {format_ring(self.ring)})"


def _check_same(p, q):
    if p.ring != q.ring:
        raise RingMismatchError(
            f"ring mismatch: {format_ring(p.ring)} vs {format_ring(q.ring)}")


def add(p, q):
    _check_same(p, q)
    return p + q


def sub(p, q):
    _check_same(p, q)
    return p - q


def neg(p):
    return -p


def mul(p, q):
    _check_same(p, q)
    return p * q


def power(p, n):
    return p ** n


# ---------------------------------------------------------------------------
# substitution and calculus

def substitute(p, images, target=None):
    """Ring-homomorphism image of ``p`` under ``var -> images[var]``.

    ``images`` is a PolyMap (anything with ``image_of``) or a mapping from
    variable names of ``p.ring`` to Polys (or ints) of one target ring.
    Negative exponents are only allowed where the image is a monomial unit.
    """
    if hasattr(images, "image_of"):
        target = images.target
        lookup = images.image_of
    else:
        imgs = dict(images)
        if target is None:
            rings = {img.ring for img in imgs.values() if isinstance(img, Poly)}
            if len(rings) != 1:
                raise RingMismatchError("substitution images must share exactly one ring")
            target = rings.pop()

        def lookup(name):
            if name not in imgs:
                raise PolyError(f"no image supplied for variable {name!r}")
            img = imgs[name]
            if isinstance(img, int):
                return target.const(img)
            if img.ring != target:
                img = img.to_ring(target)
            return img

    used = [i for i in range(p.ring.nvars) if any(e[i] for e in p._d)]
    if not used:
        return Poly(target, {(0,) * target.nvars: c for c in p._d.values()}) if p._d else target.zero()
    imgs = [lookup(p.ring.variables[i]) for i in used]
    for img in imgs:
        if img.ring != target:
            raise RingMismatchError("images must live in the target ring")
    cache = [{} for _ in used]

    def power_of(k, e):
        c = cache[k]
        if e not in c:
            if e == 1:
                c[e] = imgs[k]
            elif e < 0:
                c[e] = power_of(k, -1) ** (-e) if e != -1 else imgs[k].inverse_unit()
            else:
                half = power_of(k, e // 2)
                sq = half * half
                c[e] = sq * imgs[k] if e % 2 else sq
        return c[e]

    # Horner-like recursion: group by the exponent of one variable at a time.
    def rec(terms, k):
        if k == len(used):
            c = sum(c for _, c in terms)
            return target.const(c)
        i = used[k]
        groups = {}
        for exps, c in terms:
            groups.setdefault(exps[i], []).append((exps, c))
        total = None
        for e, sub_terms in groups.items():
            part = rec(sub_terms, k + 1)
            if e:
                part = part * power_of(k, e)
            total = part if total is None else total + part
        return total

    return rec(list(p._d.items()), 0)


def partial_derivative(p, var):
    i = p.ring.index(var)
    d = {}
    for exps, c in p._d.items():
        e = exps[i]
        if e:
            new = list(exps)
            new[i] = e - 1
            d[tuple(new)] = c * e
    return Poly(p.ring, d, _check=False)


def jacobian2(f, g, var1, var2):
    """det [[df/dvar1, df/dvar2], [dg/dvar1, dg/dvar2]]."""
    _check_same(f, g)
    return (partial_derivative(f, var1) * partial_derivative(g, var2)
            - partial_derivative(f, var2) * partial_derivative(g, var1))


# ---------------------------------------------------------------------------
# division

def _split_monomial(p):
    """Return (m, q) with p = x^m * q and q free of monomial factors."""
    n = p.ring.nvars
    m = tuple(min(e[i] for e in p._d) for i in range(n))
    q = {tuple(a - b for a, b in zip(e, m)): c for e, c in p._d.items()}
    return m, q


def exact_div(p, q):
    """Exact quotient ``p / q``; raises NotDivisibleError when none exists in p's ring.

    The largest monomial factor is split off both operands first, so the
    single-divisor division below runs on genuine polynomials, where a
    zero remainder is equivalent to divisibility.
    """
    _check_same(p, q)
    if q.is_zero:
        raise ZeroDivisionError("division by the zero polynomial")
    if p.is_zero:
        return p
    mp, pd = _split_monomial(p)
    mq, qd = _split_monomial(q)
    lead = min(qd, key=_key)
    lc = qd[lead]
    qrest = [(e, c) for e, c in qd.items() if e != lead]
    r = dict(pd)
    heap = [(_key(e), e) for e in r]
    heapq.heapify(heap)
    quot = {}
    while heap:
        _, e = heapq.heappop(heap)
        c = r.pop(e, 0)
        if not c:
            continue
        shift = tuple(a - b for a, b in zip(e, lead))
        if any(s < 0 for s in shift):
            raise NotDivisibleError(f"{q} does not divide {p}")
        qc, rem = divmod(c, lc)
        if rem:
            raise NotDivisibleError(f"{q} does not divide {p} over the integers")
        quot[shift] = qc
        for eq, cq in qrest:
            k = tuple([a + b for a, b in zip(shift, eq)])
            old = r.get(k)
            if old is None:
                r[k] = -qc * cq
                heapq.heappush(heap, (_key(k), k))
            else:
                new = old - qc * cq
                if new:
                    r[k] = new
                else:
                    del r[k]
    offset = tuple(a - b for a, b in zip(mp, mq))
    d = {tuple(a + b for a, b in zip(e, offset)): c for e, c in quot.items()}
    exps_ok = all(p.ring.permits(e) for e in d)
    if not exps_ok:
        raise NotDivisibleError(f"{q} does not divide {p} in {format_ring(p.ring)}")
    return Poly(p.ring, d, _check=False)


def _generator_positions(p, gens):
    out = []
    for var, e in gens:
        i = p.ring.index(var)
        if e < 0:
            raise PolyError(f"generator {var}^{e} must have a nonnegative exponent")
        if any(exps[i] < 0 for exps in p._d):
            raise PolyError(f"negative exponents of generator variable {var!r} present")
        out.append((i, e))
    return out


def reduce_mod_monomials(p, gens):
    """Drop every term divisible by one of the pure powers ``gens = [(var, exp), ...]``."""
    pos = _generator_positions(p, gens)
    d = {exps: c for exps, c in p._d.items()
         if not any(exps[i] >= e for i, e in pos)}
    return Poly(p.ring, d, _check=False)


def monomial_ideal_member(p, gens):
    """Membership in an ideal generated by pure powers of variables."""
    return reduce_mod_monomials(p, gens).is_zero


def coeff_in(p, pattern):
    """Coefficient of the monomial pattern ``{var: exp}`` as a Poly in the remaining variables."""
    pos = [(p.ring.index(v), e) for v, e in pattern.items()]
    ring = p.ring.drop(set(pattern))
    keep = [i for i, v in enumerate(p.ring.variables) if v not in pattern]
    d = {}
    for exps, c in p._d.items():
        if all(exps[i] == e for i, e in pos):
            d[tuple(exps[i] for i in keep)] = c
    return Poly(ring, d, _check=False)


def eval_at(p, assignment):
    """Exact value at a point given as ``{var: int | Fraction}``.

    Only variables that actually occur in ``p`` need a value.
    """
    vals = []
    used = p.variables()
    for v, flag in zip(p.ring.variables, p.ring.laurent_flags):
        if v not in assignment:
            if v in used:
                raise PolyError(f"no value assigned to {v!r}")
            vals.append(Fraction(0))
            continue
        a = Fraction(assignment[v])
        if flag and a == 0 and any(e[p.ring.index(v)] < 0 for e in p._d):
            raise ZeroDivisionError(f"zero assigned to inverted variable {v!r}")
        vals.append(a)
    total = Fraction(0)
    for exps, c in p._d.items():
        term = Fraction(c)
        for a, e in zip(vals, exps):
            if e:
                term *= a ** e
        total += term
    return total


# ---------------------------------------------------------------------------
# canonical text format

def format_ring(ring):
    lau = " ".join(ring.laurent)
    return f"ring: {' '.join(ring.variables)}; laurent:" + (f" {lau}" if lau else "")


def parse_ring(line, lineno=1):
    m = re.match(r"\s*ring:\s*(.*?)\s*;\s*laurent:\s*(.*?)\s*\Z", line)
    if not m:
        raise ParseError("expected 'ring: <vars>; laurent: <vars>'", lineno, 1)
    try:
        return RingSpec.of(m.group(1).split(), m.group(2).split())
    except PolyError as exc:
        raise ParseError(str(exc), lineno, 1) from None


def _fmt_monomial(ring, exps):
    parts = []
    for v, e in zip(ring.variables, exps):
        if e == 1:
            parts.append(v)
        elif e:
            parts.append(f"{v}^{e}")
    return "*".join(parts)


def format_poly(p):
    if p.is_zero:
        return "0"
    out = []
    for i, (c, exps) in enumerate(p.terms):
        mono = _fmt_monomial(p.ring, exps)
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        if i == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*^]))")


def _tokenize(text, lineno):
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[col - 1]!r}", lineno, col)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    return toks


def parse_poly(text, ring, lineno=1, column_offset=0):
    """Parse a polynomial line against ``ring``; non-canonical term order is accepted."""
    toks = _tokenize(text, lineno)
    if not toks:
        raise ParseError("empty polynomial", lineno, column_offset + 1)
    toks.append(("end", "", len(text.rstrip()) + 1))
    i = 0
    terms = []

    def err(msg, tok):
        raise ParseError(msg, lineno, tok[2] + column_offset)

    def parse_term(sign):
        nonlocal i
        coeff = sign
        exps = [0] * ring.nvars
        while True:
            kind, val, col = toks[i]
            if kind == "int":
                coeff *= int(val)
                i += 1
            elif kind == "name":
                if val not in ring.variables:
                    err(f"unknown variable {val!r}", toks[i])
                i += 1
                e = 1
                if toks[i][1] == "^":
                    i += 1
                    esign = 1
                    if toks[i][1] == "-":
                        esign = -1
                        i += 1
                    if toks[i][0] != "int":
                        err("expected integer exponent", toks[i])
                    e = esign * int(toks[i][1])
                    i += 1
                exps[ring.index(val)] += e
            else:
                err("expected coefficient or variable", toks[i])
            if toks[i][1] == "*":
                i += 1
                continue
            return coeff, tuple(exps)

    sign = 1
    if toks[0][1] in "+-" and toks[0][0] == "op":
        sign = -1 if toks[0][1] == "-" else 1
        i = 1
    terms.append(parse_term(sign))
    while toks[i][0] != "end":
        kind, val, col = toks[i]
        if val not in ("+", "-"):
            err(f"expected '+' or '-', got {val!r}", toks[i])
        i += 1
        terms.append(parse_term(-1 if val == "-" else 1))
    try:
        return Poly(ring, terms)
    except IntegralityError as exc:
        raise ParseError(str(exc), lineno, column_offset + 1) from None
