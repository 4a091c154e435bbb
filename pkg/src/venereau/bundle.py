"""Transition functions over the punctured (x, v)-plane and triviality certificates.

A transition function ``(t, xi) -> (t, xi + q(t) / (x^k v^l))`` with
``q`` in R[t] = Z[x, v, t] is trivialised by a certificate ``(a, b0, b1)``
in R[t, xi] satisfying ``x^k b1 - v^l b0 = q(a)``; the chart maps are then
``tau_0 = (a, b0 / x^k)`` and ``tau_1 = (a, b1 / v^l)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import sympy

from .exactpoly import (
    NotDivisibleError, Poly, PolyError, RingMismatchError, RingSpec,
    coeff_in, exact_div, format_poly, format_ring, jacobian2,
    monomial_ideal_member, parse_poly, parse_ring, partial_derivative,
    substitute, ParseError,
)
from .endomap import PolyMap, compose, is_identity, is_integral, plane_jacobian

R_T = RingSpec.of("x v t")
PLANE = RingSpec.of("x v t xi")
PLANE_K0 = RingSpec.of("x v t xi", laurent="x")
PLANE_K1 = RingSpec.of("x v t xi", laurent="v")
PLANE_M = RingSpec.of("x v t xi", laurent="x v")
LAURENT_XV = RingSpec.of("x v", laurent="x v")
S_RING = RingSpec.of("t xi")


class VerificationError(PolyError):
    """An identity that should hold exactly did not; ``residual`` holds lhs - rhs."""

    def __init__(self, message, residual=None):
        super().__init__(message if residual is None else f"{message}: residual {residual}")
        self.residual = residual


class SearchBoundsError(ValueError):
    pass


def kl_for(n):
    """Denominator exponents (k, l) of the transition function of lambda_n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return (3, 3) if n == 1 else (3, 2)


def p_n(n):
    from .gallery import make
    return make("p", n)


@dataclass(frozen=True)
class TransitionFunction:
    q: Poly
    k: int
    l: int

    def __post_init__(self):
        if self.q.ring != R_T:
            raise RingMismatchError(f"q must live in {format_ring(R_T)}")
        if self.k < 0 or self.l < 0:
            raise ValueError("k and l must be nonnegative")

    @classmethod
    def for_n(cls, n):
        k, l = kl_for(n)
        return cls(p_n(n), k, l)

    def coefficients(self):
        """r_j in R = Z[x, v] with q = sum r_j t^j."""
        deg = self.q.degree("t")
        return [coeff_in(self.q, {"t": j}) for j in range(deg + 1)]

    def approximation(self, m):
        """Truncate q to t-degree <= m; needs r_0 = 0."""
        if not coeff_in(self.q, {"t": 0}).is_zero:
            raise ValueError("successive approximations need r_0 = 0")
        if m < 1:
            raise ValueError("approximation order must be >= 1")
        i = R_T.index("t")
        q = Poly(R_T, {e: c for e, c in self.q.items() if e[i] <= m})
        return TransitionFunction(q, self.k, self.l)

    def shift(self):
        """q / (x^k v^l) as an element of M[t, xi]."""
        x, v = PLANE_M.var("x"), PLANE_M.var("v")
        return self.q.to_ring(PLANE_M) * x ** -self.k * v ** -self.l

    def as_map(self):
        xi = PLANE_M.var("xi")
        return PolyMap.from_images(PLANE_M, {"xi": xi + self.shift()})

    def apply(self, a):
        """q(a) for a in R[t, xi]."""
        return substitute(self.q, {"x": a.ring.var("x"), "v": a.ring.var("v"), "t": a})


@dataclass(frozen=True)
class Certificate:
    a: Poly
    b0: Poly
    b1: Poly
    k: int
    l: int

    def __post_init__(self):
        for p in (self.a, self.b0, self.b1):
            if p.ring != PLANE:
                raise RingMismatchError(f"certificate entries must live in {format_ring(PLANE)}")

    def tau0(self):
        x = PLANE_M.var("x")
        return PolyMap.from_images(PLANE_M, {"t": self.a.to_ring(PLANE_M),
                                             "xi": self.b0.to_ring(PLANE_M) * x ** -self.k})

    def tau1(self):
        v = PLANE_M.var("v")
        return PolyMap.from_images(PLANE_M, {"t": self.a.to_ring(PLANE_M),
                                             "xi": self.b1.to_ring(PLANE_M) * v ** -self.l})

    def shifted(self, c):
        """The shifted solution (a, b0 + x^k c, b1 + v^l c)."""
        x, v = PLANE.var("x"), PLANE.var("v")
        return Certificate(self.a, self.b0 + x ** self.k * c, self.b1 + v ** self.l * c, self.k, self.l)


def cocycle_residual(cert, tf):
    x, v = PLANE.var("x"), PLANE.var("v")
    return x ** cert.k * cert.b1 - v ** cert.l * cert.b0 - tf.apply(cert.a)


def verify_cocycle(cert, tf):
    """Exact check of x^k b1 - v^l b0 = q(a)."""
    if (cert.k, cert.l) != (tf.k, tf.l):
        raise ValueError(f"certificate exponents {(cert.k, cert.l)} differ from {(tf.k, tf.l)}")
    return cocycle_residual(cert, tf).is_zero


def _to_R(p):
    return p.to_ring(R_T.drop({"t"}))


def jac_quotient(cert):
    """The common quotient jac(a, b0) / x^k = jac(a, b1) / v^l, in Z[x, v, t, xi]."""
    ja0 = jacobian2(cert.a, cert.b0, "t", "xi")
    ja1 = jacobian2(cert.a, cert.b1, "t", "xi")
    x, v = PLANE.var("x"), PLANE.var("v")
    try:
        d0 = exact_div(ja0, x ** cert.k)
        d1 = exact_div(ja1, v ** cert.l)
    except NotDivisibleError as exc:
        raise VerificationError(f"jacobian not divisible: {exc}") from None
    if d0 != d1:
        raise VerificationError("jacobian quotients differ", d0 - d1)
    return d0


def cert_d(cert):
    """``jac_quotient`` checked to lie in R = Z[x, v]; returned as an element of R."""
    d = jac_quotient(cert)
    if d.involves("t") or d.involves("xi"):
        raise VerificationError(f"d = {d} does not lie in Z[x, v]")
    return _to_R(d)


def verify_prim(cert, q):
    """jac(b0, b1) = -d q'(a); with d = 1 this is jac(b0, b1) = -q'(a)."""
    d = jac_quotient(cert)
    dq = partial_derivative(q, "t")
    dq_a = substitute(dq, {"x": PLANE.var("x"), "v": PLANE.var("v"), "t": cert.a})
    jb = jacobian2(cert.b0, cert.b1, "t", "xi")
    if jb != -d * dq_a:
        return False
    if d == 1:
        return jb == -dq_a
    return True


def verify_rel0(cert):
    """x^k jac(a, b1) = v^l jac(a, b0)."""
    x, v = PLANE.var("x"), PLANE.var("v")
    return (x ** cert.k * jacobian2(cert.a, cert.b1, "t", "xi")
            == v ** cert.l * jacobian2(cert.a, cert.b0, "t", "xi"))


def taylor_increment(q, a, A):
    """sum_{j >= 1} q^(j)(a) / j! * A^j, i.e. q(a + A) - q(a) expanded by Taylor."""
    total = A.ring.zero()
    deriv = q
    fact = 1
    emb = {"x": A.ring.var("x"), "v": A.ring.var("v")}
    for j in range(1, q.degree("t") + 1):
        deriv = partial_derivative(deriv, "t")
        fact *= j
        term = substitute(deriv, {**emb, "t": a}) * A ** j
        total += exact_div(term, A.ring.const(fact)) if fact > 1 else term
    return total


# ---------------------------------------------------------------------------
# coefficient conditions on a

def lemma5_conditions(a):
    """Return (holds, a00, a10, a01) where a_ij is the x^i v^j coefficient in Z[t, xi]."""
    a00 = coeff_in(a, {"x": 0, "v": 0})
    a10 = coeff_in(a, {"x": 1, "v": 0})
    a01 = coeff_in(a, {"x": 0, "v": 1})
    return a00.is_zero and a01 == a10 * a10, a00, a10, a01


def lemma5_membership(n, a):
    """Whether p_n(a) lies in (x^k, v^l) with (k, l) chosen by n."""
    k, l = kl_for(n)
    return monomial_ideal_member(TransitionFunction.for_n(n).apply(a), [("x", k), ("v", l)])


def random_a(rng, max_deg=2, max_coeff=2):
    """A random element of Z[x, v, t, xi] of total degree <= max_deg.

    Half of the samples have no (x, v)-free part, so both outcomes of the
    coefficient conditions turn up often.
    """
    drop_free = rng.random() < 0.5
    terms = {}
    for e in _monomials(4, max_deg):
        if e[0] + e[1] == 0 and drop_free:
            continue
        if rng.random() < 0.5:
            terms[e] = rng.randint(-max_coeff, max_coeff)
    return Poly(PLANE, {e: c for e, c in terms.items() if c})


def remark3_nonmembership(n):
    """True iff p_n is not in (x^k, v^l) R[t] (triangular-subgroup triviality fails)."""
    k, l = kl_for(n)
    return not monomial_ideal_member(p_n(n), [("x", k), ("v", l)])


# ---------------------------------------------------------------------------
# linear part: SL_2 factorisation

@dataclass(frozen=True)
class SL2LaurentMatrix:
    entries: tuple  # ((a, b), (c, d)) of Polys over Z[x^+-1, v^+-1]

    def __matmul__(self, other):
        (a, b), (c, d) = self.entries
        (e, f), (g, h) = other.entries
        return SL2LaurentMatrix(((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h)))

    def det(self):
        (a, b), (c, d) = self.entries
        return a * d - b * c

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def min_exponent(self, var):
        return min(p.min_degree(var) for row in self.entries for p in row)


def _mono(ax, bv, c=1):
    return LAURENT_XV.monomial({"x": ax, "v": bv}, c)


def linear_transition_matrix(alpha, beta):
    """g = [[1, 0], [-x^-alpha v^-beta, 1]]."""
    one, zero = _mono(0, 0), LAURENT_XV.zero()
    return SL2LaurentMatrix(((one, zero), (_mono(-alpha, -beta, -1), one)))


def sl2_factor(alpha, beta):
    """Return (tau0, tau1) with g tau0 = tau1, tau0 over K_0 and tau1 over K_1."""
    if alpha < 0 or beta < 0:
        raise ValueError("alpha and beta must be nonnegative")
    zero = LAURENT_XV.zero()
    tau0 = SL2LaurentMatrix(((_mono(0, beta), _mono(alpha, 0, -1)), (_mono(-alpha, 0), zero)))
    tau1 = SL2LaurentMatrix(((_mono(0, beta), _mono(alpha, 0, -1)), (zero, _mono(0, -beta))))
    g = linear_transition_matrix(alpha, beta)
    one = _mono(0, 0)
    if tau0.det() != one or tau1.det() != one:
        raise VerificationError("determinant is not 1")
    if g @ tau0 != tau1:
        raise VerificationError("g tau0 != tau1")
    if tau0.min_exponent("v") < 0 or tau1.min_exponent("x") < 0:
        raise VerificationError("factor not defined over its chart")
    return tau0, tau1


def linear_part_exponents(n):
    """(alpha, beta) with r_1 = -x^(k - alpha) v^(l - beta) for lambda_n."""
    tf = TransitionFunction.for_n(n)
    r1 = tf.coefficients()[1]
    if not r1.is_monomial():
        raise ValueError("r_1 is not a monomial")
    (c, (ex, ev)), = r1.terms
    if c != -1:
        raise ValueError("r_1 does not have coefficient -1")
    return tf.k - ex, tf.l - ev


def sl2_report(alpha, beta):
    tau0, tau1 = sl2_factor(alpha, beta)
    lambda_case = any(linear_part_exponents(n) == (alpha, beta) for n in (1, 2, 3))
    return {"alpha": alpha, "beta": beta, "tau0": tau0, "tau1": tau1,
            "det_ok": True, "product_ok": True, "lambda_case": lambda_case}


# ---------------------------------------------------------------------------
# the explicit second-order trivialisation

def sol_certificate(n):
    from .gallery import make
    k, l = kl_for(n)
    return Certificate(make("a_tilde"), make("b0"), make("b1", n), k, l)


@lru_cache(maxsize=None)
def lambda2_maps():
    """(tau0, tau1, tau1^-1, tau0^-1) over M[t, xi], written out explicitly."""
    R = PLANE_M
    x, v, t, xi = R.gens()
    ix = x.inverse_unit()
    delta = v * t + xi ** 2
    a = v * delta - x * xi
    tau0 = PolyMap.from_images(R, {"t": a, "xi": ix * t - v * ix ** 3 * delta ** 2
                                   + 2 * ix ** 2 * delta * xi})
    tau1 = PolyMap.from_images(R, {"t": a, "xi": v ** -2 * xi})
    tau1_inv = PolyMap.from_images(R, {"t": v ** -2 * t + x * xi - v ** 3 * xi ** 2,
                                       "xi": v ** 2 * xi})
    tau0_inv = PolyMap.from_images(R, {
        "t": (x * xi - v ** 3 * xi ** 2 + 2 * v * ix * t * xi - 2 * v ** 2 * ix ** 3 * t ** 2 * xi
              + 2 * ix ** 4 * t ** 3 - v * ix ** 6 * t ** 4),
        "xi": v ** 2 * xi - ix * t + v * ix ** 3 * t ** 2,
    })
    return tau0, tau1, tau1_inv, tau0_inv


def lambda2_transition():
    """phi_10^(2): xi -> xi - t/(x v^2) + t^2/(x^3 v), the same for every n."""
    return TransitionFunction.for_n(3).approximation(2)


def _require_identity(m, label):
    if not is_identity(m):
        res = [img - m.target.var(v) for v, img in zip(m.source.variables, m.images)]
        raise VerificationError(f"{label} is not the identity", res)


def _linear_part(p):
    """Terms of total degree exactly 1 in (t, xi)."""
    it, ixi = p.ring.index("t"), p.ring.index("xi")
    return Poly(p.ring, {e: c for e, c in p.items() if e[it] + e[ixi] == 1})


def build_lambda2_trivialization():
    """Construct and verify tau_0^(2), tau_1^(2) and their inverses; raise on any failure."""
    tau0, tau1, tau1_inv, tau0_inv = lambda2_maps()
    R = PLANE_M
    x, v, t, xi = R.gens()
    _require_identity(compose(tau1, tau1_inv), "tau1 o tau1^-1")
    _require_identity(compose(tau1_inv, tau1), "tau1^-1 o tau1")
    _require_identity(compose(tau0, tau0_inv), "tau0 o tau0^-1")
    _require_identity(compose(tau0_inv, tau0), "tau0^-1 o tau0")
    phi = lambda2_transition().as_map()
    glued = compose(tau1, tau0_inv)
    if glued != phi:
        raise VerificationError("phi_10^(2) != tau1 o tau0^-1",
                                glued["xi"] - phi["xi"])
    derived = compose(tau1_inv, phi)
    if derived != tau0_inv:
        raise VerificationError("tau0^-1 != tau1^-1 o phi_10^(2)", derived["t"] - tau0_inv["t"])
    for m, ring, label in ((tau0, PLANE_K0, "tau0"), (tau0_inv, PLANE_K0, "tau0^-1"),
                           (tau1, PLANE_K1, "tau1"), (tau1_inv, PLANE_K1, "tau1^-1")):
        if not is_integral(m, ring):
            raise VerificationError(f"{label} is not defined over its chart ring")
        j = plane_jacobian(m, "t", "xi")
        if j != 1:
            raise VerificationError(f"jac({label}) != 1", j - 1)
    cert = sol_certificate(3)
    expect = {"a": v ** 2 * t - x * xi, "b0": x ** 2 * t, "b1": xi}
    for name, lin in expect.items():
        got = _linear_part(getattr(cert, name).to_ring(R))
        if got != lin:
            raise VerificationError(f"linear part of {name}", got - lin)
    if tau0 != cert.tau0() or tau1 != cert.tau1():
        raise VerificationError("tau maps disagree with the (a, b0, b1) certificate")
    return tau0, tau1, tau1_inv, tau0_inv


# ---------------------------------------------------------------------------
# bounded certificate search

SEARCH_CAP = 200_000


def route_split(pa, k, l):
    """Split q(a) = x^k b1 - v^l b0: x^k-divisible terms to b1, the rest to b0."""
    ix, iv = pa.ring.index("x"), pa.ring.index("v")
    b1, b0 = {}, {}
    for e, c in pa.items():
        if e[ix] >= k:
            b1[e[:ix] + (e[ix] - k,) + e[ix + 1:]] = c
        elif e[iv] >= l:
            b0[e[:iv] + (e[iv] - l,) + e[iv + 1:]] = -c
        else:
            return None
    return Poly(pa.ring, b0), Poly(pa.ring, b1)


def _monomials(nvars, max_deg):
    for deg in range(max_deg + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), deg):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            yield tuple(e)


def solve_shift(a, rhs, shift_deg):
    """Find c in Z[x, v, t, xi] of degree <= shift_deg with jac(a, c) = rhs, or None."""
    basis = sorted(_monomials(4, shift_deg), key=lambda e: (sum(e), e))
    basis = [e for e in basis if e[2] or e[3]]  # pure (x, v) monomials have jac 0
    if rhs.is_zero:
        return PLANE.zero()
    if not basis:
        return None
    cols = [jacobian2(a, PLANE.monomial(e), "t", "xi") for e in basis]
    rows = sorted({e for col in cols for e, _ in col.items()} | {e for e, _ in rhs.items()})
    idx = {e: i for i, e in enumerate(rows)}
    A = sympy.zeros(len(rows), len(basis))
    for j, col in enumerate(cols):
        for e, c in col.items():
            A[idx[e], j] = c
    b = sympy.zeros(len(rows), 1)
    for e, c in rhs.items():
        b[idx[e], 0] = c
    try:
        sol, params = A.gauss_jordan_solve(b)
    except ValueError:
        return None
    sol = sol.subs({p: 0 for p in params})
    coeffs = [Fraction(int(s.p), int(s.q)) for s in sol]
    if any(c.denominator != 1 for c in coeffs):
        return None
    return Poly(PLANE, {e: int(c) for e, c in zip(basis, coeffs) if c})


@dataclass
class SearchResult:
    certificates: list
    candidates: int
    survivors: int
    exhausted: bool

    def __iter__(self):
        return iter(self.certificates)

    def __len__(self):
        return len(self.certificates)


def _candidate_space(n, max_deg, normalized):
    """Fixed part plus free monomials of the ansatz for ``a``.

    Monomials free of x and v are left out altogether since a00 = 0 is forced.
    With ``normalized`` the expansion in (t, xi) starts as v^beta t - x^alpha xi
    + O(2), the linear part dictated by the SL_2 factorisation of the linear
    transition function; only terms of order >= 2 in (t, xi) stay free.
    """
    free = [e for e in _monomials(4, max_deg) if e[0] + e[1] >= 1]
    fixed = PLANE.zero()
    if normalized:
        alpha, beta = linear_part_exponents(n)
        fixed = PLANE.monomial({"v": beta, "t": 1}) - PLANE.monomial({"x": alpha, "xi": 1})
        if fixed.total_degree() > max_deg:
            return fixed, None
        free = [e for e in free if e[2] + e[3] >= 2]
    return fixed, free


def search_certificate(n, max_deg, max_coeff, shift_deg, *, normalized=True, cap=SEARCH_CAP):
    """Enumerate ansatz polynomials ``a`` and return every certificate with d = 1 found.

    Nothing returned is a proof of automorphy; an empty result only means the
    bounds were exhausted.
    """
    if min(max_deg, max_coeff, shift_deg) < 0:
        raise ValueError("search bounds must be nonnegative")
    tf = TransitionFunction.for_n(n)
    k, l = tf.k, tf.l
    fixed, free = _candidate_space(n, max_deg, normalized)
    if free is None:
        return SearchResult([], 0, 0, True)
    if (2 * max_coeff + 1) ** len(free) > cap:
        raise SearchBoundsError(f"{2 * max_coeff + 1}^{len(free)} candidates exceed the cap of {cap}")
    found = []
    candidates = survivors = 0
    values = range(-max_coeff, max_coeff + 1)
    for coeffs in itertools.product(values, repeat=len(free)):
        candidates += 1
        a = fixed + Poly(PLANE, {e: c for e, c in zip(free, coeffs) if c})
        if a.is_zero:
            continue
        if not lemma5_conditions(a)[0]:
            continue
        survivors += 1
        split = route_split(tf.apply(a), k, l)
        if split is None:
            continue
        cert = Certificate(a, split[0], split[1], k, l)
        try:
            d = cert_d(cert).to_ring(PLANE)
        except VerificationError:
            continue
        if d != 1:
            c = solve_shift(a, 1 - d, shift_deg)
            if c is None:
                continue
            cert = cert.shifted(c)
        if verify_cocycle(cert, tf) and cert_d(cert) == 1:
            found.append(cert)
    found.sort(key=lambda c: (format_poly(c.a), format_poly(c.b0), format_poly(c.b1)))
    return SearchResult(found, candidates, survivors, not found)


# ---------------------------------------------------------------------------
# certificate files

def format_certificate(cert, comment=None):
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines += [format_ring(PLANE), f"k = {cert.k}", f"l = {cert.l}",
              f"a = {format_poly(cert.a)}", f"b0 = {format_poly(cert.b0)}",
              f"b1 = {format_poly(cert.b1)}"]
    return "\n".join(lines) + "\n"


def parse_certificate(text):
    ring = None
    fields = {}
    for lineno, ln in enumerate(text.splitlines(), 1):
        if not ln.strip() or ln.lstrip().startswith("#"):
            continue
        if ring is None:
            ring = parse_ring(ln, lineno)
            if ring.variables != PLANE.variables:
                raise ParseError(f"certificate ring must be {format_ring(PLANE)}", lineno, 1)
            continue
        if "=" not in ln:
            raise ParseError("expected '<name> = <value>'", lineno, 1)
        name, rhs = ln.split("=", 1)
        name = name.strip()
        col = len(ln.split("=", 1)[0]) + 2
        if name in fields:
            raise ParseError(f"duplicate field {name!r}", lineno, 1)
        if name in ("k", "l"):
            try:
                fields[name] = int(rhs.strip())
            except ValueError:
                raise ParseError(f"{name} must be an integer", lineno, col) from None
        elif name in ("a", "b0", "b1"):
            fields[name] = parse_poly(rhs, ring, lineno, column_offset=col - 1).to_ring(PLANE)
        else:
            raise ParseError(f"unknown field {name!r}", lineno, 1)
    missing = [f for f in ("k", "l", "a", "b0", "b1") if f not in fields]
    if ring is None or missing:
        raise ParseError(f"missing fields {missing or ['ring header']}", 1, 1)
    return Certificate(fields["a"], fields["b0"], fields["b1"], fields["k"], fields["l"])


def check_certificate(cert, n, m=None):
    """Per-condition report for ``cert`` against lambda_n (or its m-th approximation)."""
    tf = TransitionFunction.for_n(n)
    if m is not None:
        tf = tf.approximation(m)
    report = []
    ok = (cert.k, cert.l) == (tf.k, tf.l)
    report.append(("exponents", ok, f"(k,l)=({cert.k},{cert.l}), expected ({tf.k},{tf.l})"))
    res = cocycle_residual(cert, tf) if ok else None
    report.append(("cocycle", ok and res.is_zero, "" if ok and res.is_zero else f"residual {res}"))
    try:
        d = cert_d(cert)
        report.append(("d", d == 1, f"d = {d}"))
        report.append(("prim", verify_prim(cert, tf.q), "jac(b0,b1) = -d q'(a)"))
    except VerificationError as exc:
        report.append(("d", False, str(exc)))
        report.append(("prim", False, "skipped: d undefined"))
    holds, a00, a10, a01 = lemma5_conditions(cert.a)
    report.append(("lemma5", holds, f"a00 = {a00}, a10 = {a10}, a01 = {a01}"))
    return report
