"""Named polynomials of the Venereau construction and the identity suite.

All ambient symbols live in Z[x, y, z, u]; ``p`` lives in R[t] = Z[x, v, t];
the plane symbols (``delta_chart``, ``a_tilde``, ``b0``, ``b1``) live in
R[t, xi] = Z[x, v, t, xi].  Identities whose displayed form divides by x or
v_n are stated with the denominator multiplied out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .exactpoly import Poly, RingSpec, eval_at, exact_div, substitute
from .endomap import Chain, Permute, Scale, Triangular, X4, invert_chain, is_identity, compose

R_T = RingSpec.of("x v t")
PLANE = RingSpec.of("x v t xi")
FIBER = RingSpec.of("c2 z u", laurent="c2")

SYMBOLS = ("w", "t", "s", "eta", "v", "p", "zeta", "theta", "zeta_prime",
           "zeta_second", "zeta_third", "delta_chart", "a_tilde", "b0", "b1")
_NEEDS_N = {"v", "p", "zeta", "theta", "zeta_prime", "b1"}


class Gallery:
    """Symbol constructors; ``overrides`` replaces named leaves before anything is derived.

    Overriding e.g. ``w`` propagates into t, s, eta, ... so a corrupted
    constant shows up in every identity that genuinely depends on it.
    """

    def __init__(self, overrides=None):
        self.overrides = dict(overrides or {})
        self._cache = {}

    def make(self, symbol, n=None):
        if symbol not in SYMBOLS:
            raise ValueError(f"unknown symbol {symbol!r}")
        if symbol in _NEEDS_N:
            if not isinstance(n, int) or n < 1:
                raise ValueError(f"symbol {symbol!r} needs an integer n >= 1, got {n!r}")
        elif n is not None and symbol not in ("zeta_second", "zeta_third"):
            n = None
        key = (symbol, n)
        if key not in self._cache:
            if symbol in self.overrides:
                val = self.overrides[symbol]
                self._cache[key] = val(n) if callable(val) else val
            else:
                self._cache[key] = getattr(self, "_" + symbol)(n)
        return self._cache[key]

    # ambient gens
    @property
    def gens(self):
        return X4.gens()

    def _w(self, n):
        x, y, z, u = self.gens
        return z ** 2 + y * u

    def _t(self, n):
        x, y, z, u = self.gens
        return x * z + y * self.make("w")

    def _s(self, n):
        x, y, z, u = self.gens
        w = self.make("w")
        return -(2 * x * z + y * w) * w

    def _eta(self, n):
        x, y, z, u = self.gens
        return self.make("s") + x ** 2 * u

    def _v(self, n):
        x, y, z, u = self.gens
        return y + x ** n * self.make("t")

    def _p(self, n):
        x, v, t = R_T.gens()
        if n >= 3:
            return v * t ** 2 - x ** 2 * t
        if n == 2:
            return x ** 2 * t ** 3 + v * t ** 2 - x ** 2 * t
        return x ** 2 * t ** 4 + x * v * t ** 3 + v ** 2 * t ** 2 - x ** 2 * v * t

    def p_ambient(self, n):
        """p_n with v -> v_n and t -> t(x, y, z, u)."""
        return substitute(self.make("p", n), {"x": X4.var("x"), "v": self.make("v", n),
                                               "t": self.make("t")})

    def _zeta(self, n):
        x, y, z, u = self.gens
        w, t, s, eta = (self.make(k) for k in ("w", "t", "s", "eta"))
        v = self.make("v", n)
        if n == 1:
            return -v * z + v * t * (v * u + z ** 2 + w) + t ** 2 * (x * z ** 2 + s * t)
        if n == 2:
            return -z + x * t * (v * u + z ** 2 + s * t + w)
        return -z + x ** (n - 3) * t * (v * eta + x ** 2 * w)

    def _theta(self, n):
        if n < 3:
            raise ValueError("theta^(n) needs n >= 3")
        x, y, z, u = self.gens
        w, t, eta = self.make("w"), self.make("t"), self.make("eta")
        zeta = self.make("zeta", n)
        return u - x ** (n - 3) * t * (x * w ** 2 + eta * (zeta - z + x ** (n - 1) * t * w))

    def _zeta_prime(self, n):
        """Closed form of zeta' (n = 1: over x; n >= 2: over x^2)."""
        x, y, z, u = self.gens
        s, t = self.make("s"), self.make("t")
        v = self.make("v", n)
        if n == 1:
            return x * (v * u + z ** 2) + s * t
        return z ** 2 + v * u + x ** (n - 2) * s * t

    def _zeta_second(self, n):
        x, y, z, u = self.gens
        s, t = self.make("s"), self.make("t")
        v = self.make("v", 1)
        return v * (v * u + z ** 2) + x * z ** 2 * t + s * t ** 2

    def _zeta_third(self, n):
        x, y, z, u = self.gens
        s, t, w = self.make("s"), self.make("t"), self.make("w")
        v = self.make("v", 1)
        return -x * z + x * t * w + x * t * v * u + x * z ** 2 * t + s * t ** 2

    def _delta_chart(self, n):
        x, v, t, xi = PLANE.gens()
        return v * t + xi ** 2

    def _a_tilde(self, n):
        x, v, t, xi = PLANE.gens()
        return v * self.make("delta_chart") - x * xi

    def _b0(self, n):
        x, v, t, xi = PLANE.gens()
        d = self.make("delta_chart")
        return x ** 2 * t - v * d ** 2 + 2 * x * d * xi

    def _b1(self, n):
        x, v, t, xi = PLANE.gens()
        return v * xi if n == 1 else xi


_DEFAULT = Gallery()


def make(symbol, n=None):
    return _DEFAULT.make(symbol, n)


@dataclass(frozen=True)
class NamedIdentity:
    id: str
    lhs: Poly
    rhs: Poly
    anchor: str

    @property
    def residual(self):
        return self.lhs - self.rhs

    @property
    def passed(self):
        return self.residual.is_zero


@dataclass
class SuiteResult:
    id: str
    passed: bool
    anchor: str
    residual: Poly | None = None
    extra: dict = field(default_factory=dict)


def identities(gallery=None):
    """All named identities, in a fixed order."""
    G = gallery or Gallery()
    x, y, z, u = X4.gens()
    w, t, s, eta = (G.make(k) for k in ("w", "t", "s", "eta"))
    out = [NamedIdentity("I-REL1", y * s + t ** 2, x ** 2 * z ** 2, "ys+t^2=x^2z^2")]
    for n in range(1, 6):
        v = G.make("v", n)
        out.append(NamedIdentity(
            f"I-REL2[n={n}]", v * eta + t ** 2, x ** 2 * (z ** 2 + v * u) + x ** n * s * t,
            "v_n\\eta+t^2=x^2(z^2+v_nu)+x^nst"))
    # n = 1
    v1 = G.make("v", 1)
    zp, zpp, zppp = G.make("zeta_prime", 1), G.make("zeta_second"), G.make("zeta_third")
    z1 = G.make("zeta", 1)
    out += [
        NamedIdentity("I-Z1a", x * zp, v1 * eta + t ** 2, "\\zeta':=\\frac{v_1\\eta+t^2}{x}"),
        NamedIdentity("I-Z1b", x * zpp, v1 * zp + t ** 3, "\\frac{v_1\\zeta'+t^3}{x}"),
        NamedIdentity("I-Z1b'", zpp, y * w + x * t * w + x * t * v1 * u + x * z ** 2 * t + s * t ** 2,
                      "=yw+xtw+xtv_1u+xz^2t+st^2"),
        NamedIdentity("I-Z1c", zppp, zpp - t, "\\zeta''':=\\zeta''-t"),
        NamedIdentity("I-Z1d", x * z1, v1 * zppp + t ** 4, "\\frac{v_1\\zeta'''+t^4}{x}"),
        NamedIdentity("I-Z1d'", x ** 3 * z1, v1 ** 3 * eta + G.p_ambient(1),
                      "\\frac{v_1^3\\eta+p_1(t)}{x^3}"),
        NamedIdentity("I-Z1e", z1, exact_div(v1 * zppp + t ** 4, x),
                      "-v_1z+v_1t(v_1u+z^2+w)+t^2(xz^2+st)"),
    ]
    # n = 2
    v2 = G.make("v", 2)
    zp2, z2 = G.make("zeta_prime", 2), G.make("zeta", 2)
    out += [
        NamedIdentity("I-Z2a", x ** 2 * zp2, v2 * eta + t ** 2, "\\frac{v_2\\eta+t^2}{x^2}=z^2+uv_2+st"),
        NamedIdentity("I-Z2b", x * z2, v2 * zp2 + t ** 3 - t, "\\frac{v_2\\zeta'+t^3-t}{x}"),
        NamedIdentity("I-Z2b'", x ** 3 * z2, v2 ** 2 * eta + G.p_ambient(2),
                      "\\frac{v_2^2\\eta+p_2(t)}{x^3}"),
    ]
    for n in (3, 4, 5):
        vn, zpn, zn = G.make("v", n), G.make("zeta_prime", n), G.make("zeta", n)
        out += [
            NamedIdentity(f"I-ZNa[n={n}]", x ** 2 * zpn, vn * eta + t ** 2, "z^2+v_nu+x^{n-2}st"),
            NamedIdentity(f"I-ZNb[n={n}]", x * zn, vn * zpn - t, "\\frac{v_n\\zeta'-t}{x}"),
            NamedIdentity(f"I-ZNb'[n={n}]", x ** 3 * zn, vn ** 2 * eta + G.p_ambient(n),
                          "\\frac{v_n^2\\eta+p_n(t)}{x^3}"),
        ]
    for n in range(1, 6):
        out.append(NamedIdentity(
            f"I-VEN[n={n}]", y + x ** n * (x * z + y * w),
            x ** n * y ** 2 * u + y + x ** (n + 1) * z + x ** n * y * z ** 2,
            "x^ny^2u+y+x^{n+1}z+x^nyz^2"))
    for n in (3, 4, 5):
        vn, zn, th = G.make("v", n), G.make("zeta", n), G.make("theta", n)
        out.append(NamedIdentity(f"I-THETA[n={n}]", vn ** 2 * th, t + x * zn - vn * zn ** 2,
                                 "u-x^{n-3}t\\left(xw^2+"))
        # the same coordinate read off the other chart, tau_0^-1 applied to (t, eta/x^3)
        psi0 = _chart0_trivialization(G, n)
        out.append(NamedIdentity(f"I-THETA-U0[n={n}]", psi0[0], th.to_ring(psi0[0].ring),
                                 "\\psi|U_i:=\\tau_i^{-1} \\varphi_i"))
        out.append(NamedIdentity(f"I-ZETA-U0[n={n}]", psi0[1], zn.to_ring(psi0[1].ring),
                                 "\\psi|U_i:=\\tau_i^{-1} \\varphi_i"))
    out += _fiber_identities(G)
    return out


def _chart0_trivialization(G, n):
    from .bundle import lambda2_maps
    from .endomap import X4_LOC
    _, _, _, tau0_inv = lambda2_maps()
    x = X4_LOC.var("x")
    eta = G.make("eta").to_ring(X4_LOC)
    emb = {"x": x, "v": G.make("v", n).to_ring(X4_LOC), "t": G.make("t").to_ring(X4_LOC),
           "xi": eta * x ** -3}
    return substitute(tau0_inv["t"], emb), substitute(tau0_inv["xi"], emb)


def _specialize(p):
    """x -> 0, y -> c2 into Z[c2^+-1, z, u]."""
    c2, z, u = FIBER.gens()
    return substitute(p, {"x": FIBER.zero(), "y": c2, "z": z, "u": u}, target=FIBER)


def _fiber_identities(G):
    c2, z, u = FIBER.gens()
    w, t, eta = (_specialize(G.make(k)) for k in ("w", "t", "eta"))
    z1 = _specialize(G.make("zeta", 1))
    anchor = "-c_2z+2t^2-c_2^{-1}t^5"
    return [
        NamedIdentity("I-FIB1a", c2 * w, t, "w=c_2^{-1}t=c_2u+z^2"),
        NamedIdentity("I-FIB1b", w, c2 * u + z ** 2, "w=c_2^{-1}t=c_2u+z^2"),
        NamedIdentity("I-FIB1c", c2 * eta, -t ** 2, "\\eta=s=-c_2^{-1}t^2"),
        NamedIdentity("I-FIB1d", c2 * z1, -c2 ** 2 * z + 2 * c2 * t ** 2 - t ** 5, anchor),
        NamedIdentity("I-FIB1e", z1, -c2 * z + 2 * t ** 2 - c2 ** -1 * t ** 5, anchor),
    ]


def identity_suite(gallery=None):
    """Evaluate every identity; failures are reported with their residual, never raised."""
    results = []
    for ident in identities(gallery):
        r = ident.residual
        results.append(SuiteResult(ident.id, r.is_zero, ident.anchor, None if r.is_zero else r))
    return results


def random_point_check(ident, rng, points=10, bound=50):
    """Evaluate lhs - rhs at random nonzero integer points; all values must be 0."""
    ring = ident.lhs.ring
    r = ident.residual
    for _ in range(points):
        pt = {v: rng.choice([k for k in range(-bound, bound + 1) if k]) for v in ring.variables}
        if eval_at(r, pt) != 0:
            return False
    return True


def fiber_frame_chain():
    """(z, u) -> (t, zeta^(1)) at x = 0, y = c2 as elementary moves over Z[c2^+-1]."""
    R = FIBER
    c2, z, u = R.gens()
    return Chain(R, (
        Scale(R, "u", c2 ** 2),                          # c2^2 u
        Triangular(R, "u", c2 * z ** 2),                 # t = c2 (c2 u + z^2)
        Scale(R, "z", -c2),
        Triangular(R, "z", 2 * u ** 2 - c2 ** -1 * u ** 5),  # zeta = -c2 z + 2t^2 - t^5/c2
        Permute(R, ("c2", "u", "z")),
    ))


def fiber_frame_check(n=1):
    """Certify that (t, zeta^(1)) are coordinates on the fiber over (0, c2), c2 != 0."""
    if n != 1:
        raise ValueError("the fiber frame check is stated for n = 1")
    c = fiber_frame_chain()
    fwd = c.flatten()
    t = _specialize(make("t"))
    z1 = _specialize(make("zeta", 1))
    if fwd["z"] != t or fwd["u"] != z1:
        return False
    bwd = invert_chain(c).flatten()
    return is_identity(compose(fwd, bwd)) and is_identity(compose(bwd, fwd))
