"""Polynomial maps, elementary moves and chains with constructive inverses.

A :class:`PolyMap` is read as a point map: ``m(p) = (m[v1](p), ..., m[vn](p))``.
Its images are polynomials in the *target* ring, one per variable of the
*source* ring, so ``substitute(f, m)`` is ``f o m`` and ``compose(f, g)`` is the
point map ``f o g`` (apply ``g`` first).  For the endomorphisms used here
source and target carry the same variable names.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exactpoly import (
    IntegralityError, ParseError, Poly, PolyError, RingMismatchError, RingSpec,
    format_poly, format_ring, parse_poly, parse_ring, substitute, jacobian2,
)

X4 = RingSpec.of("x y z u")
X4_LOC = RingSpec.of("x y z u", laurent="x")
NAGATA_RING = RingSpec.of("y z u")
NAGATA_RING_LOC = RingSpec.of("y z u", laurent="y")
FOOTNOTE_RING = RingSpec.of("y z1 u1")


class MapError(PolyError):
    pass


@dataclass(frozen=True)
class PolyMap:
    source: RingSpec
    target: RingSpec
    images: tuple

    def __post_init__(self):
        if len(self.images) != self.source.nvars:
            raise MapError(f"expected {self.source.nvars} images, got {len(self.images)}")
        for img in self.images:
            if not isinstance(img, Poly) or img.ring != self.target:
                raise RingMismatchError("every image must be a Poly of the target ring")

    @classmethod
    def from_images(cls, ring, images, target=None):
        """Build from ``{var: poly-or-int}``; missing variables map to themselves."""
        target = target or ring
        imgs = []
        for v in ring.variables:
            img = images.get(v)
            if img is None:
                img = target.var(v)
            elif isinstance(img, int):
                img = target.const(img)
            elif img.ring != target:
                img = img.to_ring(target)
            imgs.append(img)
        extra = set(images) - set(ring.variables)
        if extra:
            raise MapError(f"images given for unknown variables {sorted(extra)}")
        return cls(ring, target, tuple(imgs))

    @classmethod
    def identity(cls, ring):
        return cls(ring, ring, ring.gens())

    def image_of(self, name):
        return self.images[self.source.index(name)]

    def __getitem__(self, name):
        return self.image_of(name)

    def over(self, ring):
        """The same map with both rings replaced by ``ring`` (integrality is checked)."""
        return PolyMap(ring, ring, tuple(img.to_ring(ring) for img in self.images))

    def __str__(self):
        return format_map(self)


def compose(f, g):
    """Point-map composite ``f o g``: images are ``f``'s images with ``g`` substituted."""
    if f.target.variables != g.source.variables:
        raise RingMismatchError(
            f"cannot compose: {f.target.variables} vs {g.source.variables}")
    return PolyMap(f.source, g.target, tuple(substitute(img, g) for img in f.images))


def compose_all(*maps):
    out = maps[-1]
    for m in reversed(maps[:-1]):
        out = compose(m, out)
    return out


def is_identity(m):
    if m.source.variables != m.target.variables:
        return False
    return all(img == m.target.var(v) for v, img in zip(m.source.variables, m.images))


def is_integral(m, subring):
    """True iff every image is a valid polynomial of ``subring``."""
    if subring.variables != m.target.variables:
        raise RingMismatchError("subring must have the target's variables")
    return all(subring.permits(e) for img in m.images for e, _ in img.items())


def plane_jacobian(m, var1, var2):
    """Jacobian determinant of the two images of ``var1, var2`` in those variables."""
    return jacobian2(m[var1], m[var2], var1, var2)


# ---------------------------------------------------------------------------
# elementary moves

@dataclass(frozen=True)
class Triangular:
    """``var -> var + shift`` with ``shift`` free of ``var``."""

    ring: RingSpec
    var: str
    shift: Poly

    def __post_init__(self):
        if self.shift.ring != self.ring:
            raise RingMismatchError("shift must live in the move's ring")
        if self.shift.involves(self.var):
            raise MapError(f"triangular shift must not involve {self.var!r}")

    def as_map(self):
        return PolyMap.from_images(self.ring, {self.var: self.ring.var(self.var) + self.shift})

    def inverse(self):
        return Triangular(self.ring, self.var, -self.shift)


@dataclass(frozen=True)
class Scale:
    """``var -> unit * var`` with a monomial unit free of ``var``."""

    ring: RingSpec
    var: str
    unit: Poly

    def __post_init__(self):
        if not self.unit.is_unit():
            raise MapError(f"{self.unit} is not a monomial unit of {format_ring(self.ring)}")
        if self.unit.involves(self.var):
            raise MapError(f"scaling unit must not involve {self.var!r}")

    def as_map(self):
        return PolyMap.from_images(self.ring, {self.var: self.unit * self.ring.var(self.var)})

    def inverse(self):
        return Scale(self.ring, self.var, self.unit.inverse_unit())


@dataclass(frozen=True)
class Permute:
    """Image of the i-th variable is the variable named ``order[i]``."""

    ring: RingSpec
    order: tuple

    def __post_init__(self):
        if sorted(self.order) != sorted(self.ring.variables):
            raise MapError(f"{self.order} is not a permutation of {self.ring.variables}")

    def as_map(self):
        return PolyMap(self.ring, self.ring, tuple(self.ring.var(v) for v in self.order))

    def inverse(self):
        inv = [None] * self.ring.nvars
        for i, v in enumerate(self.order):
            inv[self.ring.index(v)] = self.ring.variables[i]
        return Permute(self.ring, tuple(inv))


@dataclass(frozen=True)
class Explicit:
    """A map shipped with its two-sided inverse; checked on construction."""

    forward: PolyMap
    backward: PolyMap

    def __post_init__(self):
        if not (is_identity(compose(self.forward, self.backward))
                and is_identity(compose(self.backward, self.forward))):
            raise MapError("explicit move: supplied inverse is not two-sided")

    @property
    def ring(self):
        return self.forward.source

    def as_map(self):
        return self.forward

    def inverse(self):
        return Explicit(self.backward, self.forward)


def scale_moves(ring, units):
    return [Scale(ring, v, u) for v, u in units.items()]


@dataclass(frozen=True)
class Chain:
    """Moves applied left to right: the chain's map is ``m_k o ... o m_1``."""

    ring: RingSpec
    moves: tuple

    def __post_init__(self):
        for m in self.moves:
            if m.ring != self.ring:
                raise RingMismatchError("all moves of a chain share one ring")

    def flatten(self):
        out = PolyMap.identity(self.ring)
        for m in self.moves:
            out = compose(m.as_map(), out)
        return out

    def __add__(self, other):
        return Chain(self.ring, self.moves + other.moves)


def invert_chain(c):
    return Chain(c.ring, tuple(m.inverse() for m in reversed(c.moves)))


def compose_through(f, chain):
    """``f o flatten(chain)``, substituting one move at a time.

    Same exact result as ``compose(f, chain.flatten())`` by associativity, but
    the intermediate maps stay small when ``f`` undoes the chain.
    """
    for m in reversed(chain.moves):
        f = compose(f, m.as_map())
    return f


def compose_flat(f, g):
    """Direct ``compose(f, g)`` through FLINT's multivariate composition.

    Only for polynomial (non-Laurent) images; anything else falls back to
    :func:`compose`.
    """
    if f.target.variables != g.source.variables:
        raise RingMismatchError(f"cannot compose: {f.target.variables} vs {g.source.variables}")
    if any(min(e) < 0 for m in (f, g) for img in m.images for e, _ in img.items()):
        return compose(f, g)
    import flint

    def ctx_for(ring):
        return flint.fmpz_mpoly_ctx.get(ring.variables, "deglex")

    gctx = ctx_for(g.target)
    gimgs = [gctx.from_dict(dict(img.items())) for img in g.images]
    fctx = ctx_for(f.target)
    out = []
    for img in f.images:
        r = fctx.from_dict(dict(img.items())).compose(*gimgs, ctx=gctx)
        out.append(Poly(g.target, {tuple(e): int(c) for e, c in r.to_dict().items()}))
    return PolyMap(f.source, g.target, tuple(out))


# ---------------------------------------------------------------------------
# the maps themselves

def nagata_chain():
    """Nagata's automorphism as ``mu o delta3 o delta2 o delta1 o mu^-1`` over Z[y^+-1, z, u].

    Scaling z, u by y is the birational ``mu``; it becomes a unit move once
    y is inverted, and the composite turns out to be integral over Z[y, z, u].
    """
    R = NAGATA_RING_LOC
    y, z, u = R.gens()
    yinv = y.inverse_unit()
    return Chain(R, (
        Scale(R, "z", yinv), Scale(R, "u", yinv),
        Triangular(R, "u", z ** 2),             # w1 = u1 + z1^2
        Triangular(R, "z", y ** 2 * u),         # t1 = z1 + y^2 w1
        Triangular(R, "u", -z ** 2),            # eta1 = w1 - t1^2
        Scale(R, "z", y), Scale(R, "u", y),
    ))


def nagata():
    """Return ``(alpha, alpha^-1)`` over Z[y, z, u]."""
    c = nagata_chain()
    fwd = c.flatten()
    bwd = invert_chain(c).flatten()
    if not (is_integral(fwd, NAGATA_RING) and is_integral(bwd, NAGATA_RING)):
        raise MapError("Nagata chain is not integral over Z[y, z, u]")
    return fwd.over(NAGATA_RING), bwd.over(NAGATA_RING)


def footnote_maps():
    """``(mu, delta1, delta2, delta3)`` on (y, z1, u1)."""
    R = FOOTNOTE_RING
    y, z1, u1 = R.gens()
    mu = PolyMap.from_images(R, {"z1": y * z1, "u1": y * u1})
    d1 = Triangular(R, "u1", z1 ** 2).as_map()
    d2 = Triangular(R, "z1", y ** 2 * u1).as_map()
    d3 = Triangular(R, "u1", -z1 ** 2).as_map()
    return mu, d1, d2, d3


def verify_footnote_decomposition(delta2=None):
    """Check ``alpha o mu == mu o delta3 o delta2 o delta1`` as maps on (y, z1, u1)."""
    mu, d1, d2, d3 = footnote_maps()
    if delta2 is not None:
        d2 = delta2
    alpha, _ = nagata()
    renamed = PolyMap(FOOTNOTE_RING, FOOTNOTE_RING,
                      tuple(substitute(img, dict(zip("yzu", FOOTNOTE_RING.gens())))
                            for img in alpha.images))
    return compose(renamed, mu) == compose_all(mu, d3, d2, d1)


def _lift_nagata(ring):
    """Nagata's map and its inverse acting on (y, z, u) of a ring that also holds x."""
    alpha, alpha_inv = nagata()
    emb = {v: ring.var(v) for v in "yzu"}
    fwd = PolyMap.from_images(ring, {v: substitute(img, emb) for v, img in zip("yzu", alpha.images)})
    bwd = PolyMap.from_images(ring, {v: substitute(img, emb) for v, img in zip("yzu", alpha_inv.images)})
    return Explicit(fwd, bwd)


def beta_chain():
    """``beta = h o alpha o g`` over Z[x^+-1][y, z, u]; flattens to (y, t, eta)."""
    R = X4_LOC
    x = R.var("x")
    g = scale_moves(R, {"y": x ** -2, "z": x, "u": x ** 4})
    h = scale_moves(R, {"y": x ** 2, "u": x ** -2})
    return Chain(R, tuple(g) + (_lift_nagata(R),) + tuple(h))


def gamma_move(n):
    """``gamma_n : (y, z, u) -> (y + x^n z, z, u)``."""
    R = X4_LOC
    return Triangular(R, "y", R.var("x") ** n * R.var("z"))


def _tau0_pair(ring, v="y", t="z", xi="u"):
    """tau_0^(2) and its inverse acting on slots (t, xi) with ``v`` as parameter."""
    from .bundle import lambda2_maps
    tau0, _, _, tau0_inv = lambda2_maps()
    emb = {"x": ring.var("x"), "v": ring.var(v), "t": ring.var(t), "xi": ring.var(xi)}
    fwd = PolyMap.from_images(ring, {t: substitute(tau0["t"], emb), xi: substitute(tau0["xi"], emb)})
    bwd = PolyMap.from_images(ring, {t: substitute(tau0_inv["t"], emb),
                                     xi: substitute(tau0_inv["xi"], emb)})
    return Explicit(fwd, bwd)


def alpha_n_chain(n):
    """Chain for ``alpha_n`` over Z[x^+-1][y, z, u] (x passes through unchanged).

    Steps: chart map gamma_n o beta to (v_n, t, eta), rescale the last slot to
    xi_0 = eta / x^3, apply (tau_0^(2))^-1 in the (t, xi) slots, swap them.
    """
    if n < 3:
        raise ValueError("alpha_n is only available for n >= 3")
    R = X4_LOC
    x = R.var("x")
    return beta_chain() + Chain(R, (
        gamma_move(n),
        Scale(R, "u", x ** -3),
        _tau0_pair(R).inverse(),
        Permute(R, ("x", "y", "u", "z")),
    ))


def build_alpha_n(n):
    """Return ``(alpha_n, alpha_n^-1)`` as maps of Z[x, y, z, u].

    The inverse comes from the inverted chain; both composites are checked to
    be the identity and both maps to be integral before returning.
    """
    if not isinstance(n, int) or n < 3:
        raise ValueError(f"alpha_n needs an integer n >= 3, got {n!r}")
    c = alpha_n_chain(n)
    inv = invert_chain(c)
    fwd = c.flatten()
    bwd = inv.flatten()
    for m, name in ((fwd, "alpha_n"), (bwd, "alpha_n^-1")):
        if not is_integral(m, X4):
            raise IntegralityError(f"{name} is not integral over Z[x]")
    if not (is_identity(compose_through(fwd, inv)) and is_identity(compose_through(bwd, c))):
        raise MapError(f"alpha_{n} composites are not the identity")
    return fwd.over(X4), bwd.over(X4)


# ---------------------------------------------------------------------------
# text format for maps

def format_map(m):
    lines = [format_ring(m.target)]
    if m.source != m.target:
        lines.append("source " + format_ring(m.source))
    for v, img in zip(m.source.variables, m.images):
        lines.append(f"{v} -> {format_poly(img)}")
    return "\n".join(lines) + "\n"


def parse_map(text):
    lines = [(i + 1, ln) for i, ln in enumerate(text.splitlines())
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError("empty map file", 1, 1)
    lineno, header = lines[0]
    target = parse_ring(header, lineno)
    source = target
    body = lines[1:]
    if body and body[0][1].startswith("source "):
        lineno, ln = body[0]
        source = parse_ring(ln[len("source "):], lineno)
        body = body[1:]
    images = {}
    for lineno, ln in body:
        if "->" not in ln:
            raise ParseError("expected '<var> -> <polynomial>'", lineno, 1)
        lhs, rhs = ln.split("->", 1)
        name = lhs.strip()
        if name not in source.variables:
            raise ParseError(f"unknown variable {name!r}", lineno, 1)
        if name in images:
            raise ParseError(f"duplicate image for {name!r}", lineno, 1)
        images[name] = parse_poly(rhs, target, lineno, column_offset=len(lhs) + 2)
    missing = [v for v in source.variables if v not in images]
    if missing:
        raise ParseError(f"missing images for {missing}", lineno, 1)
    return PolyMap(source, target, tuple(images[v] for v in source.variables))
