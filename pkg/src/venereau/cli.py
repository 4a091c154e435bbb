"""Command-line driver.

Exit codes: 0 all checks pass, 1 a verification failed, 2 internal error,
64 usage error (bad flags, unreadable input, n out of range).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass
from importlib import resources

from . import bundle, endomap, gallery
from .exactpoly import (
    ParseError, PolyError, eval_at, format_poly, substitute,
)

EXIT_OK, EXIT_FAIL, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


@dataclass
class Entry:
    id: str
    passed: bool
    anchor: str
    residual: object = None

    def as_dict(self):
        d = {"id": self.id, "status": "PASS" if self.passed else "FAIL", "anchor": self.anchor}
        if self.residual is not None:
            d["residual"] = str(self.residual)
        return d


# ---------------------------------------------------------------------------
# verify-all registry

def _nagata_checks():
    alpha, _ = endomap.nagata()
    y, z, u = endomap.NAGATA_RING.gens()
    w = z ** 2 + y * u
    w_alpha = substitute(w, alpha)
    beta = endomap.beta_chain().flatten()
    G = gallery.Gallery()
    want = {"y": endomap.X4_LOC.var("y"), "z": G.make("t").to_ring(endomap.X4_LOC),
            "u": G.make("eta").to_ring(endomap.X4_LOC)}
    beta_res = [beta[v] - want[v] for v in "yzu"]
    beta_inv = endomap.invert_chain(endomap.beta_chain()).flatten()
    return [
        Entry("E-NAGATA-W", w_alpha == w, "w\\circ\\alpha=w", None if w_alpha == w else w_alpha - w),
        Entry("E-FOOTNOTE", endomap.verify_footnote_decomposition(),
              "\\alpha=\\mu\\circ\\delta\\circ\\mu^{-1}"),
        Entry("E-BETA", all(r.is_zero for r in beta_res),
              "\\beta: (y,z,u)\\longmapsto (y,t,\\eta)",
              None if all(r.is_zero for r in beta_res) else beta_res),
        Entry("E-BETA-INV", endomap.is_identity(endomap.compose(beta, beta_inv))
              and endomap.is_integral(beta_inv, endomap.X4_LOC)
              and not endomap.is_integral(beta_inv, endomap.X4),
              "\\beta:=h\\circ\\alpha\\circ g"),
    ]


def _alpha_checks():
    out = []
    for n in (3, 4, 5):
        try:
            fwd, bwd = endomap.build_alpha_n(n)
            G = gallery.Gallery()
            ok = (fwd["y"] == G.make("v", n) and fwd["z"] == G.make("zeta", n)
                  and fwd["u"] == G.make("theta", n))
            out.append(Entry(f"E-ALPHA[n={n}]", ok, "\\alpha_n=(x,v_n,\\zeta^{(n)},\\theta^{(n)})"))
        except PolyError as exc:
            out.append(Entry(f"E-ALPHA[n={n}]", False, "\\alpha_n=(x,v_n,\\zeta^{(n)},\\theta^{(n)})", exc))
    return out


def _bundle_checks():
    out = []
    try:
        bundle.build_lambda2_trivialization()
        out.append(Entry("B-LAMBDA2", True, "\\xi-\\frac{t}{xv^2} +\\frac{t^2}{x^3v}"))
    except bundle.VerificationError as exc:
        out.append(Entry("B-LAMBDA2", False, "\\xi-\\frac{t}{xv^2} +\\frac{t^2}{x^3v}", exc.residual))
    for n in range(1, 6):
        cert = bundle.sol_certificate(n)
        tf = bundle.TransitionFunction.for_n(n).approximation(2)
        res = bundle.cocycle_residual(cert, tf)
        out.append(Entry(f"B-SOL-COCYCLE[n={n}]", res.is_zero, "x^kb_1-v^lb_0=p(a)",
                         None if res.is_zero else res))
        try:
            d = bundle.cert_d(cert)
            out.append(Entry(f"B-SOL-D[n={n}]", d == 1, "{\\operatorname{jac\\,}} (a,b_0)=x^k",
                             None if d == 1 else d))
            out.append(Entry(f"B-SOL-PRIM[n={n}]", bundle.verify_prim(cert, tf.q),
                             "{\\operatorname{jac\\,}} (b_0,b_1)=-p'_t(a)"))
        except bundle.VerificationError as exc:
            out.append(Entry(f"B-SOL-D[n={n}]", False, "{\\operatorname{jac\\,}} (a,b_0)=x^k", exc))
    rng = random.Random(0)
    samples = [bundle.random_a(rng) for _ in range(200)]
    for n in (1, 2, 3):
        bad = [a for a in samples if bundle.lemma5_conditions(a)[0] != bundle.lemma5_membership(n, a)]
        out.append(Entry(f"B-LEMMA5[n={n}]", not bad,
                         "a_{00}=0\\qquad\\mbox{and}\\qquad a_{01}=a_{10}^2", bad[0] if bad else None))
    for n in range(1, 6):
        out.append(Entry(f"B-REMARK3[n={n}]", bundle.remark3_nonmembership(n),
                         "p_n\\notin(x^k,v^l)R[t]"))
    for n in range(1, 6):
        ab = bundle.linear_part_exponents(n)
        out.append(Entry(f"B-LINEAR[n={n}]", ab == (1, 2), "$(\\alpha,\\beta) =(1,2)$"))
    for al in range(4):
        for be in range(4):
            try:
                rep = bundle.sl2_report(al, be)
                tag = " [lambda_n case]" if rep["lambda_case"] else ""
                out.append(Entry(f"B-SL2[{al},{be}]", True, "g\\circ \\tau_0^{(1)}=\\tau_1^{(1)}" + tag))
            except bundle.VerificationError as exc:
                out.append(Entry(f"B-SL2[{al},{be}]", False, "g\\circ \\tau_0^{(1)}=\\tau_1^{(1)}", exc))
    return out


def build_report(gal=None):
    """Run every registered check in the fixed registry order."""
    entries = [Entry(r.id, r.passed, r.anchor, r.residual) for r in gallery.identity_suite(gal)]
    rng = random.Random(0)
    smoke_ok = all(gallery.random_point_check(i, rng) for i in gallery.identities(gal))
    entries.append(Entry("I-RANDOM-POINTS", smoke_ok, "random integer points, seed 0"))
    entries.append(Entry("G-FIBER-FRAME", gallery.fiber_frame_check(1),
                         "{\\mathbb C}[z,u]={\\mathbb C}[z,t]={\\mathbb C}[t,\\zeta^{(1)}]"))
    entries += _nagata_checks()
    entries += _alpha_checks()
    entries += _bundle_checks()
    return entries


def _print_report(entries, as_json, out):
    if as_json:
        json.dump([e.as_dict() for e in entries], out, indent=1)
        out.write("\n")
        return
    for e in entries:
        out.write(f"{e.id} {'PASS' if e.passed else 'FAIL'} {e.anchor}\n")
        if not e.passed and e.residual is not None:
            res = e.residual if isinstance(e.residual, list) else [e.residual]
            for r in res:
                out.write(f"    residual: {r}\n")
    failed = sum(not e.passed for e in entries)
    out.write(f"# {len(entries) - failed} passed, {failed} failed\n")


# ---------------------------------------------------------------------------
# subcommands

def cmd_verify_all(args, out, gal=None):
    entries = build_report(gal)
    _print_report(entries, args.json, out)
    return EXIT_OK if all(e.passed for e in entries) else EXIT_FAIL


def cmd_emit(args, out):
    if args.n < 3:
        raise UsageError("emit-automorphism needs --n >= 3")
    fwd, bwd = endomap.build_alpha_n(args.n)  # re-verifies both composites
    out.write(endomap.format_map(bwd if args.inverse else fwd))
    return EXIT_OK


def _read(path):
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(str(exc)) from None


def cmd_compose(args, out):
    f = endomap.parse_map(_read(args.first))
    g = endomap.parse_map(_read(args.second))
    h = endomap.compose_flat(f, g)
    out.write(endomap.format_map(h))
    ident = endomap.is_identity(h)
    out.write(f"# identity: {'yes' if ident else 'no'}\n")
    return EXIT_OK if ident or not args.expect_identity else EXIT_FAIL


def cmd_check_cert(args, out):
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    cert = bundle.parse_certificate(_read(args.path))
    report = bundle.check_certificate(cert, args.n, args.m)
    for name, ok, detail in report:
        out.write(f"{name} {'PASS' if ok else 'FAIL'} {detail}\n")
    return EXIT_OK if all(ok for _, ok, _ in report) else EXIT_FAIL


def cmd_approx(args, out):
    tf = bundle.TransitionFunction.for_n(args.n)
    if not 1 <= args.m <= tf.q.degree("t"):
        raise UsageError(f"--m must lie in 1..{tf.q.degree('t')}")
    ap = tf.approximation(args.m)
    out.write(f"# phi_10^({args.m}) for n = {args.n}: k = {ap.k}, l = {ap.l}, q = {format_poly(ap.q)}\n")
    out.write(endomap.format_map(ap.as_map()))
    return EXIT_OK


def cmd_search(args, out):
    try:
        res = bundle.search_certificate(args.n, args.max_deg, args.max_coeff, args.shift_deg,
                                        normalized=not args.free_linear_part)
    except bundle.SearchBoundsError as exc:
        raise UsageError(str(exc)) from None
    flags = (f"search-cert --n {args.n} --max-deg {args.max_deg} --max-coeff {args.max_coeff} "
             f"--shift-deg {args.shift_deg}")
    for cert in res:
        out.write(bundle.format_certificate(cert, comment=f"found by {flags}"))
        out.write("\n")
    if res.exhausted:
        out.write(f"# exhausted bounds: no certificate ({res.candidates} candidates, "
                  f"{res.survivors} met the coefficient conditions)\n")
    return EXIT_OK


def cmd_eval(args, out):
    fwd, bwd = endomap.build_alpha_n(3)
    rng = random.Random(args.seed)
    out.write(f"# seed {args.seed}\n")
    try:
        first = tuple(int(c) for c in args.point.split(","))
    except ValueError:
        raise UsageError("--point needs four comma-separated integers") from None
    if len(first) != 4:
        raise UsageError("--point needs four comma-separated integers")
    points = [first]
    points += [tuple(rng.randint(-9, 9) for _ in range(4)) for _ in range(args.count)]
    ok = True
    for pt in points:
        at = dict(zip("xyzu", pt))
        img = tuple(eval_at(p, at) for p in fwd.images)
        back = tuple(eval_at(p, dict(zip("xyzu", img))) for p in bwd.images)
        good = back == tuple(pt)
        ok &= good
        out.write(f"{pt} -> {tuple(int(v) for v in img)} -> {tuple(int(v) for v in back)} "
                  f"{'OK' if good else 'MISMATCH'}\n")
    return EXIT_OK if ok else EXIT_FAIL


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _nonneg(s):
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def make_parser():
    p = _Parser(prog="venereau", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("verify-all", help="run every identity and certificate check")
    s.add_argument("--json", action="store_true")

    s = sub.add_parser("emit-automorphism", help="print alpha_n or its inverse")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--inverse", action="store_true")

    s = sub.add_parser("compose", help="compose two map files (f o g); '-' reads stdin")
    s.add_argument("first")
    s.add_argument("second")
    s.add_argument("--expect-identity", action="store_true")

    s = sub.add_parser("check-cert", help="check a certificate file against lambda_n")
    s.add_argument("path")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, help="check against the m-th approximation instead")

    s = sub.add_parser("approx", help="print the m-th successive approximation")
    s.add_argument("--n", type=_nonneg, required=True)
    s.add_argument("--m", type=_nonneg, required=True)

    s = sub.add_parser("search-cert", help="bounded search for certificates")
    s.add_argument("--n", type=_nonneg, required=True)
    s.add_argument("--max-deg", type=_nonneg, required=True)
    s.add_argument("--max-coeff", type=_nonneg, required=True)
    s.add_argument("--shift-deg", type=_nonneg, required=True)
    s.add_argument("--free-linear-part", action="store_true",
                   help="also enumerate the (t, xi)-linear part of a")

    s = sub.add_parser("eval", help="round-trip alpha_3 at integer points")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--point", default="2,3,5,7")
    s.add_argument("--count", type=_nonneg, default=3, help="extra seeded random points")
    return p


COMMANDS = {
    "verify-all": cmd_verify_all, "emit-automorphism": cmd_emit, "compose": cmd_compose,
    "check-cert": cmd_check_cert, "approx": cmd_approx, "search-cert": cmd_search,
    "eval": cmd_eval,
}


def shipped_certificate(name="sol_n2.cert"):
    """Path to a certificate file bundled with the package."""
    return resources.files("venereau") / "data" / name


def main(argv=None, out=None, gal=None):
    out = out or sys.stdout
    try:
        args = make_parser().parse_args(argv)
    except SystemExit as exc:  # argparse: --help (0) or a usage error (64)
        return exc.code
    try:
        if args.cmd == "verify-all":
            return cmd_verify_all(args, out, gal)
        if args.cmd in ("approx", "search-cert", "check-cert") and args.n < 1:
            raise UsageError("--n must be >= 1")
        return COMMANDS[args.cmd](args, out)
    except (UsageError, ParseError) as exc:
        sys.stderr.write(f"venereau: {exc}\n")
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        sys.stderr.write(f"venereau: internal error: {exc!r}\n")
        return EXIT_INTERNAL


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
