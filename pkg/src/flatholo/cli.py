"""Command-line driver: construct, sweep, verify, calibrate.

Exit codes: 0 ok, 1 usage error, 2 solver failure, 3 failed verification.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import circledyn as cd
from . import config as cfgmod
from . import mwbuild, su2lab, ucover
from .psl2core import ProjMatrix, rotation

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3
SUITES = ("eq5", "fragment", "ucover", "bi", "octagon")

EPILOG = """exit codes:
  0  success
  1  usage error (bad flags or out-of-range parameters)
  2  solver failure (no convergence, calibration failure, all sweep rows failed)
  3  verification failure (some assertion in a verify suite failed)

The seed comes from --config, overridden by the FLATHOLO_SEED environment
variable.  Every output embeds the config and its hash."""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _envelope(cfg, **payload):
    out = {"schema": cfgmod.SCHEMA, "config": cfg.to_dict(), "config_hash": cfg.digest()}
    out.update(payload)
    return out


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True)


# ------------------------------------------------------------------ construct


USAGE_ERRORS = (mwbuild.EpsTooLarge, mwbuild.TargetOutOfRange)


def cmd_construct(args, cfg, out):
    try:
        rep = mwbuild.build(args.chi, args.eps, args.method, grid=cfg.dist_grid)
        bound = mwbuild.genus_bound(args.chi, args.eps, cfg.c0, cfg.K)
    except USAGE_ERRORS as exc:
        raise UsageError(str(exc)) from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    body = rep.to_dict(include_generators=args.generators)
    body["bound"] = bound
    out.write(_dump(_envelope(cfg, command="construct", report=body)) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------- sweep


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def sweep_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(mwbuild.SWEEP_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in mwbuild.SWEEP_COLUMNS])
    return buf.getvalue()


def cmd_sweep(args, cfg, out):
    for e in args.eps:
        if not 0 < e <= mwbuild.MAX_EPS:
            raise UsageError(f"eps={e} outside (0, {mwbuild.MAX_EPS}]")
    for m in args.methods:
        if m not in mwbuild.BUILDERS:
            raise UsageError(f"unknown method {m}")
    rows = mwbuild.sweep(args.chi, args.eps, args.methods, seed=cfg.seed, grid=cfg.dist_grid, c0=cfg.c0, K=cfg.K)
    text = sweep_csv(rows)
    meta = _envelope(cfg, command="sweep", columns=list(mwbuild.SWEEP_COLUMNS), rows=len(rows))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        with open(args.out + ".meta.json", "w") as fh:
            fh.write(_dump(meta) + "\n")
    else:
        out.write(text)
    ok = sum(r["status"] == "ok" for r in rows)
    return EXIT_OK if ok else EXIT_SOLVER


# --------------------------------------------------------------------- verify


def suite_eq5(cfg):
    rng = np.random.default_rng(cfg.seed)
    errs, ratios = [], []
    for _ in range(50):
        lo, L = rng.uniform(0, 1), rng.uniform(0.005, 0.02)
        a = cd.random_supported(rng, lo, lo + L)
        b = cd.random_supported(rng, lo, lo + L)
        h = cd.net_displacer([lo + L / 2], L / 2)
        prod = cd.word_product(cd.eq5_word(a, b, h))
        errs.append(prod.sup_distance(a.commutator(b)))
        eps = max(L, h.displacement())
        ratios.append(max(cd.conjugator_norms(a, b, h, cd.PLCircleHomeo.identity())) / eps)
    return [("eq5 product = [a,b] (50 instances)", max(errs) <= 1e-12),
            ("eq5 conjugators <= 8 eps", max(ratios) <= 8)]


def suite_fragment(cfg):
    rng = np.random.default_rng(cfg.seed)
    cover = [(0.0, 0.4), (0.25, 0.65), (0.5, 0.9), (0.75, 1.15)]
    err, inside = 0.0, True
    for _ in range(50):
        f = cd.random_near_identity(rng, 0.05)
        fs = cd.fragment(f, cover)
        prod = cd.PLCircleHomeo.identity()
        for fk in fs:
            prod = fk @ prod
        err = max(err, prod.sup_distance(f))
        inside &= all(cd.arcs_contain([c], cd.support(fk)) for c, fk in zip(cover, fs))
    return [("fragment recomposition (50 instances)", err <= 1e-12),
            ("fragment supports inside arcs", inside)]


def _random_proj(rng):
    m = rng.normal(size=(2, 2))
    if np.linalg.det(m) < 0:
        m[:, 0] *= -1
    return ProjMatrix.from_array(m / math.sqrt(np.linalg.det(m)))


def suite_ucover(cfg):
    rng = np.random.default_rng(cfg.seed)
    sig_ok, qm_ok = True, True
    for _ in range(2000):
        x, y = _random_proj(rng), _random_proj(rng)
        sig_ok &= ucover.cocycle(x, y) in (0, 1)
        X, Y = ucover.LiftedElement(x, int(rng.integers(-3, 4))), ucover.LiftedElement(y, int(rng.integers(-3, 4)))
        d = ucover.translation_number(X @ Y) - ucover.translation_number(X) - ucover.translation_number(Y)
        qm_ok &= abs(d) <= 1  # sharp: equality occurs for products of hyperbolics
    xs = [ucover.LiftedElement(_random_proj(rng), int(rng.integers(-2, 3))) for _ in range(20)]
    it = ucover.translation_numbers_iterative(xs, cfg.orbit_iterates)
    agree = max(abs(a - ucover.translation_number(x)) for a, x in zip(it, xs)) <= 1e-5
    return [("cocycle in {0,1}", sig_ok), ("quasimorphism defect <= 1", qm_ok),
            ("closed form = orbit average", agree)]


def suite_bi(cfg):
    G = su2lab.bi_generate()
    cen = G.center()
    noncentral = [i for i in range(len(G)) if i not in cen]
    return [("|BI| = 120", len(G) == 120), ("BI perfect", su2lab.is_perfect(G)),
            ("center = {+-1}", sorted(G.elements[i].w for i in cen) == [-1.0, 1.0]),
            ("118 non-central elements normally generate",
             len(noncentral) == 118 and all(su2lab.normally_generates(G.elements[i], G) for i in noncentral))]


def suite_octagon(cfg):
    rep = mwbuild.fuchsian_octagon()
    rot = ucover.SurfaceRep(2, [rotation(0.3 * k) for k in range(4)])
    return [("octagon defect <= 1e-8", ucover.relator_defect(rep) <= cfg.defect_tol),
            ("octagon |euler| = 2", abs(ucover.euler_class(rep)) == 2),
            ("trivial rep euler 0", ucover.euler_class(ucover.SurfaceRep.trivial(2)) == 0),
            ("rotation rep euler 0", ucover.euler_class(rot) == 0)]


SUITE_FUNCS = {"eq5": suite_eq5, "fragment": suite_fragment, "ucover": suite_ucover,
               "bi": suite_bi, "octagon": suite_octagon}


def cmd_verify(args, cfg, out):
    names = SUITES if args.suite == "all" else (args.suite,)
    results = []
    for name in names:
        for label, ok in SUITE_FUNCS[name](cfg):
            results.append((name, label, bool(ok)))
            out.write(f"[{'PASS' if ok else 'FAIL'}] {name}: {label}\n")
    passed = sum(r[2] for r in results)
    out.write(f"passed {passed}/{len(results)} (config {cfg.digest()})\n")
    return EXIT_OK if passed == len(results) else EXIT_VERIFY


# ------------------------------------------------------------------ calibrate


def cmd_calibrate(args, cfg, out):
    try:
        cal = cfgmod.calibrate()
    except cfgmod.CalibrationFailure as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    new = cfg.with_updates(c0=cal.c0, K=cal.K)
    target = args.write or args.config
    if target:
        cfgmod.save_config(new, target)
    out.write(_dump(_envelope(new, command="calibrate", c0=cal.c0, K=cal.K, slope=cal.slope,
                              written_to=target)) + "\n")
    return EXIT_OK


# ----------------------------------------------------------------------- main


def build_parser():
    p = _Parser(prog="flatholo", description="Flat circle-bundle constructions and checks.",
                epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help="JSON config file")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", help="build one representation and print a JSON report")
    c.add_argument("--chi", type=int, required=True)
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--method", type=int, choices=sorted(mwbuild.BUILDERS), default=1)
    c.add_argument("--generators", action="store_true", help="include generator matrices")
    c.set_defaults(func=cmd_construct)

    s = sub.add_parser("sweep", help="CSV table over chi x eps x method")
    s.add_argument("--chi", type=int, nargs="+", required=True)
    s.add_argument("--eps", type=float, nargs="+", required=True)
    s.add_argument("--methods", type=int, nargs="+", default=[1, 2, 3])
    s.add_argument("--out", help="CSV path (metadata goes to <out>.meta.json); stdout if omitted")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("suite", choices=SUITES + ("all",))
    v.set_defaults(func=cmd_verify)

    k = sub.add_parser("calibrate", help="fit c0 and K and write them into the config")
    k.add_argument("--write", help="config path to write (defaults to --config)")
    k.set_defaults(func=cmd_calibrate)
    return p


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        cfg = cfgmod.load_config(args.config)
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        print(f"bad config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, cfg, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (mwbuild.NoConvergence, mwbuild.NotElliptic, ucover.DefectTooLarge, ucover.NonIntegral,
            cd.DisplacementTooLarge, su2lab.NoConvergence) as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
