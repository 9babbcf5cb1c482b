"""Command-line entry point: ``chebpade <command> [options]``.

Exit codes: 0 ok, 1 acceptance failure or other package error, 2 geometry
error, 3 solver error, 4 precision schedule exhausted.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np
import scipy

from . import __version__
from .errors import ChebPadeError, GeometryError, PrecisionError, SolverError

EXIT_CODES = {GeometryError: 2, SolverError: 3, PrecisionError: 4}
DEFAULT_DIGITS = 50


def _c(x):
    x = complex(x)
    return [x.real, x.imag]


def parse_triple(text: str, digits: int):
    """'x1,y1;x2,y2;x3,y3' (decimal strings read exactly at high precision) or 'equilateral'."""
    from .mpnum import PrecisionCtx
    from .verify import equilateral

    ctx = PrecisionCtx(max(4 * digits, 200))
    if text.strip() == "equilateral":
        return equilateral(ctx)
    mp = ctx.mp
    pts = []
    for part in text.split(";"):
        xy = [s.strip() for s in part.split(",")]
        if len(xy) != 2:
            raise argparse.ArgumentTypeError(f"bad point {part!r}; expected x,y")
        pts.append(mp.mpc(mp.mpf(xy[0]), mp.mpf(xy[1])))
    if len(pts) != 3:
        raise argparse.ArgumentTypeError("exactly three points are required")
    return tuple(pts)


def parse_range(text: str):
    lo, sep, hi = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError("expected a..b")
    lo, hi = int(lo), int(hi)
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError("need 1 <= a <= b")
    return range(lo, hi + 1)


def versions() -> dict:
    return {
        "chebpade": __version__,
        "mpmath": mpmath.__version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def _dump(path: Path, payload: dict, args) -> None:
    payload = {"config": config_echo(args), "versions": versions(), **payload}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def config_echo(args) -> dict:
    keys = ("command", "triple", "density", "digits", "n", "n_range", "kappa", "seed", "weights", "gamma", "N")
    out = {}
    for k in keys:
        v = getattr(args, k, None)
        if isinstance(v, range):
            v = [v.start, v.stop - 1]
        if v is not None:
            out[k] = v
    return out


def _orders(args):
    if args.n_range is not None:
        return list(args.n_range)
    return [args.n if args.n is not None else 5]


def _setup(args):
    from .chebotarev import chebotarev
    from .mpnum import PrecisionCtx
    from .szego import Density

    ctx = PrecisionCtx(args.digits)
    data = chebotarev(parse_triple(args.triple, args.digits), ctx)
    dens = Density.parse(args.density)
    return ctx, data, dens


# ---------------------------------------------------------------- commands

def cmd_chebotarev(args, out: Path) -> int:
    from .chebotarev import write_arcs_csv
    from .surface import surface_for

    ctx, data, _ = _setup(args)
    P = surface_for(data).periods
    payload = data.to_json()
    payload["periods"] = P.to_json()
    _dump(out / "chebotarev.json", {"chebotarev": payload}, args)
    write_arcs_csv(data, out / "arcs.csv")
    print("center", _c(data.a0))
    print("weights", " ".join(mpmath.nstr(w, 12) for w in data.raw_weights))
    print("capacity", mpmath.nstr(data.capacity, 15))
    return 0


def cmd_trace(args, out: Path) -> int:
    from .chebotarev import write_arcs_csv

    _, data, _ = _setup(args)
    write_arcs_csv(data, out / "arcs.csv")
    rows = []
    for arc in data.arcs:
        rows.append({
            "arc": data.labels[arc.index - 1] + 1,
            "samples": len(arc.samples),
            "trajectory_residual": arc.trajectory_residual(complex(data.a0), [complex(a) for a in data.anchors]),
            "splice_gap": arc.splice_gap,
        })
    _dump(out / "trace.json", {"arcs": rows}, args)
    for r in rows:
        print(f"arc {r['arc']}: {r['samples']} samples, residual {r['trajectory_residual']:.1e}")
    return 0


def error_points(data, count: int = 8):
    st = data.star()
    return [st.c + 1.5 * st.r_T * np.exp(2j * np.pi * (k + 0.25) / count) for k in range(count)]


def cmd_pade(args, out: Path) -> int:
    from .pade import (
        compute_moments,
        error_eval,
        orthogonality_residual,
        pade_solve,
        pole_zero_extract,
        required_digits,
    )

    ctx, data, dens = _setup(args)
    orders = _orders(args)
    bd = dens.bind(data, args.kappa)
    mom = compute_moments(bd, 2 * max(orders) + 2, data)
    szego = {"kappa": args.kappa, "gamma": _c(bd.gamma), "log_G_hk": _c(bd.logGhk)}
    zs = error_points(data)
    with open(out / "poles.csv", "w", newline="") as fp, open(out / "errors.csv", "w", newline="") as fe:
        wp, we = csv.writer(fp), csv.writer(fe)
        wp.writerow(["n", "re", "im", "multiplicity"])
        we.writerow(["n", "re_z", "im_z", "abs_error", "orthogonality_residual"])
        for n in orders:
            ap = pade_solve(mom, n)
            pole_zero_extract(ap)
            ortho = orthogonality_residual(ap, bd)
            _dump(out / f"pade_{n}.json",
                  {"approximant": ap.to_json(), "orthogonality_residual": ortho, "szego": szego}, args)
            for r, m in ap.poles:
                for _ in range(m):
                    wp.writerow([n, float(mpmath.re(r)), float(mpmath.im(r)), m])
            for z in zs:
                e = error_eval(ap, bd, z)
                we.writerow([n, z.real, z.imag, float(abs(e)), ortho])
            print(f"n={n}: degree {ap.degree}, defect {ap.defect}, orthogonality {ortho:.1e}, "
                  f"digits {ap.digits} (needs {required_digits(n)})")
    return 0


def cmd_predict(args, out: Path) -> int:
    from .analysis import spurious_compare, write_distance_csv

    ctx, data, dens = _setup(args)
    orders = _orders(args)
    rep = spurious_compare(dens, data, orders, ctx)
    trend = rep.trend()
    payload = rep.to_json()
    payload["trend_negative"] = trend is not None and trend < 0
    _dump(out / "predict.json", {"spurious": payload}, args)
    write_distance_csv(rep, out / "distance.csv")
    for r in rep.records:
        tag = "error: " + r.error if r.error else f"sheet {r.sheet}, far roots {r.far_roots}"
        dist = "" if r.distance is None else f", distance {r.distance:.2e}"
        print(f"n={r.n}: {tag}{dist}")
    print("trend", trend, "negative" if payload["trend_negative"] else "not negative")
    return 0


def _parse_weights(text: str, mp):
    """Comma-separated exact decimals or fractions, e.g. '1/2,1/3,1/6'."""
    out = []
    for s in text.split(","):
        fr = Fraction(s.strip())
        out.append(mp.mpf(fr.numerator) / fr.denominator)
    return out


def cmd_orbit(args, out: Path) -> int:
    from .analysis import classify_orbit, write_orbit_csv
    from .mpnum import PrecisionCtx
    from .surface import surface_for

    ctx = PrecisionCtx(args.digits)
    mp = ctx.mp
    if args.weights:
        w = _parse_weights(args.weights, mp)
        gamma = mp.mpc(complex(args.gamma.replace("i", "j"))) if args.gamma else mp.mpc(0)
        tau = surface_for(_setup(args)[1]).periods.tau_ratio
    else:
        _, data, dens = _setup(args)
        P = surface_for(data).periods
        w = [mp.re(o / (2j * mp.pi)) for o in P.omega]
        gamma = dens.bind(data).gamma
        tau = P.tau_ratio
    rep = classify_orbit(w, gamma, tau, N=args.N)
    _dump(out / "orbit.json", {"orbit": rep.to_json(), "tau": _c(tau)}, args)
    write_orbit_csv(rep, out / "orbit.csv")
    tail = f", period {rep.period}" if rep.period else ""
    print(f"{rep.classification}{tail}")
    for f in rep.flags:
        print(" ", f)
    return 0


def cmd_verify(args, out: Path) -> int:
    from .verify import run_all

    checks = run_all("reduced", echo=print, seed=args.seed)
    rows = [{"criterion": c.index, "name": c.name, "ok": c.ok, "detail": c.detail} for c in checks]
    _dump(out / "verify.json", {"checks": rows}, args)
    return 0 if all(c.ok for c in checks) else 1


COMMANDS = {
    "chebotarev": cmd_chebotarev,
    "trace": cmd_trace,
    "pade": cmd_pade,
    "predict": cmd_predict,
    "orbit": cmd_orbit,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    digits = int(os.environ.get("CHEBPADE_DIGITS", DEFAULT_DIGITS))
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--triple", default="equilateral", help='"x1,y1;x2,y2;x3,y3" or "equilateral"')
    common.add_argument("--density", default="one", help='"one", "recip-poly:c0,c1,..." or "analytic:<name>"')
    common.add_argument("--digits", type=int, default=digits, help="working precision (env CHEBPADE_DIGITS)")
    common.add_argument("--n", type=int, default=None)
    common.add_argument("--n-range", type=parse_range, default=None, help="a..b")
    common.add_argument("--kappa", type=int, default=3, choices=(1, 2, 3), help="arc normalizing the Szegő constants")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=0, help="offset for the random draws of verify")
    ap = argparse.ArgumentParser(prog="chebpade", description="Padé approximants on three-point Chebotarev continua")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "orbit":
            p.add_argument("--weights", default=None, help="three weights, e.g. 1/2,1/3,1/6")
            p.add_argument("--gamma", default=None, help="complex shift, e.g. 0.1+0.2j")
            p.add_argument("--N", type=int, default=10000)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.digits < 30:
        ap.error("--digits must be at least 30")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[args.command](args, out)
    except argparse.ArgumentTypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ChebPadeError as exc:
        code = next((c for cls, c in EXIT_CODES.items() if isinstance(exc, cls)), 1)
        res = getattr(exc, "residuals", None)
        extra = f" (residuals {list(res)})" if res else ""
        print(f"error: {exc}{extra}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
