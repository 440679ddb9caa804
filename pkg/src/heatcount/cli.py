"""Command-line batch surface.

Subcommands wire the library operations into reproducible runs: every
invocation writes its data files (CSV/JSON) plus a JSON manifest with
the full parameter set and input/output hashes.  Data files carry no
timestamps, so identical inputs give byte-identical outputs.

Exit codes: 0 success, 1 verification failed, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

from . import __version__
from .asymptotics import tauberian_first_term, weyl_check
from .errors import AccuracyError, HeatcountError, InvalidParameterError
from .evaltable import EvalTable
from .inversion import InversionConfig, invert_profile
from .smoothing import beta_sweep, default_beta
from .spectrum import GeneratorSpec, load_spectrum, save_spectrum
from .transforms import (
    density_estimate,
    heat_trace,
    laplace_of_counting,
    truncation_correction,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2

TOL_DEFAULTS = {1: 1e-12, 2: 0.1, 4: 0.01}


def parse_grid(text: str) -> list[float]:
    """Comma list ("0.01,0.1,1") or inclusive range ("1:3:0.5")."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InvalidParameterError("grid", f"range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise InvalidParameterError("grid", f"bad range {text!r}")
        out = []
        k = 0
        while True:
            value = start + k * step
            if value > stop + 1e-9 * step:
                break
            out.append(value)
            k += 1
        return out
    try:
        values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise InvalidParameterError("grid", f"could not parse {text!r}: {exc}") from exc
    if not values:
        raise InvalidParameterError("grid", f"empty grid {text!r}")
    return values


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(manifest_path, command, params, inputs, outputs, started):
    payload = {
        "command": command,
        "params": params,
        "inputs": [{"path": str(p), "sha256": _sha256(Path(p))} for p in inputs],
        "outputs": [{"path": str(p), "sha256": _sha256(Path(p))} for p in outputs],
        "version": __version__,
        "duration_s": time.monotonic() - started,
    }
    manifest_path = Path(manifest_path)
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    with manifest_path.open("w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _manifest_path(args) -> Path:
    if args.manifest:
        return Path(args.manifest)
    return Path(str(args.out) + ".manifest.json")


# -- subcommands ----------------------------------------------------------


def _cmd_generate(args) -> int:
    started = time.monotonic()
    spec = GeneratorSpec(
        kind=args.shape.replace("-", "_"),
        length=args.length,
        a=args.a,
        b=args.b,
        density=args.density,
        count=args.count,
        lam_max=args.lambda_max,
    )
    s = spec.build()
    if args.label:
        s = type(s)(s.values, s.multiplicities, label=args.label, generator=s.generator, cutoff=s.cutoff)
    save_spectrum(s, args.out)
    print(
        f"wrote {args.out}: {s.values.size} distinct eigenvalues, "
        f"total count {s.total_count}, range [{s.values[0]:g}, {s.values[-1]:g}]"
    )
    params = {
        "shape": args.shape,
        "length": args.length,
        "a": args.a,
        "b": args.b,
        "density": args.density,
        "count": args.count,
        "lambda_max": args.lambda_max,
        "label": args.label,
        "out": str(args.out),
    }
    _write_manifest(_manifest_path(args), "generate", params, [], [args.out], started)
    return EXIT_OK


def _verify_theorem_1(s, args):
    ts = parse_grid(args.t or "0.01,0.1,1,10")
    tol = args.tol if args.tol is not None else TOL_DEFAULTS[1]
    quad_tol = 1e-8
    table = EvalTable(
        (
            "t",
            "heat_trace",
            "step_exact",
            "quadrature",
            "correction",
            "step_rel_dev",
            "quad_rel_dev",
            "pass",
        ),
        metadata={"tolerance": tol, "quad_tolerance": quad_tol},
    )
    all_ok = True
    for t in sorted(ts):
        k_val = heat_trace(s, t).value
        step = laplace_of_counting(s, t, "step_exact")
        corr = truncation_correction(s, t)
        try:
            quad = laplace_of_counting(s, t, "quadrature")
        except AccuracyError as exc:
            quad = exc.estimate
        step_dev = abs(step + corr - k_val) / k_val
        quad_dev = abs(quad - k_val) / k_val
        ok = step_dev <= tol and quad_dev <= quad_tol
        all_ok &= ok
        table.append(t, k_val, step, quad, corr, step_dev, quad_dev, "yes" if ok else "no")
    return table, all_ok


def _verify_theorem_2(s, args):
    if not args.lam:
        raise InvalidParameterError("lambda", "a lambda grid is required for theorem 2")
    grid = parse_grid(args.lam)
    tol = args.tol if args.tol is not None else TOL_DEFAULTS[2]
    profile = invert_profile(s, grid)
    table = EvalTable(
        profile.columns + ("pass",),
        metadata={"tolerance": tol},
    )
    all_ok = True
    for row in profile.rows:
        lam, value, osc, rounded, oracle, match = row
        ok = match == "yes" and abs(value - oracle) <= tol
        all_ok &= ok
        table.append(*row, "yes" if ok else "no")
    return table, all_ok


def _verify_theorem_3(s, args):
    if not args.lam:
        raise InvalidParameterError("lambda", "a lambda value is required for theorem 3")
    lams = parse_grid(args.lam)
    if len(lams) != 1:
        raise InvalidParameterError("lambda", "theorem 3 verifies a single lambda")
    lam = lams[0]
    betas = parse_grid(args.beta) if args.beta else [1.0, 2.0, 5.0, 10.0, 20.0]
    sweep = beta_sweep(s, lam, betas)
    table = EvalTable(sweep.columns + ("pass",), metadata=dict(sweep.metadata))
    all_ok = True
    # machine slack: the measured deviation carries ~eps per summed term
    slack = 64 * 2.3e-16 * s.total_count
    for beta, value, deviation, bound in sweep.rows:
        # bound-based row tolerance: the deviation may not exceed its own bound
        ok = not math.isnan(bound) and deviation <= bound * (1 + 1e-12) + slack
        all_ok &= ok
        table.append(beta, value, deviation, bound, "yes" if ok else "no")
    return table, all_ok


def _verify_theorem_4(s, args):
    ts = parse_grid(args.t or "0.001,0.01")
    tol = args.tol if args.tol is not None else TOL_DEFAULTS[4]
    report = weyl_check(s, ts)
    table = EvalTable(
        ("t", "K", "N_inv", "ratio", "flag", "pass"),
        metadata={"tolerance": tol, "density_constant": report.density_constant},
    )
    all_ok = True
    smallest = report.t_grid[0]
    for t, k_val, n_val, ratio, flag in zip(
        report.t_grid, report.heat_values, report.counts, report.ratios, report.flags
    ):
        if flag != "ok":
            ok = False
        elif t == smallest:
            # the regime tolerance binds at the smallest t; larger t only
            # need a well-defined ratio
            ok = abs(ratio - 1.0) <= tol
        else:
            ok = True
        all_ok &= ok
        table.append(t, k_val, n_val, ratio, flag, "yes" if ok else "no")
    return table, all_ok


def _cmd_verify(args) -> int:
    started = time.monotonic()
    s = load_spectrum(args.spectrum)
    runners = {1: _verify_theorem_1, 2: _verify_theorem_2, 3: _verify_theorem_3, 4: _verify_theorem_4}
    table, all_ok = runners[args.theorem](s, args)
    table.write_csv(args.out)
    params = {
        "spectrum": str(args.spectrum),
        "theorem": args.theorem,
        "t": args.t,
        "lambda": args.lam,
        "beta": args.beta,
        "tol": args.tol,
        "out": str(args.out),
    }
    _write_manifest(_manifest_path(args), "verify", params, [args.spectrum], [args.out], started)
    n_pass = sum(1 for row in table.rows if row[-1] == "yes")
    print(f"theorem {args.theorem}: {n_pass}/{len(table.rows)} rows passed -> {args.out}")
    return EXIT_OK if all_ok else EXIT_VERIFY_FAILED


def _cmd_smooth(args) -> int:
    started = time.monotonic()
    s = load_spectrum(args.spectrum)
    lam = float(args.lam)
    if args.beta:
        betas = parse_grid(args.beta)
    else:
        betas = [default_beta(s, lam)]
    table = beta_sweep(s, lam, betas)
    table.write_csv(args.out)
    params = {
        "spectrum": str(args.spectrum),
        "lambda": lam,
        "beta": args.beta,
        "out": str(args.out),
    }
    _write_manifest(_manifest_path(args), "smooth", params, [args.spectrum], [args.out], started)
    print(f"smoothed counting at lambda={lam:g} over {len(betas)} beta values -> {args.out}")
    return EXIT_OK


def _cmd_invert(args) -> int:
    started = time.monotonic()
    s = load_spectrum(args.spectrum)
    grid = parse_grid(args.lam)
    manual = [args.contour_c, args.height, args.step]
    if any(v is not None for v in manual):
        cfg = InversionConfig(c=args.contour_c, T=args.height, h=args.step, auto=False)
    else:
        cfg = InversionConfig()
    table = invert_profile(s, grid, cfg)
    table.write_csv(args.out)
    params = {
        "spectrum": str(args.spectrum),
        "lambda": args.lam,
        "c": args.contour_c,
        "T": args.height,
        "h": args.step,
        "out": str(args.out),
    }
    _write_manifest(_manifest_path(args), "invert", params, [args.spectrum], [args.out], started)
    mismatches = sum(1 for row in table.rows if row[-1] != "yes")
    print(f"inverted {len(table.rows)} points, {mismatches} disagree with the counting oracle -> {args.out}")
    return EXIT_OK


def _cmd_weyl(args) -> int:
    started = time.monotonic()
    s = load_spectrum(args.spectrum)
    report = weyl_check(s, parse_grid(args.t))
    report.to_table().write_csv(args.out)
    params = {"spectrum": str(args.spectrum), "t": args.t, "out": str(args.out)}
    _write_manifest(_manifest_path(args), "weyl", params, [args.spectrum], [args.out], started)
    print(
        f"density constant estimate {report.density_constant:.17g}; "
        f"{len(report.t_grid)} grid rows -> {args.out}"
    )
    return EXIT_OK


def _cmd_tauber(args) -> int:
    started = time.monotonic()
    s = load_spectrum(args.spectrum)
    result = tauberian_first_term(
        s, (args.t_lo, args.t_hi), args.probe, n_points=args.points
    )
    result.to_table(args.probe).write_csv(args.out)
    params = {
        "spectrum": str(args.spectrum),
        "t_lo": args.t_lo,
        "t_hi": args.t_hi,
        "probe": args.probe,
        "points": args.points,
        "out": str(args.out),
    }
    _write_manifest(_manifest_path(args), "tauber", params, [args.spectrum], [args.out], started)
    fit = result.fit
    print(
        f"K(t) ~ {fit.amplitude:.6g} * t^-{fit.exponent:.6g} (residual {fit.fit_residual:.3g}); "
        f"predicted N({args.probe:g}) = {result.predicted_count:.6g} vs actual {result.actual_count}"
    )
    if fit.poor_fit:
        print("warning: fit residual above 5%; the trace is not power-law on this window", file=sys.stderr)
    return EXIT_OK


def _cmd_density(args) -> int:
    started = time.monotonic()
    s = load_spectrum(args.spectrum)
    lo, hi = (float(x) for x in args.range.split(","))
    result = density_estimate(s, args.bin_width, (lo, hi))
    result.table.write_csv(args.out)
    params = {
        "spectrum": str(args.spectrum),
        "bin_width": args.bin_width,
        "range": args.range,
        "out": str(args.out),
    }
    _write_manifest(_manifest_path(args), "density", params, [args.spectrum], [args.out], started)
    print(
        f"mean density {result.mean_density:.17g}, "
        f"constancy deviation {result.constancy_deviation:.3g} -> {args.out}"
    )
    return EXIT_OK


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heatcount",
        description="Eigenvalue counting function vs. heat trace: generators, transforms, checks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="Generate a spectrum file from a closed-form family.")
    gen.add_argument("--shape", required=True,
                     choices=["interval", "rectangle", "torus", "constant-density", "constant_density"])
    gen.add_argument("--length", type=float, default=None, help="interval length")
    gen.add_argument("--a", type=float, default=None, help="rectangle side a")
    gen.add_argument("--b", type=float, default=None, help="rectangle side b")
    gen.add_argument("--density", type=float, default=None, help="constant density C")
    gen.add_argument("--count", type=int, default=None, help="number of eigenvalues")
    gen.add_argument("--lambda-max", type=float, default=None, help="eigenvalue cutoff")
    gen.add_argument("--label", default=None)
    gen.add_argument("--out", required=True)
    gen.add_argument("--manifest", default=None)
    gen.set_defaults(func=_cmd_generate)

    ver = sub.add_parser("verify", help="Run one of the four identity checks over a grid.")
    ver.add_argument("--spectrum", required=True)
    ver.add_argument("--theorem", type=int, required=True, choices=[1, 2, 3, 4])
    ver.add_argument("--t", default=None, help="t grid (comma list or start:stop:step)")
    ver.add_argument("--lambda", dest="lam", default=None, help="lambda grid")
    ver.add_argument("--beta", default=None, help="beta grid (theorem 3)")
    ver.add_argument("--tol", type=float, default=None,
                     help="row tolerance (defaults: 1e-12 rel, 0.1 abs, bound-based, 0.01)")
    ver.add_argument("--out", required=True)
    ver.add_argument("--manifest", default=None)
    ver.set_defaults(func=_cmd_verify)

    smo = sub.add_parser("smooth", help="Sharpness sweep of the smoothed counting function.")
    smo.add_argument("--spectrum", required=True)
    smo.add_argument("--lambda", dest="lam", type=float, required=True)
    smo.add_argument("--beta", default=None, help="beta grid; default 50/(nearest gap)")
    smo.add_argument("--out", required=True)
    smo.add_argument("--manifest", default=None)
    smo.set_defaults(func=_cmd_smooth)

    inv = sub.add_parser("invert", help="Contour-invert the heat trace back to counts.")
    inv.add_argument("--spectrum", required=True)
    inv.add_argument("--lambda", dest="lam", required=True, help="lambda grid")
    inv.add_argument("--c", dest="contour_c", type=float, default=None, help="contour abscissa")
    inv.add_argument("--height", type=float, default=None, help="contour truncation T")
    inv.add_argument("--step", type=float, default=None, help="trapezoid step h")
    inv.add_argument("--out", required=True)
    inv.add_argument("--manifest", default=None)
    inv.set_defaults(func=_cmd_invert)

    wey = sub.add_parser("weyl", help="Constant-density regime check K(t) vs N(1/t).")
    wey.add_argument("--spectrum", required=True)
    wey.add_argument("--t", required=True, help="t grid")
    wey.add_argument("--out", required=True)
    wey.add_argument("--manifest", default=None)
    wey.set_defaults(func=_cmd_weyl)

    tau = sub.add_parser("tauber", help="Power-law fit of K(t) and first-term count prediction.")
    tau.add_argument("--spectrum", required=True)
    tau.add_argument("--t-lo", type=float, required=True)
    tau.add_argument("--t-hi", type=float, required=True)
    tau.add_argument("--probe", type=float, required=True, help="lambda at which to predict N")
    tau.add_argument("--points", type=int, default=16)
    tau.add_argument("--out", required=True)
    tau.add_argument("--manifest", default=None)
    tau.set_defaults(func=_cmd_tauber)

    den = sub.add_parser("density", help="Binned eigenvalue density over a range.")
    den.add_argument("--spectrum", required=True)
    den.add_argument("--bin-width", type=float, required=True)
    den.add_argument("--range", required=True, help="lo,hi")
    den.add_argument("--out", required=True)
    den.add_argument("--manifest", default=None)
    den.set_defaults(func=_cmd_density)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HeatcountError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
