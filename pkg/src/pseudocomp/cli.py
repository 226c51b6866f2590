"""Command line harness.

Every artifact starts with a ``# key=value`` header echoing the full
configuration, and any such file can be fed back with ``--config`` to
reproduce it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bspline import hermitian_form_density
from .matrices import GeneratorSpecError, MatrixParseError, resolve_matrix
from .numerical_measure import density_grid, small_ball_bound, small_ball_empirical
from .numrange import numerical_range
from .pseudospectrum import Geometry, expected_area_mc, regime_exponent, theorem_bounds
from .rand_frames import RngStream
from .suites import run_suites, workers
from .tail_bounds import smin_tail_empirical

# stream ids per subcommand, so the same seed gives independent draws
STREAMS = {"smallball": 0x5B, "tail": 0x7A, "psarea": 0x9A}
HEADER_SKIP = {"out", "config", "svg", "func", "summary"}


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers: {text!r}") from exc


def complex_pair(text: str) -> complex:
    vals = float_list(text)
    if len(vals) == 1:
        return complex(vals[0], 0.0)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected re,im: {text!r}")
    return complex(vals[0], vals[1])


def header_lines(command: str, args: argparse.Namespace) -> list[str]:
    lines = [f"command={command}", f"version={__version__}"]
    for key, val in sorted(vars(args).items()):
        if key in HEADER_SKIP or key.startswith("_") or key == "command" or val is None:
            continue
        lines.append(f"{key}={raw_value(args, key)}")
    return lines


def raw_value(args, key):
    raw = getattr(args, "_raw", {})
    if key in raw:
        return raw[key]
    val = getattr(args, key)
    if isinstance(val, list):
        return ",".join(fmt(v) for v in val)
    if isinstance(val, complex):
        return f"{fmt(val.real)},{fmt(val.imag)}"
    return val if isinstance(val, str) else fmt(val)


def write_csv(args, command: str, columns: list[str], rows) -> None:
    buf = io.StringIO()
    for line in header_lines(command, args):
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    emit(args, buf.getvalue())


def emit(args, text: str, path=None) -> None:
    target = path or args.out
    if target:
        Path(target).parent.mkdir(parents=True, exist_ok=True)
        Path(target).write_text(text)
    else:
        sys.stdout.write(text)


def rng_for(args, command: str) -> np.random.Generator:
    return RngStream(args.seed, STREAMS[command]).generator()


def load(args) -> np.ndarray:
    return resolve_matrix(args.matrix)


# --------------------------------------------------------------------------
# svg


def _svg_frame(points, size=480, pad=20):
    pts = np.concatenate([np.asarray(p, dtype=complex).ravel() for p in points])
    x0, x1, y0, y1 = pts.real.min(), pts.real.max(), pts.imag.min(), pts.imag.max()
    span = max(x1 - x0, y1 - y0, 1e-12)
    scale = (size - 2 * pad) / span

    def tx(z):
        z = np.asarray(z, dtype=complex)
        return pad + (z.real - x0) * scale, size - pad - (z.imag - y0) * scale

    return tx, scale


def polygons_svg(header: list[str], polys: dict[str, tuple[np.ndarray, str]], size: int = 480) -> str:
    tx, _ = _svg_frame([p for p, _ in polys.values()], size)
    out = ['<?xml version="1.0" encoding="UTF-8"?>']
    out += [f"<!-- {line} -->" for line in header]
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}">')
    for name, (poly, color) in polys.items():
        x, y = tx(poly)
        pts = " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(x, y))
        out.append(f'<polygon id="{name}" points="{pts}" fill="none" stroke="{color}" stroke-width="1"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def heatmap_svg(header: list[str], values: np.ndarray, size: int = 480) -> str:
    ny, nx = values.shape
    finite = values[np.isfinite(values)]
    vmax = float(finite.max()) if finite.size and finite.max() > 0 else 1.0
    values = np.clip(np.nan_to_num(values, posinf=vmax), 0.0, vmax)
    cw, ch = size / nx, size / ny
    out = ['<?xml version="1.0" encoding="UTF-8"?>']
    out += [f"<!-- {line} -->" for line in header]
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}">')
    for i in range(ny):
        for j in range(nx):
            g = int(255 * (1 - values[i, j] / vmax))
            y = size - (i + 1) * ch
            out.append(f'<rect x="{j * cw:.2f}" y="{y:.2f}" width="{cw:.2f}" height="{ch:.2f}" fill="rgb({g},{g},255)"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# subcommands


def cmd_density(args) -> int:
    if args.hermitian:
        lam = np.array(float_list(args.hermitian))
        t = np.linspace(lam.min(), lam.max(), args.points)
        if lam.min() == lam.max():
            raise UsageError("all eigenvalues equal: the law is a point mass")
        write_csv(args, "density", ["t", "rho"], zip(t, hermitian_form_density(lam, t)))
        return 0
    if not args.matrix or not args.grid:
        raise UsageError("density needs --hermitian or both --matrix and --grid")
    g = float_list(args.grid)
    if len(g) != 6:
        raise UsageError("--grid expects x0,x1,y0,y1,nx,ny")
    nx, ny = int(g[4]), int(g[5])
    field, cell = density_grid(load(args), tuple(g[:4]), nx, ny, args.ktheta)
    z = field.grid.ravel()
    write_csv(args, "density", ["re", "im", "rho", "gap"], zip(z.real, z.imag, field.values.ravel(), field.gaps.ravel()))
    if args.svg:
        emit(args, heatmap_svg(header_lines("density", args), field.values), args.svg)
    return 0


def cmd_smallball(args) -> int:
    M = load(args)
    gen = rng_for(args, "smallball")
    rows = []
    for eps in args.eps:
        est = small_ball_empirical(M - args.z0 * np.eye(M.shape[0]), eps, 0.0, args.samples, gen)
        try:
            bound = small_ball_bound(M - args.z0 * np.eye(M.shape[0]), eps)
        except ValueError:
            bound = float("nan")
        rows.append((eps, est.p_hat, est.ci_upper, bound, bool(est.ci_upper <= bound)))
    write_csv(args, "smallball", ["eps", "p_hat", "ci_upper", "bound", "holds"], rows)
    return 0


def cmd_tail(args) -> int:
    A = load(args)
    tc = smin_tail_empirical(A, args.ell, args.z, args.eps, args.samples, rng_for(args, "tail"))
    second = tc.second_order if tc.second_order is not None else [float("nan")] * len(args.eps)
    rows = zip(tc.eps_grid, tc.p_hat, tc.ci_upper, tc.bound, second, tc.ci_upper <= tc.bound)
    write_csv(args, "tail", ["eps", "p_hat", "ci_upper", "bound", "second_order", "holds"], rows)
    return 0


def cmd_numrange(args) -> int:
    reg = numerical_range(load(args), args.angles)
    write_csv(
        args, "numrange", ["theta", "h", "touch_re", "touch_im"],
        zip(reg.angles, reg.support, reg.touch.real, reg.touch.imag),
    )
    if args.svg:
        polys = {"outer": (reg.outer_polygon, "#c0392b"), "inner": (reg.inner_polygon, "#2c3e80")}
        emit(args, polygons_svg(header_lines("numrange", args), polys), args.svg)
    return 0


def cmd_psarea(args) -> int:
    A = load(args)
    gen = rng_for(args, "psarea")
    flags = [f for f in (args.flags or "").split(",") if f.strip()]
    rows, verdicts = [], []
    for eps in args.eps:
        ea = expected_area_mc(A, args.ell, eps, args.samples, args.resolution, gen)
        geom = Geometry.of(A, args.ell, eps)
        tb = theorem_bounds(A, args.ell, eps, geometry=geom)
        try:
            regime = regime_exponent(flags, geom, A.shape[0], args.ell) if flags else None
        except ValueError:
            regime = None
        beta = regime[0] if regime else float("nan")
        rows.append((eps, ea.mean_lo, ea.mean_hi, ea.ci, *tb.items, tb.first_order_area, beta))
        best = tb.min_applicable()
        sandwich = bool(np.all(ea.lo + (ea.hi - ea.lo) >= math.pi * eps**2))
        verdicts.append({
            "eps": eps, "mean_hi_plus_ci": ea.mean_hi + ea.ci, "min_applicable_bound": fmt(best),
            "dominated": bool(ea.mean_hi + ea.ci <= best), "lower_envelope": sandwich,
        })
    cols = ["eps", "mean_lo", "mean_hi", "ci", "bound1", "bound2", "bound3", "bound4", "bound5", "lemma54", "beta"]
    write_csv(args, "psarea", cols, rows)
    summary = {"config": dict(l.split("=", 1) for l in header_lines("psarea", args)), "verdicts": verdicts}
    text = json.dumps(summary, indent=2) + "\n"
    if args.summary:
        emit(args, text, args.summary)
    else:
        sys.stderr.write(text)
    return 0 if all(v["dominated"] for v in verdicts) else 1


def cmd_verify(args) -> int:
    try:
        report = run_suites(args.suite, args.seed)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc
    report["config"] = dict(l.split("=", 1) for l in header_lines("verify", args))
    report["workers"] = workers()
    emit(args, json.dumps(report, indent=2) + "\n")
    return 0 if report["all_pass"] else 1


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pseudocomp", description="Pseudospectra of random compressions.")
    p.add_argument("--version", action="version", version=f"pseudocomp {__version__}")
    sub = p.add_subparsers(dest="command")

    def common(sp, seed=True):
        sp.add_argument("--config", help="key=value file (an emitted header works)")
        sp.add_argument("--out", help="output path (default stdout)")
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("density", help="density of q*Mq on a grid, or of a Hermitian form")
    common(sp, seed=False)
    sp.add_argument("--matrix")
    sp.add_argument("--hermitian", help="comma separated eigenvalues")
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument("--grid", help="x0,x1,y0,y1,nx,ny")
    sp.add_argument("--ktheta", type=int, default=512)
    sp.add_argument("--svg")
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("smallball", help="small-ball probabilities against the bound")
    common(sp)
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--eps", type=float_list, required=True)
    sp.add_argument("--z0", type=complex_pair, default=0j)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.set_defaults(func=cmd_smallball)

    sp = sub.add_parser("tail", help="lower tail of sigma_min of compressions")
    common(sp)
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--z", type=complex_pair, default=0j)
    sp.add_argument("--eps", type=float_list, required=True)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.set_defaults(func=cmd_tail)

    sp = sub.add_parser("numrange", help="support function samples of W(M)")
    common(sp, seed=False)
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--angles", type=int, default=256)
    sp.add_argument("--svg")
    sp.set_defaults(func=cmd_numrange)

    sp = sub.add_parser("psarea", help="expected pseudospectral area of compressions and its bounds")
    common(sp)
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--eps", type=float_list, required=True)
    sp.add_argument("--samples", type=int, default=50)
    sp.add_argument("--resolution", type=int, default=64)
    sp.add_argument("--flags", default="")
    sp.add_argument("--summary", help="path for the JSON verdict summary (default stderr)")
    sp.set_defaults(func=cmd_psarea)

    sp = sub.add_parser("verify", help="run verification suites, JSON report")
    common(sp)
    sp.add_argument("--suite", default="all")
    sp.set_defaults(func=cmd_verify)
    return p


def read_config(path: str) -> dict[str, str]:
    cfg = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line.startswith("#"):
            line = line[1:].strip()
        if not line or "=" not in line or "," in line.split("=", 1)[0]:
            continue
        key, val = line.split("=", 1)
        cfg[key.strip()] = val.strip()
    return cfg


def expand_config(argv: list[str]) -> list[str]:
    """Splice ``--config`` values in front of the explicit arguments."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return argv
    cfg = read_config(known.config)
    command = cfg.pop("command", None)
    cfg.pop("version", None)
    rest = list(argv)
    commands = {"density", "smallball", "tail", "numrange", "psarea", "verify"}
    if not any(a in commands for a in rest):
        if command is None:
            raise UsageError("config has no command and none was given")
        rest.insert(0, command)
    idx = next(i for i, a in enumerate(rest) if a in commands)
    injected = []
    for key, val in cfg.items():
        injected += [f"--{key}", val]
    return rest[: idx + 1] + injected + rest[idx + 1 :]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = expand_config(argv)
    except (UsageError, OSError) as exc:
        parser.error(str(exc))
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return 2
    # keep the literal strings of list-valued options so headers round-trip
    args._raw = {}
    for key in ("eps",):
        if hasattr(args, key) and isinstance(getattr(args, key), list):
            args._raw[key] = ",".join(fmt(v) for v in getattr(args, key))
    try:
        return args.func(args)
    except GeneratorSpecError as exc:
        parser.error(str(exc))
    except MatrixParseError as exc:
        sys.stderr.write(f"pseudocomp: parse error: {exc}\n")
        return 2
    except UsageError as exc:
        parser.error(str(exc))
    except (FileNotFoundError, ValueError) as exc:
        sys.stderr.write(f"pseudocomp: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
