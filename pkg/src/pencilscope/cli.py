"""``pencilscope`` command line.

Exit status: 0 on success, 1 when a checked property fails, 2 on parse or I/O
errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from typing import List, Optional, Sequence

import numpy as np

from . import blockpencil as bpm
from . import heat
from . import verify as vf
from .errors import ParseError, PencilError, SingularB
from .pencil import Pencil, eigenvalues, read_pencil, write_pencil
from .pseudogrid import (
    GridSpec,
    center_sampler,
    eigenvalues_from_grid,
    evaluate_field,
    extract_contours,
    field_from_csv,
    field_to_csv,
)
from .svg import render_svg

log = logging.getLogger("pencilscope")

EXIT_OK = 0
EXIT_PROPERTY = 1
EXIT_IO = 2

DEFAULT_EPS = "0.25,0.5"
PAPER_FIG_M = 9  # T is (m+1) x (m+1), so m = 9 gives the 10x10 matrix
PAPER_FIG = {
    5.0: GridSpec(-21.0, 4.0, -4.0, 4.0, 201, 201),
    10.0: GridSpec(-41.0, 4.0, -4.0, 4.0, 201, 201),
}


class PropertyFailure(Exception):
    pass


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_complex(z: complex) -> str:
    return f"{_fmt(z.real)} {_fmt(z.imag)}"


def parse_eps(text: str) -> List[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ParseError(f"bad epsilon list {text!r}") from None
    if not vals or any(not (v > 0 and math.isfinite(v)) for v in vals):
        raise ParseError(f"epsilons must be positive, got {text!r}")
    return vals


def _out_dir(args) -> str:
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    log.info("wrote %s", path)


def _grid(args, required: bool = True) -> Optional[GridSpec]:
    if args.grid is None:
        if required:
            raise ParseError("--grid reMin:reMax:imMin:imMax:nRe:nIm is required")
        return None
    return GridSpec.parse(args.grid)


# --- commands -------------------------------------------------------------

def cmd_grid(args) -> int:
    p = read_pencil(args.pencil)
    g = _grid(args)
    f = evaluate_field(p, g, args.n)
    _write(os.path.join(_out_dir(args), "field.csv"), field_to_csv(f))
    return EXIT_OK


def _contour_outputs(p: Optional[Pencil], f, eps: Sequence[float], out: str, stem: str, eigs) -> None:
    center = center_sampler(p, f.n) if p is not None else None
    cs = extract_contours(f, eps, center)
    for e in cs.empty_levels:
        log.warning("EmptyLevel: eps=%g does not cross the grid", e)
    _write(os.path.join(out, f"{stem}.json"), cs.to_json())
    render_svg(cs, eigs, os.path.join(out, f"{stem}.svg"), title=stem)


def _pencil_eigs(p: Pencil, g: Optional[GridSpec], n: int = 0):
    try:
        return list(eigenvalues(p))
    except SingularB:
        if g is None:
            log.warning("B is singular and no grid given; eigenvalue markers omitted")
            return []
        return eigenvalues_from_grid(p, g, n)


def cmd_contour(args) -> int:
    if args.preset == "paper-fig":
        return run_paper_fig(args)
    eps = parse_eps(args.eps)
    p = read_pencil(args.pencil) if args.pencil else None
    if args.field:
        with open(args.field, encoding="utf-8") as fh:
            f = field_from_csv(fh.read(), args.n, args.field)
    elif p is not None:
        f = evaluate_field(p, _grid(args), args.n)
    else:
        raise ParseError("contour needs --field, --pencil or --preset")
    eigs = _pencil_eigs(p, f.grid, f.n) if p is not None else []
    _contour_outputs(p, f, eps, _out_dir(args), "contours", eigs)
    return EXIT_OK


def paper_fig_pencil(a: float) -> Pencil:
    fp = heat.FtcsParams.from_a(PAPER_FIG_M, a)
    return Pencil.standard(heat.ftcs_matrix(fp))


def run_paper_fig(args) -> int:
    out = _out_dir(args)
    eps = parse_eps(args.eps)
    for a, g in PAPER_FIG.items():
        p = paper_fig_pencil(a)
        f = evaluate_field(p, g, args.n)
        stem = f"paper-fig-a{a:g}"
        _contour_outputs(p, f, eps, out, stem, eigenvalues(p))
    return EXIT_OK


def cmd_eig(args) -> int:
    p = read_pencil(args.pencil)
    g = _grid(args, required=False)
    for z in _pencil_eigs(p, g, args.n):
        print(_fmt_complex(complex(z)))
    return EXIT_OK


def _heat_params(args) -> heat.HeatParams:
    try:
        return heat.HeatParams(args.c, args.d)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def cmd_heat_eig(args) -> int:
    for v in heat.heat_eigenvalues(_heat_params(args), args.count):
        print(_fmt(v))
    return EXIT_OK


def _ftcs_params(args) -> heat.FtcsParams:
    hp = _heat_params(args)
    if (args.a is None) == (args.dt is None):
        raise ParseError("give exactly one of --a and --dt")
    if args.a is not None:
        return heat.FtcsParams.from_a(args.m, args.a, hp)
    return heat.FtcsParams.from_dt(args.m, args.dt, hp)


def cmd_heat_fdm(args) -> int:
    fp = _ftcs_params(args)
    p = Pencil.standard(heat.ftcs_matrix(fp))
    out = _out_dir(args)
    write_pencil(os.path.join(out, "T.pencil"), p)
    meta = {"m": fp.m, "a": fp.a, "delta_t": fp.delta_t, "delta_x": fp.delta_x, "c": fp.c,
            "unstable": fp.unstable, "size": fp.m + 1}
    _write(os.path.join(out, "T.json"), json.dumps(meta, indent=1, sort_keys=True) + "\n")
    for z in eigenvalues(p):
        print(_fmt_complex(complex(z)))
    return EXIT_OK


def _initial_state(spec: str, fp: heat.FtcsParams, hp: heat.HeatParams) -> np.ndarray:
    if spec.startswith("mode:"):
        try:
            k = int(spec[5:])
        except ValueError:
            raise ParseError(f"bad mode index in {spec!r}") from None
        return heat.mode_initial(fp, k, hp)
    with open(spec, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().split() if ln]
    try:
        vals = np.array([float(x) for x in lines])
    except ValueError:
        raise ParseError("initial state must be whitespace-separated reals", path=spec) from None
    if vals.shape != (fp.m + 1,):
        raise ParseError(f"initial state needs {fp.m + 1} values, got {vals.size}", path=spec)
    return vals


def cmd_heat_simulate(args) -> int:
    hp = _heat_params(args)
    fp = _ftcs_params(args)
    if fp.unstable:
        log.warning("a = %g > 0.5: the explicit scheme is unstable", fp.a)
    sim = heat.simulate_ftcs(fp, _initial_state(args.initial, fp, hp), args.steps)
    rows = ["x," + ",".join(f"step{j}" for j in range(sim.states.shape[0]))]
    for i, x in enumerate(fp.x):
        rows.append(",".join(["%.17g" % x] + ["%.17g" % v for v in sim.states[:, i]]))
    _write(os.path.join(_out_dir(args), "states.csv"), "\n".join(rows) + "\n")
    return EXIT_OK


def cmd_heat_enclosure(args) -> int:
    hp = _heat_params(args)
    eps = parse_eps(args.eps)
    g = _grid(args, required=False) or vf.HEAT_ENCLOSURE_GRID
    bp = heat.heat_pencil_matrices(hp, args.m)
    f = evaluate_field(bpm.assemble(bp), g, 0)
    rep = heat.heat_enclosure_check(hp, args.m, f, eps, args.sup_radius, include_zero=not args.literal)
    payload = rep.to_dict()
    payload["grid"] = g.format()
    _write(os.path.join(_out_dir(args), "heat-enclosure.json"), json.dumps(payload, indent=1, sort_keys=True) + "\n")
    if rep.total_violations:
        raise PropertyFailure(f"{rep.total_violations} violating points")
    return EXIT_OK


def cmd_block_enclosure(args) -> int:
    bp = bpm.read_block_pencil(args.block)
    g = _grid(args)
    rep = bpm.enclosure_sweep(bp, g.points().ravel(), parse_eps(args.eps), args.complement,
                              args.n, args.bound, args.sup_radius)
    _write(os.path.join(_out_dir(args), "block-enclosure.json"), rep.to_json())
    if rep.total_violations:
        raise PropertyFailure(f"{rep.total_violations} violating points")
    return EXIT_OK


def cmd_verify(args) -> int:
    names = list(vf.REGISTRY) if args.property == "all" else [args.property]
    for nm in names:
        if nm not in vf.REGISTRY:
            raise ParseError(f"unknown property {nm!r}; known: all, {', '.join(vf.REGISTRY)}")
    reports = []
    for nm in names:
        rep = vf.run_property(nm, args.seed, args.trials)
        log.info("%s: %d trials, %d failures (%.2fs)", nm, rep.trials, len(rep.failures), rep.wall_time)
        reports.append(rep)
    text = vf.reports_to_json(reports, timing=args.timing)
    if args.out:
        _write(os.path.join(_out_dir(args), "verify.json"), text)
    else:
        sys.stdout.write(text)
    bad = [r.property for r in reports if not r.passed]
    if bad:
        raise PropertyFailure("failed: " + ", ".join(bad))
    return EXIT_OK


# --- parser ---------------------------------------------------------------

def _common(p: argparse.ArgumentParser, grid=True, eps=None, n=True):
    if grid:
        p.add_argument("--grid", help="reMin:reMax:imMin:imMax:nRe:nIm")
    if eps is not None:
        p.add_argument("--eps", default=eps, help="comma-separated epsilon list")
    if n:
        p.add_argument("--n", type=int, default=0, help="level n (power 2^n)")
    p.add_argument("--out", help="output directory (default: current)")


def _heat_common(p: argparse.ArgumentParser):
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--d", type=float, default=math.pi)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pencilscope", description="Pseudospectra of matrix pencils.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grid", help="sample log10 r_n on a grid (field.csv)")
    p.add_argument("--pencil", required=True)
    _common(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("contour", help="level-set contours as SVG and JSON")
    p.add_argument("--pencil")
    p.add_argument("--field", help="field CSV from 'grid'")
    p.add_argument("--preset", choices=["paper-fig"])
    _common(p, eps=DEFAULT_EPS)
    p.set_defaults(func=cmd_contour)

    p = sub.add_parser("eig", help="generalized eigenvalues")
    p.add_argument("--pencil", required=True)
    _common(p)
    p.set_defaults(func=cmd_eig)

    ph = sub.add_parser("heat", help="heat-equation pencil tools")
    hs = ph.add_subparsers(dest="heat_command", required=True)
    p = hs.add_parser("eig", help="analytic eigenvalues")
    _heat_common(p)
    p.add_argument("--count", type=int, default=5)
    p.set_defaults(func=cmd_heat_eig)

    for name, fn in (("fdm", cmd_heat_fdm), ("simulate", cmd_heat_simulate)):
        p = hs.add_parser(name)
        _heat_common(p)
        p.add_argument("--m", type=int, default=10)
        p.add_argument("--a", type=float)
        p.add_argument("--dt", type=float)
        p.add_argument("--out")
        if name == "simulate":
            p.add_argument("--steps", type=int, default=10)
            p.add_argument("--initial", default="mode:0", help="file of m+1 values or mode:k")
        p.set_defaults(func=fn)

    p = hs.add_parser("enclosure", help="discrete enclosure check on a field")
    _heat_common(p)
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--sup-radius", action="store_true")
    p.add_argument("--literal", action="store_true", help="omit 0 from the disk centers")
    _common(p, eps="0.1,0.25", n=False)
    p.set_defaults(func=cmd_heat_enclosure)

    p = sub.add_parser("block-enclosure", help="block enclosure sweep (JSON report)")
    p.add_argument("--block", required=True, help="CPENCIL-BLOCK v1 file")
    p.add_argument("--complement", choices=list(bpm.COMPLEMENTS), default=bpm.SECOND)
    p.add_argument("--bound", choices=["paper", "commuting"], default="paper")
    p.add_argument("--sup-radius", action="store_true")
    _common(p, eps="0.1,0.3")
    p.set_defaults(func=cmd_block_enclosure)

    p = sub.add_parser("verify", help="seeded property checks")
    p.add_argument("property", help="property name or 'all'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int)
    p.add_argument("--timing", action="store_true", help="include wall time in the JSON")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return ap


def _join_grid_values(argv: Sequence[str]) -> List[str]:
    # argparse treats "-21:4:..." as an option, so bind it to --grid explicitly
    out: List[str] = []
    it = iter(argv)
    for tok in it:
        if tok == "--grid":
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and ":" in nxt:
                out.append(f"--grid={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(_join_grid_values(sys.argv[1:] if argv is None else argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except PropertyFailure as exc:
        print(f"property failure: {exc}", file=sys.stderr)
        return EXIT_PROPERTY
    except ParseError as exc:
        where = f"{exc.path}:" if exc.path else ""
        line = f"line {exc.line}: " if exc.line else ""
        print(f"ParseError: {where}{line}{exc.message}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"IoError: {exc}", file=sys.stderr)
        return EXIT_IO
    except (PencilError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
