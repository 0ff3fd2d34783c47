"""Command-line front end.

Every subcommand writes its files plus ``manifest.json`` into ``--out``.
Settings come from flags, a ``key = value`` file (``--config``) or a previous
manifest (``--manifest``); explicit flags always win.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, kernels
from ._accel import thread_cap
from .graphsolve import (
    GraphTransformError,
    ThresholdError,
    ThresholdSet,
    cone_check,
    slope_discontinuity_scan,
    solve,
)
from .periodic import PeriodicFn, lip_seminorm, standard_phi
from .twist import TwistParams

EXIT_OK = 0
EXIT_THRESHOLD = 2
EXIT_NOCONV = 3
EXIT_USAGE = 64

# settings that only steer bookkeeping and never enter a manifest
_META = {"command", "config", "manifest", "out", "func"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    """Comma list ``a,b,c`` or range ``lo:hi:steps``."""
    try:
        if ":" in text:
            lo, hi, steps = text.split(":")
            return [float(v) for v in np.linspace(float(lo), float(hi), int(steps))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from exc


def _scan(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--scan takes lo,hi,steps")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad scan {text!r}") from exc


# ------------------------------------------------------------------ parser


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--manifest", help="replay the settings of a previous manifest.json")
    p.add_argument("--out", default="out", help="output directory (default: out)")


def _twist_args(p: argparse.ArgumentParser):
    p.add_argument("--lambda", dest="lam", type=float, default=0.25, help="vertical contraction lambda in (0,1)")
    p.add_argument("--kappa", type=float, default=0.0, help="standard-map amplitude")
    p.add_argument("--alpha1", type=float, default=0.0)
    p.add_argument("--alpha2", type=float, default=0.0)
    p.add_argument("--phi-file", dest="phi_file", help="CSV x,value of a zero-mean phi (replaces --kappa)")
    p.add_argument("--n", type=int, default=4096, help="grid size")
    p.add_argument("--interp", choices=["linear", "cubic"], help="default: cubic for --kappa, linear for --phi-file")
    p.add_argument("--tol", type=float, default=1e-10, help="graph solve tolerance")
    p.add_argument("--max-iter", dest="max_iter", type=int, default=20000)
    p.add_argument("--force", action="store_true", help="iterate above the existence threshold")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twistlab", description="Invariant graphs of dissipative twist maps.")
    parser.add_argument("--version", action="version", version=f"twistlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve for the invariant graph")
    _twist_args(p)
    _common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("tune", help="tune alpha1 or alpha2 to a rotation number")
    _twist_args(p)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--vary", choices=["alpha1", "alpha2"], default="alpha1")
    p.add_argument("--rho-tol", dest="rho_tol", type=float, default=1e-6)
    p.add_argument("--rho-iter", dest="rho_iter", type=int, default=1 << 22)
    _common(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("rotnum", help="rotation number of the induced circle map")
    _twist_args(p)
    p.add_argument("--n-iter", dest="n_iter", type=int, default=10**6)
    p.add_argument("--q-max", dest="q_max", type=int, default=0, help="also test mode locking up to this period")
    _common(p)
    p.set_defaults(func=cmd_rotnum)

    p = sub.add_parser("cone-check", help="cone-field and slope-jump diagnostics")
    _twist_args(p)
    p.add_argument("--k-max", dest="k_max", type=int, default=40)
    p.add_argument("--beta", type=float, help="cone aperture (default 1/sqrt(lambda))")
    p.add_argument("--jump-tol", dest="jump_tol", type=float, default=0.05)
    _common(p)
    p.set_defaults(func=cmd_cone)

    p = sub.add_parser("arnold", help="Arnold-type circle maps as induced maps")
    p.add_argument("--n", dest="order", type=int, default=50, help="order n of g = x + a1 + sin(2 pi x)/n")
    p.add_argument("--lambda", dest="lam", type=float, default=0.25)
    p.add_argument("--alpha1", type=float, default=0.0)
    p.add_argument("--scan", type=_scan, help="plateau scan lo,hi,steps over alpha1")
    p.add_argument("--q-max", dest="q_max", type=int, default=8)
    p.add_argument("--grid-n", dest="grid_n", type=int, default=4096)
    _common(p)
    p.set_defaults(func=cmd_arnold)

    p = sub.add_parser("denjoy", help="Denjoy artifact with derivative surgery")
    p.add_argument("--omega", type=float, default=(math.sqrt(5.0) - 1.0) / 2.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.25)
    p.add_argument("--N", dest="N", type=int, default=200)
    p.add_argument("--K", dest="K", type=int, default=400)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--beta0", type=float, help="Moebius seed (default (1+lambda)/2)")
    p.add_argument("--grid-n", dest="grid_n", type=int, default=1 << 16)
    _common(p)
    p.set_defaults(func=cmd_denjoy)

    p = sub.add_parser("sweep", help="(lambda, kappa) breakdown atlas")
    p.add_argument("--lambdas", type=_floats, default=_floats("0.04,0.1,0.25,0.5,0.81"))
    p.add_argument("--kappas", type=_floats, default=_floats("0:1.5:31"), help="comma list or lo:hi:steps")
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=5000)
    p.add_argument("--threads", type=int, help="worker cap (default TWISTLAB_THREADS or CPU count)")
    _common(p)
    p.set_defaults(func=cmd_sweep)
    return parser


# ------------------------------------------------------------------ settings


def _read_config(path: str) -> dict:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _read_manifest(path: str, command: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read manifest {path}: {exc}") from exc
    if data.get("command") != command:
        raise UsageError(f"manifest is for {data.get('command')!r}, not {command!r}")
    return data.get("params", {})


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _apply_file_defaults(sub: argparse.ArgumentParser, values: dict, typed: bool):
    actions = {a.dest: a for a in sub._actions}
    aliases = {"lambda": "lam", "n_iter": "n_iter"}
    fixed = {}
    for key, value in values.items():
        dest = aliases.get(key, key)
        if dest not in actions or dest in _META or dest == "help":
            raise UsageError(f"unknown setting {key!r}")
        act = actions[dest]
        if isinstance(act, argparse._StoreTrueAction) and isinstance(value, str):
            low = value.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"setting {key!r} needs a boolean")
            value = low in ("true", "1", "yes")
        elif not typed and isinstance(value, str) and act.type is not None:
            try:
                value = act.type(value)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"bad value for {key!r}: {value!r}") from exc
        if act.choices is not None and value is not None and value not in act.choices:
            raise UsageError(f"bad value for {key!r}: {value!r}")
        if typed and dest == "scan" and value is not None:
            value = tuple(value)
        fixed[dest] = value
    for action in sub._actions:
        if action.dest in fixed:
            action.required = False
    sub.set_defaults(**fixed)


def parse(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config or args.manifest:
        sub = _subparser(parser, args.command)
        if args.manifest:
            _apply_file_defaults(sub, _read_manifest(args.manifest, args.command), typed=True)
        if args.config:
            _apply_file_defaults(sub, _read_config(args.config), typed=False)
        args = parser.parse_args(argv)
    return args


def settings(args) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(vars(args).items()) if k not in _META}


# ------------------------------------------------------------------ output


def _json(obj) -> str:
    def conv(o):
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.bool_):
            return bool(o)
        raise TypeError(type(o).__name__)

    return json.dumps(obj, indent=2, sort_keys=True, default=conv, allow_nan=True) + "\n"


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(out: Path, name: str, text: str):
    with open(out / name, "w", newline="\n") as fh:
        fh.write(text)


def write_manifest(out: Path, args):
    manifest = {
        "tool": "twistlab",
        "version": __version__,
        "command": args.command,
        "params": settings(args),
        "backend": kernels.BACKEND,
        "numpy": np.__version__,
        "seeds": {"rotation_x0": 0.0, "solve_psi0": "zero"},
    }
    _write(out, "manifest.json", _json(manifest))


def _params(args) -> TwistParams:
    if args.phi_file:
        interp = args.interp or "linear"
        try:
            phi = PeriodicFn.from_csv(args.phi_file, interp)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot load {args.phi_file}: {exc}") from exc
    else:
        phi = standard_phi(args.kappa, args.n, args.interp or "cubic")
    try:
        return TwistParams(args.lam, args.alpha1, args.alpha2, phi)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _solve_report(p: TwistParams, G, rho) -> dict:
    return {
        "lambda": p.lam,
        "alpha1": p.alpha1,
        "alpha2": p.alpha2,
        "lip_phi": lip_seminorm(p.phi),
        "lip_threshold": ThresholdSet.for_lambda(p.lam).lip_threshold,
        "converged": G.converged,
        "status": G.status,
        "iterations": G.iterations,
        "residual_inv": G.residual_inv,
        "residual_fe": G.residual_fe,
        "lip_cert": G.lip_cert,
        "rho": rho,
    }


def _solved(args):
    p = _params(args)
    G = solve(p, tol=args.tol, max_iter=args.max_iter, force=args.force)
    return p, G


# ------------------------------------------------------------------ commands


def cmd_solve(args) -> int:
    from .circle import rotation_number

    out = _outdir(args)
    write_manifest(out, args)
    t = time.perf_counter()
    p, G = _solved(args)
    rho = rotation_number(G.g, 0.0, 10**6)[0] if G.converged else None
    rep = _solve_report(p, G, rho)
    rep["runtime_seconds"] = time.perf_counter() - t
    G.psi.to_csv(out / "graph.csv")
    _write(out, "report.json", _json(rep))
    print(f"solve: {G.status} after {G.iterations} iterations, residual {G.residual_inv:.3g}, rho {rho}")
    return EXIT_OK if G.converged else EXIT_NOCONV


def cmd_tune(args) -> int:
    from .tuner import tune_alpha1, tune_alpha2

    out = _outdir(args)
    write_manifest(out, args)
    p = _params(args)
    tuner = tune_alpha1 if args.vary == "alpha1" else tune_alpha2
    res = tuner(p, args.omega, tol=args.rho_tol, n_iter=args.rho_iter)
    res.graph.psi.to_csv(out / "graph.csv")
    _write(out, "tune.json", _json(res.as_dict()))
    print(f"tune: {args.vary} = {res.value!r} gives rho = {res.achieved!r} (target {res.target!r})")
    return EXIT_OK


def cmd_rotnum(args) -> int:
    from .circle import mode_lock_detect, rotation_number

    out = _outdir(args)
    write_manifest(out, args)
    p, G = _solved(args)
    if not G.converged:
        print(f"rotnum: graph solve {G.status}", file=sys.stderr)
        return EXIT_NOCONV
    rho, ok = rotation_number(G.g, 0.0, args.n_iter)
    rep = {"rho": rho, "self_consistent": ok, "n_iter": args.n_iter, "seed": 0.0}
    if args.q_max:
        lock = mode_lock_detect(G.g, args.q_max)
        rep["mode_lock"] = None if lock is None else [lock.numerator, lock.denominator]
    _write(out, "rotnum.json", _json(rep))
    print(f"rotnum: rho = {rho!r}")
    return EXIT_OK


def cmd_cone(args) -> int:
    out = _outdir(args)
    write_manifest(out, args)
    p, G = _solved(args)
    if not G.converged:
        print(f"cone-check: graph solve {G.status}", file=sys.stderr)
        return EXIT_NOCONV
    rep = cone_check(p, G, k_max=args.k_max, beta=args.beta)
    slope = rep.pop("limit_slope")
    rep["violations"] = rep["violations"][:50]
    rep["n_violations"] = len(rep["violations"])
    rep["slope_jumps"] = slope_discontinuity_scan(G.psi, args.jump_tol)
    _write(out, "cone.json", _json(rep))
    _write(out, "cone_slope.csv", PeriodicFn(slope).to_csv())
    print(f"cone-check: analytic {rep['analytic_pass']}, nodes {rep['node_pass']}, K2 nodes {rep['node_pass_K2']}")
    return EXIT_OK


def cmd_arnold(args) -> int:
    from . import arnold

    out = _outdir(args)
    write_manifest(out, args)
    try:
        inst = arnold.build(args.order, args.alpha1, args.lam, args.grid_n)
    except ValueError as exc:
        print(f"arnold: {exc}", file=sys.stderr)
        return EXIT_THRESHOLD
    from .graphsolve import functional_eq_residual
    from .periodic import c1_norm, holder_seminorm, mean

    rep = {
        "n": args.order,
        "alpha1": args.alpha1,
        "lambda": args.lam,
        "functional_eq_residual": functional_eq_residual(inst.g, inst.params, inst.ginv),
        "invariance_defect": arnold.invariance_defect(inst),
        "mean_psi": mean(inst.psi),
        "psi_c0": inst.psi.sup_norm(),
        "psi_c1": c1_norm(inst.psi),
        "psi_holder": holder_seminorm(inst.psi, 0.1),
    }
    inst.psi.to_csv(out / "psi.csv")
    inst.Psi.to_csv(out / "graph.csv")
    if args.scan:
        lo, hi, steps = args.scan
        rows = arnold.plateau_scan(args.order, args.lam, lo, hi, steps, q_max=args.q_max)
        lines = ["lo,hi,p,q"]
        lines += [f"{a!r},{b!r},{fr.numerator},{fr.denominator}" for (a, b), fr in rows]
        _write(out, "plateaus.csv", "\n".join(lines) + "\n")
        rep["plateaus"] = [{"lo": a, "hi": b, "p": fr.numerator, "q": fr.denominator} for (a, b), fr in rows]
    _write(out, "arnold.json", _json(rep))
    print(f"arnold: n={args.order} residual {rep['functional_eq_residual']:.3g}")
    return EXIT_OK


def cmd_denjoy(args) -> int:
    from . import denjoy

    out = _outdir(args)
    write_manifest(out, args)
    cfg = denjoy.DenjoyConfig(
        omega=args.omega, eps=args.eps, N=args.N, K=args.K, lam=args.lam, beta0=args.beta0, grid_n=args.grid_n
    )
    try:
        art = denjoy.build_artifact(cfg)
    except denjoy.DenjoyError as exc:
        print(f"denjoy: {exc}", file=sys.stderr)
        return EXIT_THRESHOLD
    rep = denjoy.certify(art)
    x = np.arange(cfg.grid_n) / cfg.grid_n
    _write(out, "g.csv", PeriodicFn(art.gmap(x) - x).to_csv())
    _write(out, "h.csv", PeriodicFn(art.hmap(x) - x).to_csv())
    art.psi.to_csv(out / "psi.csv")
    art.phi.to_csv(out / "phi.csv")
    art.Psi.to_csv(out / "graph.csv")
    _write(out, "report.json", _json(rep))
    failed = [k for k, v in rep["checks"].items() if not v]
    print(f"denjoy: built in {art.build_seconds:.2f}s; failing checks: {', '.join(failed) or 'none'}")
    return EXIT_OK


def _sweep_cell(lam: float, kappa: float, n: int, tol: float, max_iter: int) -> dict:
    p = TwistParams(lam, 0.0, 0.0, standard_phi(kappa, n))
    try:
        G = solve(p, tol=tol, max_iter=max_iter, force=True)
        status, it, lip = G.status, G.iterations, G.lip_cert
    except (GraphTransformError, ValueError):
        status, it, lip = "diverged", 0, float("nan")
    th = ThresholdSet.for_lambda(lam)
    return {
        "lambda": lam,
        "kappa": kappa,
        "status": status,
        "converged": status == "converged",
        "iterations": it,
        "lip_cert": lip,
        "below_threshold": kappa <= th.lip_threshold,
    }


def sweep(lambdas, kappas, n=1024, tol=1e-9, max_iter=5000, threads=None) -> tuple[list, dict]:
    """Run every (lambda, kappa) cell and summarise each lambda row."""
    cells = [(float(l), float(k)) for l in sorted(lambdas) for k in sorted(kappas)]
    with ThreadPoolExecutor(max_workers=threads or thread_cap()) as pool:
        rows = list(pool.map(lambda c: _sweep_cell(c[0], c[1], n, tol, max_iter), cells))
    summary = {}
    for lam in sorted(set(l for l, _ in cells)):
        row = [r for r in rows if r["lambda"] == lam]
        th = ThresholdSet.for_lambda(lam)
        first_fail = next((r["kappa"] for r in row if not r["converged"]), None)
        lead = [r["kappa"] for r in row if r["converged"] and (first_fail is None or r["kappa"] < first_fail)]
        stray = [r["kappa"] for r in row if r["converged"] and first_fail is not None and r["kappa"] > first_fail]
        boundary = max(lead) if lead else None
        summary[repr(lam)] = {
            "lip_threshold": th.lip_threshold,
            "bohr": th.bohr,
            "gap": th.gap,
            "boundary_lo": boundary,
            "boundary_hi": first_fail,
            "all_below_threshold_converged": all(r["converged"] for r in row if r["below_threshold"]),
            "boundary_above_threshold": first_fail is None or first_fail > th.lip_threshold,
            "stray_converged_above_boundary": stray,
            "downward_closed": len(stray) <= 1,
        }
    return rows, summary


def cmd_sweep(args) -> int:
    out = _outdir(args)
    write_manifest(out, args)
    rows, summary = sweep(args.lambdas, args.kappas, args.n, args.tol, args.max_iter, args.threads)
    lines = ["lambda,kappa,status,iterations,lip_cert,below_threshold"]
    for r in rows:
        lines.append(
            f"{r['lambda']!r},{r['kappa']!r},{r['status']},{r['iterations']},{r['lip_cert']!r},{int(r['below_threshold'])}"
        )
    _write(out, "atlas.csv", "\n".join(lines) + "\n")
    curve_l = np.linspace(0.0, 1.0, 201)[1:-1]
    clines = ["lambda,lip_threshold,bohr"]
    for lam in curve_l:
        th = ThresholdSet.for_lambda(float(lam))
        clines.append(f"{float(lam)!r},{th.lip_threshold!r},{th.bohr!r}")
    _write(out, "curves.csv", "\n".join(clines) + "\n")
    rep = {
        "rows": summary,
        "all_below_threshold_converged": all(s["all_below_threshold_converged"] for s in summary.values()),
        "no_false_breakdown": all(s["boundary_above_threshold"] for s in summary.values()),
        "gap": {k: s["gap"] for k, s in summary.items()},
    }
    _write(out, "report.json", _json(rep))
    print(f"sweep: {len(rows)} cells; all cells under the threshold converged: {rep['all_below_threshold_converged']}")
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = parse(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"twistlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ThresholdError as exc:
        print(f"twistlab: refused: {exc}", file=sys.stderr)
        return EXIT_THRESHOLD
    except Exception as exc:
        from .tuner import TuneError

        if isinstance(exc, TuneError):
            print(f"twistlab: {exc}", file=sys.stderr)
            return EXIT_NOCONV
        raise


if __name__ == "__main__":
    sys.exit(main())
