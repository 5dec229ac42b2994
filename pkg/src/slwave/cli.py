"""Command-line entry point: ``slwave <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 usage or parameter error,
3 numeric or data error.  Failures print one line ``ERROR:<code>: <message>``
to standard error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import checks, inverse, model, spectrum, wave
from .errors import DataError, NumericError, ParameterError, SLWaveError
from .grid import Grid, write_grid_function, write_matrix_field
from .slcore import load_potential

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(ParameterError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    l: float = 1.0
    n: int = 2001
    cfl: float = 0.95
    delta: float | None = None
    q: str | None = None
    out: Path | None = None

    def __post_init__(self):
        if self.delta is not None and self.delta <= 0:
            raise ParameterError("--delta must be positive")
        if not 0 < self.cfl <= 1:
            raise ParameterError("--cfl must lie in (0, 1]")

    @property
    def grid(self) -> Grid:
        return Grid(self.l, self.n)

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        return cls(
            l=args.l, n=args.n, cfl=getattr(args, "cfl", 0.95), delta=getattr(args, "delta", None),
            q=getattr(args, "q", None), out=Path(args.out) if getattr(args, "out", None) else None,
        )

    def potential(self):
        if self.q is None:
            raise UsageError("--q is required")
        return load_potential(self.q, self.grid)


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive_float(text: str) -> float:
    v = float(text)
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--l", type=_positive_float, default=1.0, help="interval length (default 1)")
    common.add_argument("--n", type=int, default=2001, help="odd node count (default 2001)")

    pot = argparse.ArgumentParser(add_help=False)
    pot.add_argument("--q", help="potential: const:c | poly:a0,a1,... | trig:a,b,k | x,value CSV")
    pot.add_argument("--delta", type=_positive_float,
                     help="half-width of the zone around l/2 excluded from the model (default 5h)")

    p = _Parser(prog="slwave", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("forward", parents=[common, pot], help="potential -> T, rho, P, Q")
    s.add_argument("--out", required=True, help="output directory")

    s = sub.add_parser("inverse", parents=[common], help="P, Q, meta.json -> q candidates")
    s.add_argument("model_dir", help="directory written by 'forward'")
    s.add_argument("--out", help="output directory (default: model_dir)")

    s = sub.add_parser("roundtrip", parents=[common, pot], help="forward + inverse in memory")
    s.add_argument("--out", help="optionally write the recovered candidates here")

    s = sub.add_parser("simulate", parents=[common], help="boundary-control wave simulation")
    s.add_argument("--q", required=True, help="potential spec or CSV")
    s.add_argument("--cfl", type=float, default=0.95, help="dt / h (default 0.95)")
    s.add_argument("--T", type=_positive_float, required=True, help="final time")
    s.add_argument("--controls", help="CSV with columns t,f0,fl (default: a smooth bump at x=0)")
    s.add_argument("--snapshots", type=_float_list, default=None, help="times t1,t2,...")
    s.add_argument("--dump", action="store_true", help="also write the binary field field.bin")
    s.add_argument("--out", required=True, help="output directory")

    s = sub.add_parser("spectrum", help="evaluate atom sets, eikonals and distances")
    s.add_argument("query", help="JSON query file")
    s.add_argument("--out", help="write results here instead of standard output")

    s = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    s.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    s.add_argument("--only", help="comma-separated check-name prefixes")
    return p


# ---------------------------------------------------------------------------

def cmd_forward(args) -> int:
    cfg = RunConfig.from_args(args)
    pot = cfg.potential()
    gd, (T, _, _), mc = model.forward(pot, cfg.delta)
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_matrix_field(cfg.out / "T.csv", T)
    write_grid_function(cfg.out / "rho.csv", gd.rho)
    model.write_model(cfg.out, mc, {"q": cfg.q, "lambda1": pot.lambda1})
    print(f"wrote {cfg.out}: T.csv rho.csv P.csv Q.csv dP.csv meta.json")
    return EXIT_OK


def cmd_inverse(args) -> int:
    mc = model.read_model(args.model_dir)
    res = inverse.recover(mc)
    out = Path(args.out or args.model_dir)
    inverse.write_recovery(out, res)
    print(f"wrote {out}: q_plus.csv q_minus.csv diagnostics.json")
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    cfg = RunConfig.from_args(args)
    pot = cfg.potential()
    _, _, mc = model.forward(pot, cfg.delta)
    res = inverse.recover(mc)
    err = res.error_against(pot.values, checks.roundtrip_mask(pot.grid, mc.delta))
    if cfg.out is not None:
        inverse.write_recovery(cfg.out, res)
    print(f"roundtrip_error={err:.6e}")
    return EXIT_OK


def _default_control(dt: float, steps: int, T: float) -> wave.BoundaryControl:
    return wave.BoundaryControl.from_functions(wave.smooth_bump(0.0, min(T, 0.25)), None, dt, steps)


def cmd_simulate(args) -> int:
    cfg = RunConfig.from_args(args)
    pot = cfg.potential()
    g = pot.grid
    dt = cfg.cfl * g.h
    # the run covers T rounded up to whole steps; snapshots snap to the nearest step
    steps = max(1, math.ceil(args.T / dt - 1e-9))
    T = steps * dt
    if args.controls:
        c = wave.read_controls(args.controls, dt)
    else:
        c = _default_control(dt, steps, args.T)
    w = wave.simulate_boundary_control(pot, c, T, cfg.cfl)
    cfg.out.mkdir(parents=True, exist_ok=True)
    times = args.snapshots if args.snapshots is not None else [args.T]
    index = []
    for i, t in enumerate(times):
        if not 0 <= t <= T + 1e-12:
            raise ParameterError(f"snapshot time {t} outside [0, {T}]")
        k = int(round(t / dt))
        name = f"snapshot_{i:03d}.csv"
        wave.write_snapshot(cfg.out / name, w, k * dt)
        index.append({
            "file": name, "requested_t": t, "t": k * dt,
            "support": wave.support_bounds(w, k * dt) if k else [],
            "leakage": wave.leakage_fraction(w, k * dt) if k else 0.0,
        })
    if args.dump:
        wave.dump_field(cfg.out / "field.bin", w)
    meta = {"l": g.l, "n": g.n, "cfl": cfg.cfl, "dt": dt, "steps": steps, "T": T,
            "q": cfg.q, "snapshots": index}
    (cfg.out / "simulation.json").write_text(json.dumps(meta, indent=2) + "\n")
    for s in index:
        print(f"t={s['t']:.6g} leakage={s['leakage']:.3e} file={s['file']}")
    return EXIT_OK


def _exact(v) -> dict:
    v = spectrum.exact(v)
    return {"value": float(v), "exact": str(v)}


def _set_out(E: spectrum.IntervalSet) -> dict:
    d = E.to_dict()
    d["exact"] = [[str(a), str(b)] for a, b in E.intervals]
    return d


def run_spectrum_query(q: dict, l) -> dict:
    op = q.get("op")
    if op == "atom_set":
        return _set_out(spectrum.atom_set(spectrum.Atom(q["x"], l), q["t"]))
    if op == "distance":
        return _exact(spectrum.spectrum_distance(spectrum.Atom(q["a"], l), spectrum.Atom(q["b"], l)))
    if op == "eikonal":
        grid = Grid(float(l), int(q.get("n", 11)))
        f = spectrum.eikonal_profile(spectrum.Atom(q["x"], l), grid)
        return {"x": grid.nodes.tolist(), "f": f.values.tolist()}
    if op == "neighborhood":
        E = spectrum.ElementarySet.from_dict({"l": l, **q["set"]})
        return _set_out(spectrum.neighborhood(E, q["t"]))
    if op in ("join", "meet", "complement"):
        sets = [spectrum.ElementarySet.from_dict({"l": l, **s}) for s in q["sets"]]
        return _set_out(spectrum.lattice_op(op, *sets))
    if op == "symdiff_measure":
        a, b = (spectrum.IntervalSet.from_dict({"l": l, **s}) for s in q["sets"])
        return _exact(spectrum.symdiff_measure(a, b))
    raise DataError(f"unknown spectrum query op {op!r}")


def cmd_spectrum(args) -> int:
    try:
        doc = json.loads(Path(args.query).read_text())
        l = doc.get("l", 1.0)
        queries = doc["queries"]
    except (OSError, ValueError, KeyError, AttributeError) as exc:
        raise DataError(f"cannot read query file {args.query}: {exc}") from None
    results = []
    for q in queries:
        try:
            results.append({"query": q, "result": run_spectrum_query(q, l)})
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed query {q!r}: {exc}") from None
    text = json.dumps({"l": float(spectrum.exact(l)), "results": results}, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    Grid(args.l, args.n)
    names = list(checks.REGISTRY)
    if args.only:
        prefixes = [p.strip() for p in args.only.split(",") if p.strip()]
        names = [n for n in names if any(n.startswith(p) for p in prefixes)]
        if not names:
            raise UsageError(f"no checks match {args.only!r}")
    results = checks.run_all(checks.Context(args.l, args.n), names, max(1, args.jobs))
    print(checks.format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {
    "forward": cmd_forward,
    "inverse": cmd_inverse,
    "roundtrip": cmd_roundtrip,
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
}


def _fail(code: str, message: str, status: int) -> int:
    print(f"ERROR:{code}: {' '.join(str(message).split())}", file=sys.stderr)
    return status


def run_command(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (ParameterError, UsageError) as exc:
        return _fail(exc.code, exc, EXIT_USAGE)
    except SLWaveError as exc:
        return _fail(exc.code, exc, EXIT_NUMERIC)
    except OSError as exc:
        return _fail("io", exc, EXIT_NUMERIC)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return _fail(NumericError.code, exc, EXIT_NUMERIC)


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
