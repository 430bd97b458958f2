"""Command line front end: ``smolu <command> [options]``."""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, defaults, dump_config, load_config, to_sim_config
from .dynamics import simulate, write_trajectory_csv
from .equilibria import NematicState, energy, nematic_field, order_params
from .errors import BracketError, SingularSystemError, StepFailure
from .linear import assemble, nonresonance, spectrum
from .longtime import classify, sweep, write_sweep_csv, write_sweep_json
from .spectral import KernelSpec, write_spectral_csv
from .verify import run_all

log = logging.getLogger("smolu")

EXIT_OK, EXIT_USAGE, EXIT_BLOWUP = 0, 1, 2


def _json_text(obj, indent: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}"{k}": {_json_text(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json_text(v, indent + 1) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return f"{x:.17g}" if math.isfinite(x) else "null"
    return '"' + str(obj).replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_json(obj, path) -> None:
    Path(path).write_text(_json_text(obj) + "\n")


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def write_manifest(out: Path, command: str, values: dict, config_path, started: str) -> None:
    head = [
        f"# command: {command}",
        f"# config_path: {config_path or '(defaults)'}",
        f"# tool_version: smolu {__version__}",
        f"# seed: {values['seed']}",
        f"# started: {started}",
        f"# finished: {_now()}",
    ]
    (out / "manifest.txt").write_text("\n".join(head) + "\n" + dump_config(values))


def _resolve(args) -> dict:
    values = load_config(args.config) if args.config else defaults()
    if args.seed is not None:
        values["seed"] = args.seed
    if args.modes is not None:
        values["n_modes"] = args.modes
        values["linear.n_modes"] = args.modes
    if getattr(args, "b", None) is not None:
        values["kernel.b"] = args.b
    if getattr(args, "sign", None) is not None:
        values["steady.sign"] = 1 if args.sign == "+" else -1
    return values


def _outdir(args, command: str) -> Path:
    out = Path(args.out) if args.out else Path(f"smolu-{command}")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args, values, out: Path) -> int:
    cfg = to_sim_config(values)
    traj = simulate(cfg)
    write_trajectory_csv(traj, out / "trajectory.csv")
    write_spectral_csv(traj.final.field, out / "final_field.csv")
    if traj.aborted:
        (out / "diagnostics.txt").write_text(traj.message + "\n")
        log.error("integration aborted: %s", traj.message)
        return EXIT_BLOWUP
    log.info("simulated to t=%g, %d records", traj.final.t, len(traj))
    return EXIT_OK


def cmd_steady(args, values, out: Path) -> int:
    b, sign = values["kernel.b"], values["steady.sign"]
    state = NematicState.from_b(b, sign)
    N = values["n_modes"]
    g = nematic_field(state, N)
    op = order_params(g)
    k = KernelSpec.maier_saupe(b)
    write_json({"b": b, "r": state.r, "Z": state.Z, "sign": sign, "y1": op.y[0], "y2": op.y[1],
                "energy": energy(g, k)}, out / "steady.json")
    write_spectral_csv(g, out / "steady_field.csv")
    log.info("b=%g r=%.12g Z=%.12g", b, state.r, state.Z)
    return EXIT_OK


def cmd_analyze_linear(args, values, out: Path) -> int:
    b, N = values["kernel.b"], values["linear.n_modes"]
    state = NematicState.from_b(b)
    rep = spectrum(assemble(state, N))
    z = nonresonance(b)[0] if b >= 4 else None
    lam = rep.eigenvalues
    write_json({"b": b, "r": state.r, "N": N, "eigenvalues": [float(x) for x in lam.real],
                "max_imag": rep.max_imag, "kernel_dim": rep.kernel_dim,
                "kernel_angle": rep.kernel_angle, "Z_minus_2pi": z}, out / "linear.json")
    with open(out / "spectrum.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for i, x in enumerate(lam):
            w.writerow([i, f"{x.real:.17g}", f"{x.imag:.17g}"])
    log.info("kernel dimension %d", rep.kernel_dim)
    return EXIT_OK


def _classify_kw(values) -> dict:
    return {"tol_s": values["classify.tol_s"], "tol_var": values["classify.tol_var"],
            "max_iters": values["classify.max_iters"]}


def cmd_classify(args, values, out: Path) -> int:
    res = classify(to_sim_config(values), **_classify_kw(values))
    write_json(res.summary(), out / "classification.json")
    if res.state is not None:
        write_spectral_csv(res.state, out / "final_field.csv")
    log.info("verdict: %s", res.kind)
    return EXIT_OK


def cmd_sweep(args, values, out: Path) -> int:
    cells = sweep(values["sweep.b"], values["sweep.s"], values["sweep.omega"],
                  to_sim_config(values), seed=values["seed"], **_classify_kw(values))
    write_sweep_csv(cells, out / "sweep.csv")
    write_sweep_json(cells, out / "sweep_summary.json")
    for c in cells:
        log.info("b=%g s=%g omega=%g: %s", c.b, c.s, c.omega, c.result.kind)
    return EXIT_OK


def cmd_verify(args, values, out: Path | None) -> int:
    quiet = args.quiet

    def show(r):
        if not quiet:
            print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<36s} {r.detail}  ({r.seconds:.1f}s)",
                  flush=True)

    results = run_all(show)
    n_fail = sum(not r.passed for r in results)
    if not quiet:
        print(f"{len(results) - n_fail}/{len(results)} checks passed")
    if out is not None:
        write_json([{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results],
                   out / "verify.json")
    return EXIT_OK if n_fail == 0 else EXIT_USAGE


COMMANDS = {
    "simulate": cmd_simulate,
    "steady": cmd_steady,
    "analyze-linear": cmd_analyze_linear,
    "classify": cmd_classify,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # subcommand copies must not overwrite flags given before the subcommand
    d = {"default": argparse.SUPPRESS} if suppress else {}
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--config", metavar="PATH", help="key = value configuration file", **d)
    g.add_argument("--out", metavar="DIR", help="output directory", **d)
    g.add_argument("--seed", type=int, metavar="U64", help="override the random seed", **d)
    g.add_argument("--modes", type=int, metavar="N", help="override the Fourier truncation", **d)
    g.add_argument("--quiet", action="store_true", help="only report errors", **d)
    return g


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(False)
    local = _global_flags(True)

    p = argparse.ArgumentParser(prog="smolu", parents=[common],
                                description="Angular Smoluchowski equation toolkit")
    p.add_argument("--version", action="version", version=f"smolu {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[local])
        if name in ("steady", "analyze-linear"):
            sp.add_argument("--b", type=float, help="concentration")
        if name == "steady":
            sp.add_argument("--sign", choices=["+", "-"], help="nematic branch")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    started = _now()
    try:
        values = _resolve(args)
        if values["seed"] >= 2**64:
            raise ConfigError("seed: must fit in 64 bits")
        if args.command == "verify":
            out = _outdir(args, "verify") if args.out else None
            code = cmd_verify(args, values, out)
        else:
            out = _outdir(args, args.command)
            code = COMMANDS[args.command](args, values, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StepFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (BracketError, SingularSystemError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if out is not None:
        write_manifest(out, args.command, values, args.config, started)
    return code


if __name__ == "__main__":
    sys.exit(main())
