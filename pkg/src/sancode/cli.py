"""Command-line front end.

Every command takes its parameters as flags or from a ``--config`` file of
``key = value`` lines (flags win). Tabular results are CSV; when ``--out`` is
given a ``<out>.manifest.json`` is written next to it, and ``sancode replay``
re-runs a manifest to regenerate the same bytes.

Exit codes: 0 success, 2 invalid parameters, 3 output not writable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .allocator import AllocationProblem, optimize
from .config import ConfigError, Param, parse_bool, parse_config, resolve
from .mr_chain import MrConfig, build_state_space, classical_blocking, solve_steady_state
from .mr_sim import SimPlan, simulate, symmetric_config
from .queueing import erlang_b
from .rlnc import intuition_demo
from .sr_blocking import SrConfig, blocking, effective_chunks

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 2, 3


def fmt(x) -> str:
    """Shortest decimal (at most 17 significant digits) that round-trips."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    x = float(x)
    for digits in range(1, 18):
        s = f"{x:.{digits}g}"
        if float(s) == x:
            return s
    return f"{x:.17g}"


def u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {text}")
    return v


@dataclass
class Table:
    header: list[str]
    rows: list[list[Any]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
        return buf.getvalue()


@dataclass
class Command:
    name: str
    help: str
    params: list[Param]
    handler: Callable[[dict], Any]
    stochastic: bool = False
    writes_dir: bool = False


# -- handlers ---------------------------------------------------------------


def cmd_erlang(p: dict) -> str:
    return fmt(erlang_b(p["K"], p["rho"])) + "\n"


SR_HEADER = ["scheme", "s", "T_effective", "slots", "rho", "r", "W", "P_b"]


def sr_rows(scheme: str, s: int, t: int, slots: int, rho: float, r: int, w_min: int, w_max: int) -> list[list]:
    if w_min < 1 or w_max < w_min:
        raise ValueError(f"need 1 <= w-min <= w-max, got {w_min}..{w_max}")
    if scheme == "ucs":
        r = 1
    base = SrConfig(chunks=t, stripe=s, copies=1, slots_per_drive=slots, load=rho, generation=r)
    rows = []
    for w in range(w_min, w_max + 1):
        rows.append([scheme, s, t, slots, rho, r, w, blocking(base.with_(copies=w), scheme)])
    return rows


def cmd_sr_sweep(p: dict) -> Table:
    r = p["r"] if p["scheme"] == "ncs" else 1
    t_eff = effective_chunks(p["T"], p["s"], r) if p["scheme"] == "ncs" else p["T"]
    return Table(SR_HEADER, sr_rows(p["scheme"], p["s"], t_eff, p["slots"], p["rho"], r, p["w_min"], p["w_max"]))


def _mr_config(p: dict) -> MrConfig:
    return MrConfig(
        base_drives=p["m1"], refinement_drives=p["m2"], layer_slots=p["slots"],
        lambda1=p["lambda1"], lambda2=p["lambda2"], mu=p["mu"], scheme=p["scheme"],
        type2_half_rate=p["type2_half_rate"],
    )


MR_PREFIX = ["scheme", "m1", "m2", "slots", "lambda1", "lambda2", "mu"]


def _mr_prefix(cfg: MrConfig) -> list:
    return [cfg.scheme, cfg.base_drives, cfg.refinement_drives, cfg.layer_slots,
            cfg.lambda1, cfg.lambda2, cfg.mu]


def mr_exact_row(cfg: MrConfig) -> list:
    if cfg.scheme == "classical":
        b1, b2 = classical_blocking(cfg)
        k1 = cfg.base_drives * cfg.layer_slots
        m0 = cfg.refinement_drives * cfg.layer_slots
        return _mr_prefix(cfg) + [b1 * b2, b1, b2, (k1 + 1) * (m0 + 1), k1, m0]
    space = build_state_space(cfg)
    steady = solve_steady_state(space, cfg)
    return _mr_prefix(cfg) + [
        steady.saturation_probability, steady.type1_blocking, steady.type2_blocking,
        len(space), space.global_max_type1, space.boundary[0],
    ]


def cmd_mr_exact(p: dict) -> Table:
    header = MR_PREFIX + ["P_s", "P_b1", "P_b2", "states", "K1", "M0"]
    return Table(header, [mr_exact_row(_mr_config(p))])


SIM_HEADER = MR_PREFIX + ["P_s_mean", "std_err", "reps", "events", "seed"]


def cmd_mr_sim(p: dict) -> Table:
    cfg = _mr_config(p)
    plan = SimPlan(cfg, p["events"], p["reps"], p["seed"], p["warmup"])
    est = simulate(plan, workers=p["workers"])
    return Table(SIM_HEADER, [_mr_prefix(cfg) + [est.p_s_mean, est.std_error, p["reps"], p["events"], p["seed"]]])


OPT_HEADER = ["scheme", "m", "m2_opt", "cost", "P_b1", "P_b2", "P_s"]


def cmd_optimize(p: dict) -> Table:
    problem = AllocationProblem(
        total_drives=p["m"], cost_weight=p["c"], lambda_ratio=p["lambda_ratio"],
        total_load=p["load"], layer_slots=p["slots"], scheme=p["scheme"], mu=p["mu"],
    )
    res = optimize(problem)
    return Table(OPT_HEADER, [[p["scheme"], p["m"], res.best_m2, res.cost, *res.per_type_blocking,
                               res.saturation_at_optimum]])


def cmd_rlnc_demo(p: dict) -> str:
    rows = intuition_demo(width=p["width"], seed=p["seed"])
    lines = ["system,drives,decodable"]
    for row in rows:
        a, b = row["drives"]
        lines.append(f"{row['system']},{a}+{b},{'yes' if row['decodable'] else 'no'}")
    for system in ("replication", "coded"):
        ok = [r["decodable"] for r in rows if r["system"] == system]
        lines.append(f"# {system}: {sum(ok)}/{len(ok)} drive pairs recover both segments")
    return "\n".join(lines) + "\n"


# -- figures ----------------------------------------------------------------

SR_FIGURES = {
    # fig: (s, T as captioned, slots, rho, coded generation sizes)
    "4a": (2, 150, 2, 0.2, (2,)),
    "4b": (4, 150, 2, 0.9, (2, 4)),
    "5": (8, 150, 1, 0.9, (2, 4, 8)),
}
FIG8_LOADS = (1, 2, 3, 4, 5, 6, 7, 8)
FIG9_RATIOS = (1, 2, 3, 4, 5)
FIG9_TOTAL_DRIVES = 12
FIG9_LOAD = 6.0
FIG9_SLOTS = 2
FIG9_CLASSICAL_FIXED_M2 = 4


def figure_tables(p: dict) -> dict[str, Table]:
    fig = p["fig"]
    if fig in SR_FIGURES:
        s, t, slots, rho, rs = SR_FIGURES[fig]
        # one T for every curve of a figure, rounded if any coded curve needs it
        t_eff = max(effective_chunks(t, s, r) for r in rs)
        out = {"ucs.csv": Table(SR_HEADER, sr_rows("ucs", s, t_eff, slots, rho, 1, p["w_min"], p["w_max"]))}
        for r in rs:
            out[f"ncs_r{r}.csv"] = Table(SR_HEADER, sr_rows("ncs", s, t_eff, slots, rho, r, p["w_min"], p["w_max"]))
        return out
    if fig == "8":
        header = MR_PREFIX + ["load", "P_s_exact", "P_s_mean", "std_err", "reps", "events", "seed"]
        out = {}
        for scheme in ("urs", "crs"):
            rows = []
            for load in FIG8_LOADS:
                cfg = symmetric_config(load, scheme)
                exact = solve_steady_state(build_state_space(cfg), cfg).saturation_probability
                est = simulate(SimPlan(cfg, p["events"], p["reps"], p["seed"]), workers=p["workers"])
                rows.append(_mr_prefix(cfg) + [float(load), exact, est.p_s_mean, est.std_error,
                                               p["reps"], p["events"], p["seed"]])
            out[f"{scheme}.csv"] = Table(header, rows)
        return out
    if fig == "9":
        header = ["scheme", "m", "lambda_ratio", "m2_opt", "cost", "P_b1", "P_b2", "P_s"]
        out = {}
        for scheme in ("classical", "urs", "crs"):
            rows = []
            for ratio in FIG9_RATIOS:
                res = optimize(AllocationProblem(FIG9_TOTAL_DRIVES, p["c"], float(ratio), FIG9_LOAD,
                                                 FIG9_SLOTS, scheme))
                rows.append([scheme, FIG9_TOTAL_DRIVES, float(ratio), res.best_m2, res.cost,
                             *res.per_type_blocking, res.saturation_at_optimum])
            out[f"{scheme}.csv"] = Table(header, rows)
        rows = []
        for ratio in FIG9_RATIOS:
            problem = AllocationProblem(FIG9_TOTAL_DRIVES, p["c"], float(ratio), FIG9_LOAD,
                                        FIG9_SLOTS, "classical")
            cfg = problem.config(FIG9_CLASSICAL_FIXED_M2)
            b1, b2 = classical_blocking(cfg)
            rows.append(["classical", FIG9_TOTAL_DRIVES, float(ratio), FIG9_CLASSICAL_FIXED_M2,
                         b1 + p["c"] * b2, b1, b2, b1 * b2])
        out["classical_fixed.csv"] = Table(header, rows)
        return out
    raise ValueError(f"unknown figure {fig!r}")


# -- command table ----------------------------------------------------------

GLOBAL_PARAMS = [
    Param("out", str, None, "output path (directory for 'figures'); stdout if omitted"),
    Param("seed", u64, 0, "master seed for stochastic commands"),
]

_MR = [
    Param("m1", int, 8, "drives holding the base layer"),
    Param("m2", int, 4, "refinement (URS), coded (CRS) or dual-layer (classical) drives"),
    Param("slots", int, 2, "layer streams one drive sustains, floor(B/B0)"),
    Param("lambda1", float, 3.0, "Type 1 arrival rate"),
    Param("lambda2", float, 3.0, "Type 2 arrival rate"),
    Param("mu", float, 1.0, "per-user service rate"),
    Param("type2-half-rate", parse_bool, False, "Type 2 departures at j*mu/2 in URS/CRS chains"),
]

COMMANDS: dict[str, Command] = {}


def _register(cmd: Command) -> None:
    COMMANDS[cmd.name] = cmd


_register(Command("erlang", "Erlang-B blocking probability", [
    Param("K", int, None, "number of servers", required=True),
    Param("rho", float, None, "offered load in Erlangs", required=True),
], cmd_erlang))

_register(Command("sr-sweep", "single-resolution blocking vs number of copies W", [
    Param("scheme", str, "ucs", "ucs or ncs", choices=("ucs", "ncs")),
    Param("s", int, 2, "stripe width"),
    Param("T", int, 150, "chunks per file"),
    Param("slots", int, 2, "streams per drive, floor(B/b)"),
    Param("rho", float, 0.2, "per-chunk load lambda/mu"),
    Param("r", int, 1, "coding generation size (ncs)"),
    Param("w-min", int, 1, "first W"),
    Param("w-max", int, 30, "last W"),
], cmd_sr_sweep))

_register(Command("mr-exact", "exact multi-resolution saturation/blocking", [
    Param("scheme", str, "urs", "classical, urs or crs", choices=("classical", "urs", "crs")),
    *_MR,
], cmd_mr_exact))

_register(Command("mr-sim", "Monte-Carlo saturation probability", [
    Param("scheme", str, "urs", "urs or crs", choices=("urs", "crs")),
    *_MR,
    Param("events", int, 100_000, "measured events per replication"),
    Param("reps", int, 20, "replications"),
    Param("warmup", int, None, "warmup events (default 10% of --events)"),
    Param("workers", int, 1, "parallel worker processes"),
], cmd_mr_sim, stochastic=True))

_register(Command("optimize", "optimal drive split minimizing P_b1 + c*P_b2", [
    Param("scheme", str, "crs", "classical, urs or crs", choices=("classical", "urs", "crs")),
    Param("m", int, 12, "total drives m1+m2"),
    Param("slots", int, 2, "layer streams per drive"),
    Param("load", float, 6.0, "(lambda1+lambda2)/mu"),
    Param("lambda-ratio", float, 5.0, "lambda1/lambda2"),
    Param("c", float, 1.0, "weight on Type 2 blocking"),
    Param("mu", float, 1.0, "per-user service rate"),
], cmd_optimize))

_register(Command("figures", "write the data tables for one figure", [
    Param("fig", str, None, "4a, 4b, 5, 8 or 9", choices=("4a", "4b", "5", "8", "9"), required=True),
    Param("out-dir", str, None, "directory for CSVs and manifest (defaults to --out)"),
    Param("w-min", int, 1, "first W (figs 4a/4b/5)"),
    Param("w-max", int, 30, "last W (figs 4a/4b/5)"),
    Param("events", int, 100_000, "measured events per replication (fig 8)"),
    Param("reps", int, 20, "replications (fig 8)"),
    Param("workers", int, 1, "parallel worker processes (fig 8)"),
    Param("c", float, 1.0, "cost weight (fig 9)"),
], figure_tables, stochastic=True, writes_dir=True))

_register(Command("rlnc-demo", "two-segment replication vs coding decode demo", [
    Param("width", int, 8, "segment length in bytes"),
], cmd_rlnc_demo))


def command_params(cmd: Command) -> list[Param]:
    return cmd.params + GLOBAL_PARAMS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sancode", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS.values():
        sp = sub.add_parser(cmd.name, help=cmd.help, description=cmd.help)
        sp.add_argument("--config", help="key = value parameter file; flags override it")
        for param in command_params(cmd):
            kwargs: dict[str, Any] = dict(dest=param.dest, default=argparse.SUPPRESS, help=param.help)
            if param.choices:
                kwargs["choices"] = param.choices
            if param.type is parse_bool:
                kwargs.update(nargs="?", const=True, type=parse_bool, metavar="BOOL")
            else:
                kwargs["type"] = param.type
            sp.add_argument("--" + param.name, **kwargs)
    rp = sub.add_parser("replay", help="re-run a manifest", description="re-run a manifest")
    rp.add_argument("manifest")
    rp.add_argument("--out", default=None, help="write to this path instead of the recorded one")
    return parser


def to_argv(command: str, params: dict) -> list[str]:
    argv = [command]
    for param in command_params(COMMANDS[command]):
        value = params.get(param.dest)
        if value is None:
            continue
        argv += ["--" + param.name, fmt(value) if not isinstance(value, str) else value]
    return argv


def _manifest(command: str, params: dict, outputs: list[str]) -> dict:
    cmd = COMMANDS[command]
    return {
        "command": command,
        "params": params,
        "version": __version__,
        "seed": params.get("seed") if cmd.stochastic else None,
        "outputs": outputs,
        "argv": to_argv(command, params),
    }


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _err(msg: str) -> None:
    print(f"sancode: error: {msg}", file=sys.stderr)


def execute(command: str, params: dict, stdout=None) -> int:
    stdout = stdout or sys.stdout
    cmd = COMMANDS[command]
    try:
        result = cmd.handler(params)
    except (ValueError, TypeError) as exc:
        _err(str(exc))
        return EXIT_USAGE

    try:
        if cmd.writes_dir:
            out_dir = params.get("out_dir") or params.get("out")
            if not out_dir:
                _err("figures needs --out-dir (or --out)")
                return EXIT_USAGE
            out_dir = Path(out_dir)
            names = sorted(result)
            for name in names:
                _write(out_dir / name, result[name].to_csv())
            manifest = _manifest(command, params, [str(out_dir / n) for n in names])
            _write(out_dir / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
            for name in names:
                print(out_dir / name, file=stdout)
            return EXIT_OK

        text = result.to_csv() if isinstance(result, Table) else result
        out = params.get("out")
        if not out:
            stdout.write(text)
            return EXIT_OK
        out = Path(out)
        _write(out, text)
        manifest = _manifest(command, params, [str(out)])
        _write(Path(str(out) + ".manifest.json"), json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        _err(f"cannot write output: {exc}")
        return EXIT_IO
    return EXIT_OK


def replay(manifest_path: str, out: str | None = None, stdout=None) -> int:
    try:
        manifest = json.loads(Path(manifest_path).read_text())
        command, params = manifest["command"], dict(manifest["params"])
    except (OSError, ValueError, KeyError) as exc:
        _err(f"cannot read manifest {manifest_path}: {exc}")
        return EXIT_USAGE
    if command not in COMMANDS:
        _err(f"manifest names unknown command {command!r}")
        return EXIT_USAGE
    if out is not None:
        params["out"] = out
        if COMMANDS[command].writes_dir:
            params["out_dir"] = out
    return execute(command, params, stdout)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command == "replay":
        return replay(ns.manifest, ns.out)
    cmd = COMMANDS[ns.command]
    params = command_params(cmd)
    flags = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    try:
        file_values = parse_config(ns.config, params) if ns.config else {}
        resolved = resolve(params, file_values, flags)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_USAGE
    return execute(ns.command, resolved)


if __name__ == "__main__":
    sys.exit(main())
