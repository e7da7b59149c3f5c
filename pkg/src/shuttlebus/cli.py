"""Command-line front end.

Subcommands: synth, scaling, emit, sample, threshold, archsweep, compare.
Tables are CSV with the fully resolved configuration echoed as ``#`` comment
lines; threshold estimates are JSON. Exit codes: 0 success, 1 usage error,
2 cyclic or infeasible input, 3 exact-solve budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .chain_graph import CyclicDependency
from .circuit_gen import MemoryExperiment, build_memory_circuit, emit_circuit_text
from .code_model import InvalidCode, InvalidDistance, code_for
from .metrics import SCALING_COLUMNS, ArchParams, rows_to_csv, scaling_sweep
from .noise_model import NoiseParams, dump_config, load_config
from .sim_decode import (
    SimResult,
    extrapolate,
    fit_suppression,
    per_round,
    pseudo_threshold,
    run_memory,
    sample_shots,
    write_shots,
)
from .sim_decode.analysis import DEFAULT_SHOT_CAP, DEFAULT_TARGET_FAILURES
from .synthesis import EXACT_MAX_DISTANCE, STRATEGIES, BudgetExceeded, insert_idle_dots, synthesize
from .synthesis.exact import ObjectiveWeights
from .synthesis.placement import dump_placement

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_BUDGET = 0, 1, 2, 3

SWEEPS = {"p": "p_gate", "t2_qd": "T2_qd", "t2_bus": "T2_bus"}
SWEEP_DEFAULTS = {
    "p": "0.006,0.008,0.01,0.012,0.014,0.017,0.02",
    "t2_qd": "2e-05,3e-05,4e-05,5e-05,7e-05,1e-04,1.4e-04",
    "t2_bus": "5e-07,7e-07,1e-06,1.4e-06,2e-06,2.8e-06,4e-06",
}
# noise used by the architecture experiments unless overridden
ARCH_NOISE = {"p_gate": 0.001, "T2_qd": 100e-6, "T2_bus": 10e-6}
COMPARE_CONFIGS = "200e-9:5,100e-9:10,100e-9:20"
FLOOR_FLAG = "below measurable floor"

SIM_COLUMNS = ("shots", "failures", "p_shot", "p_round", "p_round_lo", "p_round_hi", "seed")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- argument types ------------------------------------------------------------

def _number(text: str) -> float:
    """Float that also accepts ``inf``; NaN is rejected."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if math.isnan(v):
        raise argparse.ArgumentTypeError("NaN is not allowed")
    return v


def _numbers(text: str) -> list[float]:
    """Comma list, or ``lo:hi:n`` for n geometrically spaced points."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("grid must be lo:hi:n")
        lo, hi, n = _number(parts[0]), _number(parts[1]), int(parts[2])
        if not (0 < lo < hi < math.inf) or n < 2:
            raise argparse.ArgumentTypeError("grid needs 0 < lo < hi and n >= 2")
        return [float(f"{x:.6g}") for x in np.geomspace(lo, hi, n)]
    return [_number(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from None


def _names(choices: Sequence[str]) -> Callable[[str], list[str]]:
    def parse(text: str) -> list[str]:
        out = [t.strip() for t in text.split(",") if t.strip()]
        bad = [t for t in out if t not in choices]
        if bad:
            raise argparse.ArgumentTypeError(f"unknown value(s) {bad}; choose from {', '.join(choices)}")
        return out
    return parse


# -- shared option groups ------------------------------------------------------

PHYS_FLAGS = {
    # flag dest: (section, field)
    "d_qu": ("arch", "d_qu"),
    "v_sh": ("arch", "v_sh"),
    "t_1q": ("arch", "t_1q"),
    "t_2q": ("arch", "t_2q"),
    "t_meas": ("arch", "t_meas"),
    "p": ("noise", "p_gate"),
    "t2_qd": ("noise", "T2_qd"),
    "t2_bus": ("noise", "T2_bus"),
    "l_c": ("noise", "l_c"),
}


def _add_physics(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("physical parameters (SI units; flags override --config)")
    g.add_argument("--config", help="INI file with [arch] and [noise] sections")
    g.add_argument("--d-qu", type=_number, help="dot pitch [m] (default 1e-7)")
    g.add_argument("--v-sh", type=_number, help="shuttle velocity [m/s] (default 2.8)")
    g.add_argument("--t-1q", type=_number, help="single-qubit gate time [s] (default 1e-7)")
    g.add_argument("--t-2q", type=_number, help="two-qubit gate time [s] (default 5e-8)")
    g.add_argument("--t-meas", type=_number, help="measurement time [s] (default 5e-7)")
    g.add_argument("--p", type=_number, help="gate depolarizing probability (0 = off)")
    g.add_argument("--t2-qd", type=_number, help="idle T2* in a dot [s] (inf = off)")
    g.add_argument("--t2-bus", type=_number, help="T2* while shuttling [s] (inf = off)")
    g.add_argument("--l-c", type=_number, help="correlation length [m] (default 1.3e-8)")


def _add_code(p: argparse.ArgumentParser, default_d: int | None = 3) -> None:
    p.add_argument("--d", type=int, default=default_d, help="rotated surface code distance (odd)")
    p.add_argument("--code", help="named code (steane) or code JSON file; overrides --d")


def _add_sim(p: argparse.ArgumentParser, basis: str) -> None:
    g = p.add_argument_group("simulation")
    g.add_argument("--basis", choices=("X", "Z"), default=basis, help=f"memory basis (default {basis})")
    g.add_argument("--rounds", type=int, help="rounds per experiment (default 3d)")
    g.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    g.add_argument("--jobs", type=int, default=1, help="worker processes for sweep cells")
    g.add_argument("--budget", type=_number, default=300.0, help="exact-solve budget per layout [s]")


def _add_stopping(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-shots", type=int, default=DEFAULT_SHOT_CAP,
                   help=f"shot cap per point (default {DEFAULT_SHOT_CAP})")
    p.add_argument("--target-failures", type=int, default=DEFAULT_TARGET_FAILURES,
                   help=f"stop a point after this many logical failures (default {DEFAULT_TARGET_FAILURES})")


def _add_out(p: argparse.ArgumentParser, json_out: bool = False) -> None:
    p.add_argument("--out", "-o", help="output file (default stdout)")
    if json_out:
        p.add_argument("--json", help="threshold estimate file (default: --out with .json suffix)")


def resolve_physics(args, noise_defaults: dict | None = None) -> tuple[ArchParams, NoiseParams]:
    arch, noise = ArchParams(), NoiseParams(**(noise_defaults or {}))
    if getattr(args, "config", None):
        arch, noise = load_config(args.config, arch, noise)
    over: dict[str, dict] = {"arch": {}, "noise": {}}
    for dest, (section, name) in PHYS_FLAGS.items():
        v = getattr(args, dest, None)
        if v is not None:
            over[section][name] = v
    return replace(arch, **over["arch"]), replace(noise, **over["noise"])


def _code_arg(args):
    if args.code:
        return args.code
    if args.d is None:
        raise UsageError("give --d or --code")
    return args.d


UNECHOED = {"out", "json", "jobs", "func", "command", "shots_out"}


def config_header(args, arch: ArchParams | None = None, noise: NoiseParams | None = None) -> str:
    """Resolved options and physics as ``key = value`` lines (output paths left out)."""
    lines = [f"shuttlebus {args.command}"]
    for k in sorted(vars(args)):
        if k in UNECHOED or k in PHYS_FLAGS or k == "config":
            continue
        lines.append(f"{k} = {_echo(getattr(args, k))}")
    if arch is not None and noise is not None:
        lines += dump_config(arch, noise).rstrip("\n").splitlines()
    return "\n".join(lines) + "\n"


def _echo(v) -> str:
    if isinstance(v, tuple):
        return ":".join(_echo(x) for x in v)
    if isinstance(v, list):
        return ",".join(_echo(x) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def _write(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".9g")
    return v


# -- sweep execution -----------------------------------------------------------

def cell_seed(master: int, index: int) -> int:
    """Seed of sweep cell ``index``, a pure function of the master seed."""
    ss = np.random.SeedSequence(master, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class Cell:
    index: int
    code: object  # distance or code name
    strategy: str
    basis: str
    rounds: int | None
    arch: ArchParams
    noise: NoiseParams
    seed: int
    max_shots: int
    target_failures: int
    budget: float | None = 60.0


_LAYOUTS: dict = {}


def _layout(code, strategy: str, budget):
    key = (code, strategy, budget)
    if key not in _LAYOUTS:
        spec = code_for(code)
        res = synthesize(spec, strategy, budget=budget)
        _LAYOUTS[key] = (spec, insert_idle_dots(res.placement, res.chains), res.chains, res.optimality)
    return _LAYOUTS[key]


def experiment_for(cell: Cell) -> MemoryExperiment:
    spec, layout, chains, _ = _layout(cell.code, cell.strategy, cell.budget)
    return MemoryExperiment(spec, layout, tuple(chains), cell.basis, cell.rounds, cell.arch, cell.noise)


def run_cell(cell: Cell) -> SimResult:
    exp = experiment_for(cell)
    if cell.noise.lossless:
        # a noiseless circuit never fails; nothing to sample
        return SimResult(0, 0, exp.num_rounds, 0.0, 0.0, 0.0, 0.0, cell.seed)
    return run_memory(build_memory_circuit(exp), cell.seed, cell.max_shots, cell.target_failures)


def run_cells(cells: Sequence[Cell], jobs: int = 1) -> list[SimResult]:
    """Results in cell order; the worker count never changes the numbers."""
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_cell, cells))
    return [run_cell(c) for c in cells]


def _sim_fields(r: SimResult) -> dict:
    return {k: getattr(r, k) for k in SIM_COLUMNS}


# -- commands -----------------------------------------------------------------

def cmd_synth(args) -> int:
    if args.strategy not in STRATEGIES:
        raise UsageError(f"unknown strategy {args.strategy}")
    weights = ObjectiveWeights(args.T, args.D, args.objective == "lexicographic")
    code = _code_arg(args)
    status = EXIT_OK
    try:
        res = synthesize(code, args.strategy, weights, budget=args.budget, strict=args.strategy == "optimal")
    except BudgetExceeded as exc:
        res = exc.incumbent
        status = EXIT_BUDGET
    layout = insert_idle_dots(res.placement, res.chains)
    summary = {
        "strategy": res.strategy,
        "optimality": res.optimality,
        "objective": res.objective,
        "sum_t": res.sum_t,
        "slice_times": list(res.slice_times),
        "total_distance": res.total_distance,
        "extra_dots": len(layout.idle_dots),
        "bus_length": layout.bus_length,
    }
    bus = {str(q): layout.bus_position(q) for q in sorted(res.placement, key=res.placement.get)}
    if args.out:
        meta = dict(summary, code=str(code), idle_dots=[list(x) for x in layout.idle_dots], bus_position=bus)
        Path(args.out).write_text(dump_placement(res.placement, meta))
    for k, v in summary.items():
        print(f"{k}: {_echo(v) if isinstance(v, list) else _fmt(v)}")
    if status == EXIT_BUDGET:
        print("error: exact solve budget exhausted; incumbent shown", file=sys.stderr)
    return status


def cmd_scaling(args) -> int:
    if args.d_min > args.d_max:
        raise UsageError("--d-min exceeds --d-max")
    arch, _ = resolve_physics(args)
    distances = [d for d in range(args.d_min, args.d_max + 1) if d % 2 == 1 and d >= 3]
    rows = []
    for strategy in args.strategies:
        rows += scaling_sweep(distances, strategy, arch, budget=args.budget)
    _write(rows_to_csv(rows, SCALING_COLUMNS, config_header(args, arch, NoiseParams())), args.out)
    return EXIT_OK


def cmd_emit(args) -> int:
    arch, noise = resolve_physics(args)
    cell = Cell(0, _code_arg(args), args.strategy, args.basis, args.rounds, arch, noise, 0, 0, 0, args.budget)
    _write(emit_circuit_text(build_memory_circuit(experiment_for(cell))), args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    if args.shots < 1:
        raise UsageError("--shots must be positive")
    arch, noise = resolve_physics(args)
    cell = Cell(0, _code_arg(args), args.strategy, args.basis, args.rounds, arch, noise,
                args.seed, args.shots, args.shots + 1, args.budget)
    circ = build_memory_circuit(experiment_for(cell))
    if args.shots_out:
        write_shots(args.shots_out, sample_shots(circ, args.shots, args.seed),
                    {"config": config_header(args, arch, noise)})
    res = run_memory(circ, args.seed, args.shots, args.shots + 1)
    out = {"config": config_header(args, arch, noise).splitlines(), **asdict(res)}
    _write(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_threshold(args) -> int:
    arch, base = resolve_physics(args)
    field_name = SWEEPS[args.sweep]
    values = args.values if args.values is not None else _numbers(SWEEP_DEFAULTS[args.sweep])
    basis = args.basis or ("Z" if args.sweep == "p" else "X")
    args.basis = basis
    args.values = values
    if len(args.distances) < 2:
        raise UsageError("need at least two distances")
    cells = []
    for d in args.distances:
        for x in values:
            noise = replace(base, **{field_name: x})
            i = len(cells)
            cells.append(Cell(i, d, args.strategy, basis, args.rounds, arch, noise, cell_seed(args.seed, i),
                              args.max_shots, args.target_failures, args.budget))
    results = run_cells(cells, args.jobs)
    rows, curves = [], {}
    for c, r in zip(cells, results):
        rows.append({"index": c.index, "d": c.code, "strategy": c.strategy, "basis": basis,
                     "param": args.sweep, "value": getattr(c.noise, field_name),
                     **_sim_fields(r), "flag": "lossless" if c.noise.lossless else ""})
        curves.setdefault(c.code, []).append((getattr(c.noise, field_name), r.p_round))
    est = pseudo_threshold(curves, log_x=args.sweep == "p")
    cols = ("index", "d", "strategy", "basis", "param", "value") + SIM_COLUMNS + ("flag",)
    header = config_header(args, arch, base)
    _write(rows_to_csv([{k: _fmt(v) for k, v in r.items()} for r in rows], cols, header), args.out)
    _write_estimate(est.to_json(), args)
    return EXIT_OK


def _write_estimate(text: str, args) -> None:
    path = args.json
    if path is None and args.out not in (None, "-"):
        path = str(Path(args.out).with_suffix(".json"))
    _write(text, path)


def cmd_archsweep(args) -> int:
    arch0, noise = resolve_physics(args, ARCH_NOISE)
    if len(args.distances) < 2:
        raise UsageError("need at least two distances")
    cells = []
    for v in args.v_sh_values:
        for d in args.distances:
            for dq in args.d_qu_values:
                i = len(cells)
                cells.append(Cell(i, d, args.strategy, args.basis, args.rounds,
                                  replace(arch0, d_qu=dq, v_sh=v), noise, cell_seed(args.seed, i),
                                  args.max_shots, args.target_failures, args.budget))
    results = run_cells(cells, args.jobs)
    estimates = {}
    for v in args.v_sh_values:
        curves: dict = {}
        for c, r in zip(cells, results):
            if c.arch.v_sh == v:
                curves.setdefault(c.code, []).append((c.arch.d_qu, r.p_round))
        estimates[v] = pseudo_threshold(curves)
    rows = []
    for c, r in zip(cells, results):
        est = estimates[c.arch.v_sh]
        rows.append({"index": c.index, "v_sh": c.arch.v_sh, "d_qu": c.arch.d_qu, "d": c.code,
                     **_sim_fields(r), "threshold_d_qu": "" if est.mean is None else est.mean,
                     "threshold_std": "" if est.std is None else est.std})
    cols = ("index", "v_sh", "d_qu", "d") + SIM_COLUMNS + ("threshold_d_qu", "threshold_std")
    header = config_header(args, arch0, noise)
    _write(rows_to_csv([{k: _fmt(v) for k, v in r.items()} for r in rows], cols, header), args.out)
    if args.json:
        blob = {format(v, "g"): json.loads(e.to_json()) for v, e in estimates.items()}
        Path(args.json).write_text(json.dumps(blob, indent=2) + "\n")
    return EXIT_OK


def _parse_configs(text: str) -> list[tuple[float, float]]:
    out = []
    for item in text.split(","):
        try:
            dq, v = item.split(":")
            out.append((_number(dq), _number(v)))
        except (ValueError, argparse.ArgumentTypeError):
            raise argparse.ArgumentTypeError(f"config must be d_qu:v_sh, got {item!r}") from None
    return out


def measurable_floor(rounds: int, max_shots: int, target_failures: int) -> float:
    """Smallest per-round rate that reaches the failure target within the shot cap."""
    return per_round(target_failures / max_shots, rounds)


def cmd_compare(args) -> int:
    arch0, noise = resolve_physics(args, ARCH_NOISE)
    distances = sorted(set(args.distances))
    strategies, configs = args.strategies, args.configs
    nd = len(distances)
    groups = [(ci, si) for ci in range(len(configs)) for si in range(len(strategies))]
    done: dict[tuple[int, int], list[tuple[int, float]]] = {g: [] for g in groups}
    rows: dict[int, dict] = {}
    for k, d in enumerate(distances):
        wave = []
        for ci, si in groups:
            dq, v = configs[ci]
            strategy = strategies[si]
            index = (ci * len(strategies) + si) * nd + k
            arch = replace(arch0, d_qu=dq, v_sh=v)
            row = {"index": index, "config": ci, "d_qu": dq, "v_sh": v, "strategy": strategy, "d": d,
                   "optimality": "", "predicted": "", "flag": "", "seed": cell_seed(args.seed, index)}
            rows[index] = row
            rounds = args.rounds or 3 * d
            if strategy == "optimal" and d > EXACT_MAX_DISTANCE:
                row["flag"] = f"optimal limited to d<={EXACT_MAX_DISTANCE}"
                continue
            pred = _predict(done[(ci, si)], d)
            if pred is not None:
                row["predicted"] = pred
                if pred < measurable_floor(rounds, args.max_shots, args.target_failures):
                    row["flag"] = FLOOR_FLAG
                    continue
            wave.append((ci, si, Cell(index, d, strategy, args.basis, args.rounds, arch, noise, row["seed"],
                                      args.max_shots, args.target_failures, args.budget)))
        results = run_cells([c for _, _, c in wave], args.jobs)
        for (ci, si, c), r in zip(wave, results):
            rows[c.index].update(_sim_fields(r))
            rows[c.index]["optimality"] = _layout(c.code, c.strategy, c.budget)[3]
            if r.failures:
                done[(ci, si)].append((c.code, r.p_round))
    cols = ("index", "config", "d_qu", "v_sh", "strategy", "d", "optimality") + SIM_COLUMNS + ("predicted", "flag")
    header = config_header(args, arch0, noise)
    ordered = [{k: _fmt(v) for k, v in rows[i].items()} for i in sorted(rows)]
    _write(rows_to_csv(ordered, cols, header), args.out)
    return EXIT_OK


def _predict(measured: list[tuple[int, float]], d: int) -> float | None:
    """Suppression-law extrapolation from at least two measured distances."""
    if len(measured) < 2:
        return None
    ds, ps = zip(*measured)
    lam, amp = fit_suppression(ds, ps)
    return extrapolate(lam, amp, d)


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="shuttlebus", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="place qubits on the bus and insert idle dots")
    _add_code(p)
    p.add_argument("--strategy", choices=STRATEGIES, default="zigzag")
    p.add_argument("--objective", choices=("lexicographic", "weighted"), default="lexicographic",
                   help="sum(t) first then distance, or the weighted sum T*sum(t) + D*distance")
    p.add_argument("--T", type=_number, default=1000.0, help="time weight (default 1000)")
    p.add_argument("--D", type=_number, default=1.0, help="distance weight (default 1)")
    p.add_argument("--budget", type=_number, default=300.0, help="exact-solve time budget [s]")
    _add_out(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("scaling", help="slice times, distance and extra dots versus d (CSV)")
    p.add_argument("--d-min", type=int, default=3)
    p.add_argument("--d-max", type=int, default=15)
    p.add_argument("--strategies", type=_names(STRATEGIES), default=["naive", "zigzag"])
    p.add_argument("--budget", type=_number, default=60.0, help="exact-solve time budget per distance [s]")
    _add_physics(p)
    _add_out(p)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("emit", help="write the memory-experiment circuit in Stim text format")
    _add_code(p)
    p.add_argument("--strategy", choices=STRATEGIES, default="zigzag")
    _add_sim(p, "Z")
    _add_physics(p)
    _add_out(p)
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("sample", help="sample and decode a fixed number of shots (JSON summary)")
    _add_code(p)
    p.add_argument("--strategy", choices=STRATEGIES, default="zigzag")
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--shots-out", help="also export the raw shots (bit-packed, with a .json header)")
    _add_sim(p, "Z")
    _add_physics(p)
    _add_out(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("threshold", help="sweep one noise source over several distances")
    p.add_argument("--sweep", choices=tuple(SWEEPS), required=True)
    p.add_argument("--values", type=_numbers, help="comma list or lo:hi:n (default per sweep)")
    p.add_argument("--distances", type=_ints, default=[3, 5, 7])
    p.add_argument("--strategy", choices=STRATEGIES, default="zigzag")
    _add_sim(p, None)
    _add_stopping(p)
    _add_physics(p)
    _add_out(p, json_out=True)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("archsweep", help="sweep dot pitch and shuttle velocity")
    p.add_argument("--d-qu-values", type=_numbers, default=[100e-9, 200e-9, 400e-9, 800e-9])
    p.add_argument("--v-sh-values", type=_numbers, default=[1.0, 2.0, 5.0, 10.0])
    p.add_argument("--distances", type=_ints, default=[3, 5, 7])
    p.add_argument("--strategy", choices=STRATEGIES, default="zigzag")
    _add_sim(p, "X")
    _add_stopping(p)
    _add_physics(p)
    _add_out(p, json_out=True)
    p.set_defaults(func=cmd_archsweep)

    p = sub.add_parser("compare", help="logical error rate versus d per strategy and architecture")
    p.add_argument("--strategies", type=_names(STRATEGIES), default=["naive", "zigzag", "optimal"])
    p.add_argument("--configs", type=_parse_configs, default=_parse_configs(COMPARE_CONFIGS),
                   help=f"d_qu:v_sh pairs (default {COMPARE_CONFIGS})")
    p.add_argument("--distances", type=_ints, default=[3, 5, 7, 9])
    _add_sim(p, "X")
    _add_stopping(p)
    _add_physics(p)
    _add_out(p)
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"shuttlebus {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidDistance, InvalidCode, ValueError, FileNotFoundError) as exc:
        if isinstance(exc, CyclicDependency):
            print(f"shuttlebus {args.command}: cyclic chain dependencies: {exc}", file=sys.stderr)
            return EXIT_INFEASIBLE
        print(f"shuttlebus {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        print(f"shuttlebus {args.command}: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
