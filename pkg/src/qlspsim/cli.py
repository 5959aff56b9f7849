"""Command-line front end: ``qlspsim {gen,solve,sweep,verify}``.

Exit codes: 0 success, 1 an acceptance check failed, 2 usage or IO error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import driver
from .checks import check_instance
from .constants import EXACT_MODE, RESIDUAL_FACTOR, SAMPLED_MODE
from .errors import QlspError
from .problem import SPECTRUM_SHAPES, LseInstance, generate_instance

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SWEEP_COLUMNS = [
    "method", "N", "kappa", "epsilon", "s", "degree_or_time", "query_count", "residual", "seed",
    "status", "fit", "slope", "intercept", "r2", "wall_time",
]

FIT_NOTE = (
    "# fits: query_count (and degree_or_time) vs kappa at fixed (method, N, epsilon) "
    "by ordinary least squares through the origin; "
    "query_count vs ln(1/epsilon) at fixed (method, N, kappa) by ordinary least squares with intercept; "
    "r2 = 1 - SS_res/SS_tot with SS_tot taken about the mean of query_count"
)


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    command: str
    n: list = field(default_factory=lambda: [8])
    kappa: list = field(default_factory=lambda: [10.0])
    eps: list = field(default_factory=lambda: [1e-6])
    sparsity: int = 4
    method: str = "qef"
    shots: int = 10_000
    seed: list = field(default_factory=lambda: [0])
    mode: str = EXACT_MODE
    spectrum: str = "geometric"
    out: str | None = None
    jobs: int = 0
    inputs: list = field(default_factory=list)

    def methods(self) -> list:
        return ["qef", "qrt"] if self.method == "both" else [self.method]

    def validate(self) -> None:
        for name in ("n", "kappa", "eps", "seed"):
            if not getattr(self, name):
                raise UsageError(f"--{name} needs at least one value")
        if any(n < 2 for n in self.n):
            raise UsageError("every N must be >= 2")
        if any(k < 1 for k in self.kappa):
            raise UsageError("every kappa must be >= 1")
        if any(not 0 < e <= 0.1 for e in self.eps):
            raise UsageError("every epsilon must lie in (0, 0.1]")
        if self.sparsity < 2:
            raise UsageError("sparsity must be >= 2")
        if self.method not in ("qef", "qrt", "both"):
            raise UsageError(f"unknown method {self.method!r}")
        if self.mode not in (EXACT_MODE, SAMPLED_MODE):
            raise UsageError(f"unknown mode {self.mode!r}")
        if self.spectrum not in SPECTRUM_SHAPES:
            raise UsageError(f"unknown spectrum {self.spectrum!r}")
        if self.shots < 1:
            raise UsageError("shots must be >= 1")
        if self.out is not None:
            parent = Path(self.out).parent if self.command != "gen" else Path(self.out)
            if parent.exists() and not os.access(parent, os.W_OK):
                raise UsageError(f"output location {parent} is not writable")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with the same keys as the flags; flags win")
    common.add_argument("--n", type=int, nargs="+")
    common.add_argument("--kappa", type=float, nargs="+")
    common.add_argument("--eps", type=float, nargs="+")
    common.add_argument("--sparsity", type=int)
    common.add_argument("--method", choices=["qef", "qrt", "both"])
    common.add_argument("--shots", type=int)
    common.add_argument("--seed", type=int, nargs="+")
    common.add_argument("--mode", choices=[EXACT_MODE, SAMPLED_MODE])
    common.add_argument("--spectrum", choices=list(SPECTRUM_SHAPES))
    common.add_argument("--out")
    common.add_argument("--jobs", type=int, help="worker processes (default: all hardware threads)")
    p = argparse.ArgumentParser(prog="qlspsim", description="Augmented-matrix linear-system solver simulator.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("gen", parents=[common], help="write instance files {N}_{kappa}_{seed}.json into --out")
    for name, helptext in (("solve", "solve instance files, JSON-lines report"),
                           ("verify", "run the invariant suite on instance files")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("inputs", nargs="*", help="instance JSON files")
    sub.add_parser("sweep", parents=[common], help="parameter sweep to CSV with scaling fits")
    return p


def build_config(argv) -> ExperimentConfig:
    args = _parser().parse_args(argv)
    values: dict = {}
    if args.config:
        try:
            values.update(json.loads(Path(args.config).read_text()))
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from exc
    for key, val in vars(args).items():
        if key in ("config", "command") or val is None:
            continue
        if key == "inputs" and not val:
            continue
        values[key] = val
    known = set(ExperimentConfig.__dataclass_fields__) - {"command"}
    unknown = set(values) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for key in ("n", "kappa", "eps", "seed"):
        if key in values and not isinstance(values[key], list):
            values[key] = [values[key]]
    try:
        cfg = ExperimentConfig(command=args.command, **values)
        cfg.n = [int(v) for v in cfg.n]
        cfg.kappa = [float(v) for v in cfg.kappa]
        cfg.eps = [float(v) for v in cfg.eps]
        cfg.seed = [int(v) for v in cfg.seed]
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad configuration: {exc}") from exc
    cfg.validate()
    return cfg


def instance_name(N: int, kappa: float, seed: int) -> str:
    return f"{N}_{kappa:g}_{seed}.json"


def _load(path) -> LseInstance:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(str(p))
    return LseInstance.load(p)


def cmd_gen(cfg: ExperimentConfig, out=None) -> int:
    out = out or sys.stdout
    target = Path(cfg.out or ".")
    try:
        target.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create {target}: {exc.strerror}") from exc
    for N in cfg.n:
        for kappa in cfg.kappa:
            for seed in cfg.seed:
                inst = generate_instance(N, kappa, min(cfg.sparsity, N + 1), seed, cfg.spectrum)
                path = target / instance_name(N, kappa, seed)
                try:
                    inst.save(path)
                except OSError as exc:
                    raise UsageError(f"cannot write {path}: {exc.strerror}") from exc
                print(path, file=out)
    return EXIT_OK


def _need_inputs(cfg):
    if not cfg.inputs:
        raise UsageError("no instance files given")
    missing = [p for p in cfg.inputs if not Path(p).is_file()]
    if missing:
        raise UsageError(f"instance file not found: {missing[0]}")


def cmd_solve(cfg: ExperimentConfig, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    _need_inputs(cfg)
    lines, failing = [], []
    for path in cfg.inputs:
        try:
            inst = _load(path)
        except QlspError as exc:
            failing.append(f"{path}: invalid instance ({exc})")
            continue
        for eps in cfg.eps:
            reports = {}
            for method in cfg.methods():
                rid = f"{path}:{method}:eps={eps:g}"
                try:
                    rep = driver.solve(inst, method, eps, cfg.seed[0], cfg.mode, cfg.shots)
                except QlspError as exc:
                    failing.append(f"{rid}: {exc}")
                    continue
                reports[method] = rep
                d = rep.to_dict()
                d["id"] = rid
                d["passed"] = rep.residual <= RESIDUAL_FACTOR * eps
                lines.append(json.dumps(d))
                if not d["passed"]:
                    failing.append(f"{rid}: residual {rep.residual:.3e} > {RESIDUAL_FACTOR:g}*eps")
            if len(reports) == 2:
                from .linalg import fidelity

                f = fidelity(reports["qef"].x_estimate, reports["qrt"].x_estimate)
                ok = f >= 1 - 10 * eps
                lines.append(json.dumps({"id": f"{path}:cross:eps={eps:g}", "cross_fidelity": f, "passed": ok}))
                if not ok:
                    failing.append(f"{path}: QEF/QRT fidelity {f:.3e} below 1-10*eps")
    text = "\n".join(lines) + ("\n" if lines else "")
    if cfg.out:
        try:
            Path(cfg.out).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {cfg.out}: {exc.strerror}") from exc
    else:
        out.write(text)
    for f in failing:
        print(f"FAIL {f}", file=err)
    return EXIT_FAIL if failing else EXIT_OK


def _sweep_point(args):
    method, N, kappa, eps, s, seed, spectrum, mode, shots = args
    row = {"method": method, "N": N, "kappa": kappa, "epsilon": eps, "s": s, "seed": seed}
    try:
        inst = generate_instance(N, kappa, s, seed, spectrum)
        rep = driver.solve(inst, method, eps, seed, mode, shots)
        q = rep.queries["O_C1"] if method == "qef" else rep.queries["H_queries"]
        row.update(degree_or_time=rep.degree_or_time, query_count=q, residual=rep.residual,
                   status="ok" if rep.passes(RESIDUAL_FACTOR) else "residual_fail", wall_time=rep.wall_time)
    except QlspError as exc:
        row.update(status=f"error: {type(exc).__name__}: {exc}".replace("\n", " "))
    return row


def fit_through_origin(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    slope = float(x @ y / (x @ x))
    return slope, r_squared(y, slope * x)


def fit_linear(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept), r_squared(y, slope * x + intercept)


def r_squared(y, yhat) -> float:
    y = np.asarray(y, float)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum((y - yhat) ** 2))
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)


def fit_rows(rows) -> list:
    ok = [r for r in rows if r.get("status") in ("ok", "residual_fail")]
    out = []
    keys = sorted({(r["method"], r["N"]) for r in ok})
    for method, N in keys:
        sel = [r for r in ok if r["method"] == method and r["N"] == N]
        for eps in sorted({r["epsilon"] for r in sel}, reverse=True):
            pts = [r for r in sel if r["epsilon"] == eps]
            if len({r["kappa"] for r in pts}) >= 2:
                slope, r2 = fit_through_origin([r["kappa"] for r in pts], [r["query_count"] for r in pts])
                out.append({"method": method, "N": N, "epsilon": eps, "status": "fit", "fit": "query_count~kappa",
                            "slope": slope, "intercept": 0.0, "r2": r2})
                slope, r2 = fit_through_origin([r["kappa"] for r in pts], [r["degree_or_time"] for r in pts])
                out.append({"method": method, "N": N, "epsilon": eps, "status": "fit",
                            "fit": "degree_or_time~kappa", "slope": slope, "intercept": 0.0, "r2": r2})
        for kappa in sorted({r["kappa"] for r in sel}):
            pts = [r for r in sel if r["kappa"] == kappa]
            if len({r["epsilon"] for r in pts}) >= 2:
                slope, icpt, r2 = fit_linear([math.log(1 / r["epsilon"]) for r in pts],
                                             [r["query_count"] for r in pts])
                out.append({"method": method, "N": N, "kappa": kappa, "status": "fit",
                            "fit": "query_count~ln(1/epsilon)", "slope": slope, "intercept": icpt, "r2": r2})
    return out


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(FIT_NOTE + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def run_sweep(cfg: ExperimentConfig) -> list:
    grid = [
        (m, N, k, e, min(cfg.sparsity, N + 1), sd, cfg.spectrum, cfg.mode, cfg.shots)
        for m in cfg.methods() for N in cfg.n for k in cfg.kappa for e in cfg.eps for sd in cfg.seed
    ]
    jobs = cfg.jobs or os.cpu_count() or 1
    if jobs == 1 or len(grid) == 1:
        rows = [_sweep_point(g) for g in grid]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, grid))  # order-stable by grid index
    return rows + fit_rows(rows)


def cmd_sweep(cfg: ExperimentConfig, out=None) -> int:
    out = out or sys.stdout
    rows = run_sweep(cfg)
    text = sweep_csv(rows)
    if cfg.out:
        try:
            Path(cfg.out).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {cfg.out}: {exc.strerror}") from exc
    else:
        out.write(text)
    return EXIT_OK


def cmd_verify(cfg: ExperimentConfig, out=None) -> int:
    out = out or sys.stdout
    _need_inputs(cfg)
    all_ok = True
    for path in cfg.inputs:
        try:
            inst = _load(path)
            results = check_instance(inst, epsilon=cfg.eps[0], seed=cfg.seed[0])
        except QlspError as exc:
            print(f"{path}\tFAIL\tvalidation: {exc}", file=out)
            all_ok = False
            continue
        bad = [k for k, v in results.items() if not v]
        all_ok &= not bad
        print(f"{path}\t{'PASS' if not bad else 'FAIL'}\t{len(results) - len(bad)}/{len(results)}"
              + (f"\tfailed: {', '.join(bad)}" if bad else ""), file=out)
    return EXIT_OK if all_ok else EXIT_FAIL


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv=None) -> int:
    try:
        cfg = build_config(argv)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"qlspsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
