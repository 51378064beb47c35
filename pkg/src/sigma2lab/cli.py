"""Batch front end.

Subcommands
-----------
solve        run the continuation solver, write solution dump + monitors CSV
verify       run the randomized identity suites
degeneracy   emit the n=3 obstruction-path sweep or the n=2 sign frontier
sweep-a      solve the same data over a descending list of A values
moser-check  evaluate the integral-identity gap and the reverse-Sobolev
             constant on a stored solution

Configuration is a flat key-value text file (`key = value`, '#' comments);
all keys have defaults, and --out/--seed/--no-header override the file.
Exit codes: 0 success, 2 config/usage/IO error, 3 convergence or
continuation failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, fields as dataclass_fields
from pathlib import Path

import numpy as np

from . import monitors
from .degeneracy import n2_sweep, n3_sweep
from .errors import ConfigurationError, ContinuationStallError, Sigma2LabError
from .forms import ProblemData
from .monitors import moser_identity_gap, reverse_sobolev_constant
from .profiles import manufactured_problem, perturbative_problem, trivial_problem
from .solve import SolverConfig, run_and_return
from .torus import load_field, make_geometry, save_field
from .verify import run_all

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4


@dataclass
class RunConfig:
    n: int = 2
    points_per_axis: int = 16
    alpha: float = 1.0
    A: float = 0.1
    profile: str = "perturbative"   # trivial | perturbative | manufactured | file
    f_scale: float = 0.05
    mu_scale: float = 0.05
    amplitude: float = 0.25         # manufactured-profile perturbation size
    f_dump: str = ""
    mu_dump: str = ""
    newton_tol: float = 1e-9
    max_newton_iters: int = 25
    t_step_init: float = 0.25
    t_step_min: float = 1e-3
    cone_margin: float = 1e-6
    backtrack_factor: float = 0.5
    warm_start: str = ""          # optional field dump used as the t=0 start
    seed: int = 0
    out: str = "out"

    @classmethod
    def from_file(cls, path: str | None) -> "RunConfig":
        cfg = cls()
        if path is None:
            return cfg
        text = Path(path).read_text()
        known = {f.name: f.type for f in dataclass_fields(cls)}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in known:
                raise ConfigurationError(f"{path}:{lineno}: unknown key '{key}'")
            current = getattr(cfg, key)
            try:
                if isinstance(current, bool):
                    setattr(cfg, key, value.lower() in ("1", "true", "yes"))
                elif isinstance(current, int):
                    setattr(cfg, key, int(value))
                elif isinstance(current, float):
                    setattr(cfg, key, float(value))
                else:
                    setattr(cfg, key, value)
            except ValueError as exc:
                raise ConfigurationError(f"{path}:{lineno}: bad value for '{key}': {value}") from exc
        return cfg

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            newton_tol=self.newton_tol,
            max_newton_iters=self.max_newton_iters,
            t_step_init=self.t_step_init,
            t_step_min=self.t_step_min,
            cone_margin=self.cone_margin,
            backtrack_factor=self.backtrack_factor,
        )

    def build_problem(self):
        """Returns (ProblemData, exact solution or None)."""
        geom = make_geometry(self.n, self.points_per_axis)
        if self.profile == "trivial":
            return trivial_problem(geom, self.alpha, self.A), None
        if self.profile == "perturbative":
            return perturbative_problem(geom, self.alpha, self.A,
                                        self.f_scale, self.mu_scale), None
        if self.profile == "manufactured":
            return manufactured_problem(geom, self.alpha, self.A,
                                        self.amplitude, self.f_scale)
        if self.profile == "file":
            if not self.f_dump or not self.mu_dump:
                raise ConfigurationError("profile=file needs f_dump and mu_dump paths")
            f = load_field(self.f_dump, geom)
            mu = load_field(self.mu_dump, geom)
            return ProblemData(geom, self.alpha, f, mu, self.A, t=1.0), None
        raise ConfigurationError(f"unknown profile '{self.profile}'")


# ---------------------------------------------------------------------------
# output helpers


def _write_csv(path: Path, command: str, columns, rows, no_header: bool) -> None:
    lines = []
    if not no_header:
        stamp = time.strftime("%Y-%m-%dT%H:%M:%S")
        lines.append(f"# sigma2lab {command} written {stamp}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(f"{x:.17g}" if isinstance(x, float) else str(x)
                              for x in row))
    path.write_text("\n".join(lines) + "\n")


def _gnuplot_script(path: Path, csv_name: str, xcol: int, ycol: int,
                    xlabel: str, ylabel: str) -> None:
    path.write_text(
        "set datafile separator ','\n"
        f"set xlabel '{xlabel}'\n"
        f"set ylabel '{ylabel}'\n"
        "set key off\n"
        f"plot '{csv_name}' using {xcol}:{ycol} with linespoints\n"
    )


def _prepare_out(cfg_out: str, override: str | None) -> Path:
    out = Path(override) if override else Path(cfg_out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(args) -> int:
    cfg = RunConfig.from_file(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    out = _prepare_out(cfg.out, args.out)
    data, u_star = cfg.build_problem()
    solver_cfg = cfg.solver_config()
    u_init = load_field(cfg.warm_start, data.geometry) if cfg.warm_start else None
    try:
        report, u = run_and_return(data, solver_cfg, u_init=u_init)
        stalled = False
    except ContinuationStallError as exc:
        report = exc.report
        u = getattr(exc, "last_field", None)
        stalled = True
        print(f"continuation failed: {exc}", file=sys.stderr)

    rows = [rep.row(t, rn) for t, rn, rep in
            zip(report.t_values, report.residual_norms, report.monitor_snapshots)]
    _write_csv(out / "monitors.csv", "solve", monitors.CSV_COLUMNS, rows,
               args.no_header)
    _gnuplot_script(out / "monitors.gp", "monitors.csv", 1, 10, "t", "kappa")
    if u is not None:
        save_field(out / "solution.bin", u)

    summary = [
        f"profile   : {cfg.profile}",
        f"grid      : n={cfg.n}, {cfg.points_per_axis} points per axis",
        f"alpha, A  : {cfg.alpha}, {data.A}",
        f"accepted t: {len(report.t_values)} steps, last t = "
        f"{report.t_values[-1] if report.t_values else float('nan')}",
        f"converged : {report.converged}",
    ]
    if report.monitor_snapshots:
        last = report.monitor_snapshots[-1]
        summary.append(f"kappa     : {last.kappa:.6g} (kappa_c = {last.kappa_c:g})")
        summary.append(f"residual  : {report.residual_norms[-1]:.3e}")
    if u_star is not None and u is not None:
        err = float(np.max(np.abs(u.values - u_star.values)))
        summary.append(f"L_inf error vs manufactured solution: {err:.3e}")
    (out / "summary.txt").write_text("\n".join(summary) + "\n")
    print("\n".join(summary))
    return EXIT_SOLVER if stalled else EXIT_OK


def cmd_verify(args) -> int:
    cfg = RunConfig.from_file(args.config)
    seed = args.seed if args.seed is not None else cfg.seed
    results = run_all(seed, fast=args.fast)
    all_ok = True
    for res in results:
        tag = "PASS" if res.passed else "FAIL"
        print(f"{tag} {res.name}: {res.detail}")
        all_ok &= res.passed
    return EXIT_OK if all_ok else EXIT_VERIFY


def cmd_degeneracy(args) -> int:
    out = _prepare_out("out", args.out)
    if args.n == 3:
        rows = n3_sweep(args.samples)
        closed = (rows[:, 0] ** 2 - 1.0) ** 2 / 9.0
        worst = float(np.max(np.abs(rows[:, 2] - closed)))
        _write_csv(out / "degeneracy_n3.csv", "degeneracy",
                   ("s", "kappa_p", "rhs"), [tuple(r) for r in rows],
                   args.no_header)
        _gnuplot_script(out / "degeneracy_n3.gp", "degeneracy_n3.csv", 1, 3,
                        "s", "minimum-point rhs")
        print(f"n=3 path: {args.samples} samples, max |rhs - (s^2-1)^2/9| = {worst:.3e}")
        if worst > 1e-12:
            print("closed-form check FAILED", file=sys.stderr)
            return EXIT_VERIFY
        return EXIT_OK
    if args.n == 2:
        kappas = np.linspace(0.5, 1.5, args.samples)
        thetas = (0.002, 0.005, 0.01, 0.02, 0.05)
        rows = n2_sweep(kappas, thetas)
        _write_csv(out / "degeneracy_n2.csv", "degeneracy",
                   ("theta", "kappa_p", "lhs", "rhs", "sign"),
                   [tuple(r) for r in rows], args.no_header)
        _gnuplot_script(out / "degeneracy_n2.gp", "degeneracy_n2.csv", 2, 5,
                        "kappa_p", "sign(rhs - lhs)")
        # locate the sign frontier for the smallest theta
        sel = rows[rows[:, 0] == thetas[0]]
        flip = sel[np.searchsorted(sel[:, 4] > 0, True)][1] if np.any(sel[:, 4] > 0) else float("nan")
        print(f"n=2 sweep: frontier near kappa_p = {flip:.4g} at theta = {thetas[0]}")
        return EXIT_OK
    print(f"unsupported dimension n={args.n}", file=sys.stderr)
    return EXIT_CONFIG


def cmd_sweep_a(args) -> int:
    cfg = RunConfig.from_file(args.config)
    try:
        a_list = [float(s) for s in args.a_list.split(",") if s.strip()]
    except ValueError:
        print(f"bad A list: {args.a_list}", file=sys.stderr)
        return EXIT_CONFIG
    if not a_list:
        print("empty A list", file=sys.stderr)
        return EXIT_CONFIG
    if any(not 0.0 < a < 1.0 for a in a_list) or any(
            a_list[i] <= a_list[i + 1] for i in range(len(a_list) - 1)):
        print("A list must be descending values in (0, 1)", file=sys.stderr)
        return EXIT_CONFIG
    out = _prepare_out(cfg.out, args.out)
    rows = []
    failures = 0
    for a in a_list:
        cfg.A = a
        data, _ = cfg.build_problem()
        try:
            report, _ = run_and_return(data, cfg.solver_config())
            last = report.monitor_snapshots[-1]
            rows.append((a, 1.0) + last.row(report.t_values[-1],
                                            report.residual_norms[-1]))
        except Sigma2LabError as exc:
            print(f"A={a}: {exc}", file=sys.stderr)
            failures += 1
            rows.append((a, 0.0) + (float("nan"),) * len(monitors.CSV_COLUMNS))
    _write_csv(out / "sweep_a.csv", "sweep-a",
               ("A", "converged") + monitors.CSV_COLUMNS, rows, args.no_header)
    _gnuplot_script(out / "sweep_a.gp", "sweep_a.csv", 1, 7, "A", "c1_max")
    print(f"A sweep: {len(a_list) - failures}/{len(a_list)} solves converged")
    return EXIT_SOLVER if failures == len(a_list) else EXIT_OK


def cmd_moser_check(args) -> int:
    cfg = RunConfig.from_file(args.config)
    data, _ = cfg.build_problem()
    u = load_field(args.solution, data.geometry)
    try:
        k_list = [float(s) for s in args.k_list.split(",") if s.strip()]
    except ValueError:
        print(f"bad k list: {args.k_list}", file=sys.stderr)
        return EXIT_CONFIG
    out = _prepare_out(cfg.out, args.out)
    rows = []
    for k in k_list:
        gap = moser_identity_gap(u, data, k)
        const = reverse_sobolev_constant(u, max(k, 1.0))
        rows.append((k, gap, const))
        print(f"k={k:g}: identity gap {gap:.3e}, reverse-Sobolev constant {const:.6g}")
    _write_csv(out / "moser.csv", "moser-check",
               ("k", "identity_gap", "reverse_sobolev_constant"), rows,
               args.no_header)
    return EXIT_OK


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigma2lab",
        description="Numerical laboratory for a sigma_2-type complex Hessian "
                    "equation on flat Kahler tori.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="flat key=value config file")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--seed", type=int, default=None, help="seed override")
    common.add_argument("--no-header", action="store_true",
                        help="omit the timestamped CSV comment line")

    p = sub.add_parser("solve", parents=[common], help="run the continuation solver")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", parents=[common], help="run the identity suites")
    p.add_argument("--fast", action="store_true", help="smaller sample counts")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("degeneracy", parents=[common],
                       help="minimum-point inequality sweeps")
    p.add_argument("--n", type=int, required=True, help="complex dimension (2 or 3)")
    p.add_argument("--samples", type=int, default=101)
    p.set_defaults(func=cmd_degeneracy)

    p = sub.add_parser("sweep-a", parents=[common],
                       help="solve over a descending list of A values")
    p.add_argument("--a-list", required=True, help="comma-separated values in (0,1)")
    p.set_defaults(func=cmd_sweep_a)

    p = sub.add_parser("moser-check", parents=[common],
                       help="integral-identity checks on a stored solution")
    p.add_argument("--solution", required=True, help="field dump path")
    p.add_argument("--k-list", default="2,4,8,16")
    p.set_defaults(func=cmd_moser_check)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ContinuationStallError as exc:
        print(f"continuation failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except Sigma2LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
