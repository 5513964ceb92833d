"""Command-line entry point: ``bilinosc {solve,table,verify,fit,plot,all}``.

Exit codes: 0 success, 1 invalid input, 2 solver failure, 3 a configured
threshold failed (artifacts are still written).
"""

import argparse
import json
import logging
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, report
from .eigensolver import ConvergenceError, SolveRequest, solve, to_physical
from .fitting import FitError, ansatz_ground_state, ansatz_duality_residual, fit, scan_ansatz
from .lattice import LatticeConfig, PhysicalScale
from .quasiclassical import QcSpectrum, compare
from .verification import Thresholds, verify

logger = logging.getLogger("bilinosc")

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_THRESHOLD = 0, 1, 2, 3
ANSATZ_A = 1.172


class ValidationError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    n_sites: int = 20001
    lambda_c: float = 20.0
    n_eig: int = 20
    method: str = "iterative"
    tol: float = 1e-10
    seed: int = 20001
    output_dir: Path = Path(".")
    xmax: float = None
    scale: PhysicalScale = field(default_factory=PhysicalScale)
    thresholds: Thresholds = field(default_factory=Thresholds)
    scan_ansatz: bool = False

    @property
    def plot_xmax(self):
        return 10.0 if self.xmax is None else self.xmax


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bilinosc",
        description="Lattice spectrum, checks and figures for H = v|p| + F|x|.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n-sites", type=int, default=20001, help="odd number of lattice sites")
    common.add_argument("--lambda-c", type=float, default=20.0, help="potential cutoff / box half-width")
    common.add_argument("--n-eig", type=int, default=20, help="number of lowest levels")
    common.add_argument("--method", choices=("dense", "iterative", "auto"), default="iterative")
    common.add_argument("--tol", type=float, default=1e-10, help="eigenpair residual tolerance")
    common.add_argument("--seed", type=int, default=20001, help="Lanczos start-vector seed")
    common.add_argument("--xmax", type=float, default=None, help="export/plot window |x| <= xmax")
    common.add_argument("--output-dir", type=Path, default=Path("."))
    common.add_argument("--v", type=float, default=1.0, help="velocity in v|p|")
    common.add_argument("--f", type=float, default=1.0, help="force in F|x|")
    common.add_argument("--hbar", type=float, default=1.0)
    common.add_argument("--thresholds", type=Path, default=None, help="JSON file overriding pass/fail limits")
    common.add_argument("--scan-ansatz", action="store_true", help="also minimize the ansatz over a")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, text in (
        ("solve", "write eigenvalues.csv and eigenfunctions.csv"),
        ("table", "write table1.csv and print the eigenvalue table"),
        ("verify", "check the analytic relations, write verify.json"),
        ("fit", "fit the closed-form models, write fits.csv"),
        ("plot", "write fig_even/fig_odd/fig_fits SVG + CSV"),
        ("all", "run every stage and write report.json"),
    ):
        sub.add_parser(name, parents=[common], help=text)
    return parser


def parse_run_config(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    out = args.output_dir
    if not out.is_dir():
        raise ValidationError(f"output directory {out} does not exist")
    thresholds = Thresholds()
    if args.thresholds is not None:
        try:
            thresholds = Thresholds.from_dict(json.loads(args.thresholds.read_text()))
        except (OSError, ValueError, TypeError) as exc:
            raise ValidationError(f"cannot read thresholds file {args.thresholds}: {exc}") from exc
    try:
        scale = PhysicalScale(args.v, args.f, args.hbar)
        # validates the lattice before any compute starts
        LatticeConfig(args.n_sites, args.lambda_c)
        if args.n_eig < 1:
            raise ValueError("--n-eig must be >= 1")
        if args.tol <= 0:
            raise ValueError("--tol must be > 0")
        if args.xmax is not None and args.xmax <= 0:
            raise ValueError("--xmax must be > 0")
    except (ValueError, TypeError) as exc:
        raise ValidationError(str(exc)) from exc
    return RunConfig(
        subcommand=args.subcommand,
        n_sites=args.n_sites,
        lambda_c=args.lambda_c,
        n_eig=args.n_eig,
        method=args.method,
        tol=args.tol,
        seed=args.seed,
        output_dir=out,
        xmax=args.xmax,
        scale=scale,
        thresholds=thresholds,
        scan_ansatz=args.scan_ansatz,
    )


class Pipeline:
    """Runs stages on demand, caching each stage's immutable output."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.lattice = LatticeConfig(cfg.n_sites, cfg.lambda_c)
        self.timings = {}
        self._cache = {}

    def _stage(self, name, func):
        if name not in self._cache:
            start = time.perf_counter()
            self._cache[name] = func()
            self.timings[name] = time.perf_counter() - start
        return self._cache[name]

    @property
    def out(self):
        return self.cfg.output_dir

    def spectrum(self):
        req = SolveRequest(
            self.lattice,
            n_eig=self.cfg.n_eig,
            method=self.cfg.method,
            tol=self.cfg.tol,
            seed=self.cfg.seed,
        )
        return self._stage("solve", lambda: solve(req))

    def comparison(self):
        spec = self.spectrum()
        return self._stage("table", lambda: compare(spec, QcSpectrum.levels(spec.n_eig)))

    def verification(self):
        return self._stage("verify", lambda: verify(self.spectrum()))

    def fits(self):
        def run():
            spec = self.spectrum()
            window = min(8.0, spec.config.lambda_c)
            return [fit(spec, n, window) for n in range(min(4, spec.n_eig))]

        return self._stage("fit", run)

    def ansatz(self):
        def run():
            spec = self.spectrum()
            res = ansatz_ground_state(self.lattice, ANSATZ_A, spec)
            data = {
                "a": res.a,
                "rayleigh_quotient": res.rayleigh_quotient,
                "rayleigh_minus_lambda0": res.rayleigh_quotient - float(spec.lambdas[0]),
                "overlap": res.overlap,
                "duality_residual": ansatz_duality_residual(self.lattice, ANSATZ_A),
            }
            if self.cfg.scan_ansatz:
                scan = scan_ansatz(self.lattice, np.round(np.arange(0.8, 1.6001, 0.05), 10))
                data["scan"] = {
                    "best_a": scan.best_a,
                    "best_value": scan.best_value,
                    "grid": scan.grid,
                    "values": scan.values,
                }
            return data

        return self._stage("ansatz", run)

    # -- artifact writers ------------------------------------------------------

    def write_solve(self):
        spec = self.spectrum()
        report.write_eigenvalues(self.out / "eigenvalues.csv", spec)
        report.write_eigenfunctions(self.out / "eigenfunctions.csv", spec, self.cfg.xmax)
        phys = to_physical(spec, self.cfg.scale)
        report.write_csv(
            self.out / "energies_physical.csv",
            ["n", "energy"],
            ((n, float(e)) for n, e in enumerate(phys.energies)),
        )

    def write_table(self):
        comp = self.comparison()
        report.write_table1(self.out / "table1.csv", comp)
        report.write_table1_long(self.out / "table1_long.csv", comp)
        print(report.format_table1(comp))

    def write_verify(self):
        report.write_json(self.out / "verify.json", self.verification().to_dict())

    def write_fit(self):
        report.write_fits(self.out / "fits.csv", self.fits())

    def write_plot(self):
        spec = self.spectrum()
        report.write_parity_figure(self.out, spec, "even", self.cfg.plot_xmax)
        report.write_parity_figure(self.out, spec, "odd", self.cfg.plot_xmax)
        report.write_fit_figure(self.out, spec, self.fits(), self.cfg.plot_xmax)

    def failures(self):
        t = self.cfg.thresholds
        out = []
        if "verify" in self._cache:
            out.extend(self._cache["verify"].failures(t))
        for f in self._cache.get("fit", []):
            if f.max_abs_residual > t.fit_max_abs:
                out.append(f"n={f.n}: fit max deviation {f.max_abs_residual:.3e} > {t.fit_max_abs:g}")
        return out

    def write_report(self):
        spec = self.spectrum()
        comp = self.comparison()
        failures = self.failures()
        data = {
            "version": __version__,
            "config": {
                "n_sites": self.cfg.n_sites,
                "lambda_c": self.cfg.lambda_c,
                "n_eig": self.cfg.n_eig,
                "method": spec.method,
                "tol": self.cfg.tol,
                "seed": self.cfg.seed,
                "physical_scale": {"v": self.cfg.scale.v, "F": self.cfg.scale.F, "hbar": self.cfg.scale.hbar},
            },
            "spectrum": {
                "lambdas": spec.lambdas,
                "parities": list(spec.parities),
                "max_residual": float(spec.residuals.max()),
                "max_asymmetry": float(spec.asymmetry.max()),
                "flags": list(spec.flags),
                "solver_info": spec.info,
                "energies": to_physical(spec, self.cfg.scale).energies,
            },
            "comparison": [
                {"n": r.n, "lambda": r.numeric, "qc": r.qc, "delta": r.delta} for r in comp.rows
            ],
            "quasiclassical_converges": comp.converges,
            "verification": self.verification().to_dict(),
            "fits": [
                {
                    "n": f.n,
                    "params": f.named_params(),
                    "rms": f.rms_residual,
                    "max_abs": f.max_abs_residual,
                    "window": f.window,
                    "iterations": f.iterations,
                }
                for f in self.fits()
            ],
            "ansatz": self.ansatz(),
            "thresholds": self.cfg.thresholds.__dict__,
            "failures": failures,
            "passed": not failures,
            "timings_file": "timings.json",
        }
        report.write_json(self.out / "report.json", data)
        # wall-clock times vary run to run, so they live outside report.json
        report.write_json(self.out / "timings.json", self.timings)
        return failures


def run(cfg):
    pipe = Pipeline(cfg)
    cmd = cfg.subcommand
    if cmd == "solve":
        pipe.write_solve()
    elif cmd == "table":
        pipe.write_table()
    elif cmd == "verify":
        pipe.write_verify()
    elif cmd == "fit":
        pipe.write_fit()
    elif cmd == "plot":
        pipe.write_plot()
    elif cmd == "all":
        pipe.write_solve()
        pipe.write_table()
        pipe.write_verify()
        pipe.write_fit()
        pipe.write_plot()
        pipe.write_report()
    failures = pipe.failures()
    for line in failures:
        print(f"FAIL {line}", file=sys.stderr)
    return EXIT_THRESHOLD if failures else EXIT_OK


def main(argv=None):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            cfg = parse_run_config(argv)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return run(cfg)
    except (ConvergenceError, FitError, MemoryError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
