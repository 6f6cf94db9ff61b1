"""Command-line front end.

Usage::

    pseudoherm spectrum --A 0.3 --B 0.3 --cutoff 40 --count 10 --format csv
    pseudoherm verify --A 0.5 --B 0.5 --out report.json

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage
errors and 3 for numerical failures (near-defective matrix, non-positive
metric and the like).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__, model, ncmodel, position
from .errors import NumericalError, ParameterError, PseudoHermError
from .reports import SCHEMA_VERSION, Check, SpectrumTable, checks_to_csv

COMMANDS = ("spectrum", "nc-spectrum", "verify", "quadrature", "evolve", "scaling")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    command: str
    A: float = 0.0
    B: float = 0.0
    theta: float = 0.0
    theta_tilde: float = 0.0
    cutoff: int = 30
    count: int = 10
    n_max: int = 5
    t_max: float = 10.0
    t_steps: int = 50
    out_path: str | None = None
    format: str = "json"


@dataclass
class Report:
    config_echo: RunConfig
    checks: list
    table: SpectrumTable | None = None
    gram: position.GramResult | None = None
    wallclock_ms: int = 0
    version: str = SCHEMA_VERSION

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        cfg = asdict(self.config_echo)
        doc = {
            "version": self.version,
            "package_version": __version__,
            "config": cfg,
            "pass": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "table": json.loads(self.table.to_json()) if self.table is not None else None,
            "wallclock_ms": self.wallclock_ms,
        }
        if self.gram is not None:
            doc["gram"] = json.loads(self.gram.to_json())
        return json.dumps(doc, indent=2)

    def to_csv(self) -> str:
        if self.table is not None:
            return self.table.to_csv()
        if self.gram is not None:
            return self.gram.to_csv()
        return checks_to_csv(self.checks)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--A", type=float, default=0.0, help="imaginary coordinate coupling")
    common.add_argument("--B", type=float, default=0.0, help="imaginary momentum coupling")
    common.add_argument("--theta", type=float, default=0.0, help="coordinate noncommutativity")
    common.add_argument("--theta-tilde", type=float, default=0.0, help="momentum noncommutativity")
    common.add_argument("--cutoff", type=int, default=30, help="Fock states per mode")
    common.add_argument("--count", type=int, default=10, help="number of levels to tabulate")
    common.add_argument("--n-max", type=int, default=5, help="highest occupation checked")
    common.add_argument("--t-max", type=float, default=10.0)
    common.add_argument("--t-steps", type=int, default=50)
    common.add_argument("--out", dest="out_path", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(
        prog="pseudoherm",
        description="Pseudo-Hermitian oscillator spectra, metrics and identity checks.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    helps = {
        "spectrum": "truncated spectrum vs closed form",
        "nc-spectrum": "noncommutative spectrum vs first-order formula",
        "verify": "metric, pseudo-Hermiticity and ladder identities",
        "quadrature": "contour-integral Gram matrix",
        "evolve": "metric-norm conservation under time evolution",
        "scaling": "second-order scaling of the noncommutative residual",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def parse_args(argv=None) -> RunConfig:
    parser = _parser()
    ns = parser.parse_args(argv)
    cfg = RunConfig(**{k: v for k, v in vars(ns).items()})
    numeric = (cfg.A, cfg.B, cfg.theta, cfg.theta_tilde, cfg.t_max)
    if not all(math.isfinite(v) for v in numeric):
        parser.error("numeric arguments must be finite")
    if cfg.count < 1 or cfg.t_steps < 1 or cfg.n_max < 0:
        parser.error("--count and --t-steps must be positive, --n-max non-negative")
    try:
        base = model.ModelParams(cfg.A, cfg.B, cfg.cutoff)
        if cfg.theta or cfg.theta_tilde:
            ncmodel.NCParams(base, cfg.theta, cfg.theta_tilde)
    except PseudoHermError as exc:
        parser.error(str(exc))
    return cfg


def _table_checks(table: SpectrumTable, residual_tol: float) -> list[Check]:
    return [
        Check("max_residual", table.max_residual(), residual_tol, "max_rows"),
        Check("max_abs_imag", table.max_imag(), 1e-8, "max_rows"),
    ]


def _run_spectrum(cfg, base):
    ops = model.build_model(base)
    table = model.spectrum_numeric(ops, cfg.count)
    return _table_checks(table, 1e-8), table, None


def _run_nc_spectrum(cfg, base):
    params = ncmodel.NCParams(base, cfg.theta, cfg.theta_tilde)
    table = ncmodel.nc_spectrum_numeric(params, cfg.count)
    return _table_checks(table, 1e-3), table, None


def _run_verify(cfg, base):
    ops = model.build_model(base)
    checks = model.verify_model(ops) + model.verify_ladder(ops, cfg.n_max)
    if cfg.theta or cfg.theta_tilde:
        nc_ops = ncmodel.build_nc_structure(ncmodel.NCParams(base, cfg.theta, cfg.theta_tilde))
        checks += [Check("nc:" + c.name, c.deviation, c.tolerance, c.norm_type, c.bound)
                   for c in ncmodel.verify_nc(nc_ops)]
    return checks, None, None


def _run_quadrature(cfg, base):
    gram = position.gram_matrix(cfg.n_max, cfg.A, cfg.B)
    G = gram.matrix
    checks = [
        Check("gram-identity", gram.max_deviation, 1e-8, "max_entries"),
        Check("gram-real-symmetric", float(max(np.abs(G.imag).max(), np.abs(G - G.T).max())),
              1e-8, "max_entries"),
    ]
    return checks, None, gram


def _run_evolve(cfg, base):
    ops = model.build_model(base)
    psi0 = model.n_particle_state(ops, 1, 0)
    t_grid = np.linspace(0.0, cfg.t_max, cfg.t_steps)
    norms = model.evolve_check(ops, psi0, t_grid)
    ref = norms[0].real
    checks = [
        Check("eta_norm_drift", float(np.abs(norms.real - ref).max() / abs(ref)), 1e-8, "max_relative"),
        Check("eta_norm_imag", float(np.abs(norms.imag).max()), 1e-8, "max_abs"),
    ]
    return checks, None, None


def _run_scaling(cfg, base):
    checks = []
    for rec in ncmodel.first_order_scaling_check(base):
        tag = f"({rec.n1},{rec.n2})"
        if rec.residual_coarse < rec.floor and rec.residual_fine < rec.floor:
            checks.append(Check(f"residuals_below_floor{tag}", max(rec.residual_coarse, rec.residual_fine),
                                rec.floor, "abs"))
        else:
            checks.append(Check(f"ratio_lower{tag}", rec.ratio, rec.window[0], "ratio", "lower"))
            checks.append(Check(f"ratio_upper{tag}", rec.ratio, rec.window[1], "ratio"))
    return checks, None, None


_DISPATCH = {
    "spectrum": _run_spectrum,
    "nc-spectrum": _run_nc_spectrum,
    "verify": _run_verify,
    "quadrature": _run_quadrature,
    "evolve": _run_evolve,
    "scaling": _run_scaling,
}


def run(cfg: RunConfig) -> tuple[Report, int]:
    """Execute one command; returns the report and the process exit code."""
    start = time.perf_counter()
    base = model.ModelParams(cfg.A, cfg.B, cfg.cutoff)
    code = None
    try:
        checks, table, gram = _DISPATCH[cfg.command](cfg, base)
    except NumericalError as exc:
        checks, table, gram = [Check(f"error:{type(exc).__name__}", math.inf, 0.0, "error")], None, None
        code = EXIT_NUMERICAL
    except (ParameterError, ValueError) as exc:
        checks, table, gram = [Check(f"error:{type(exc).__name__}", math.inf, 0.0, "error")], None, None
        code = EXIT_USAGE
    ms = int(round((time.perf_counter() - start) * 1000))
    report = Report(cfg, checks, table, gram, ms)
    if code is None:
        code = EXIT_OK if report.passed else EXIT_FAIL
    return report, code


def main(argv=None) -> int:
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    report, code = run(cfg)
    text = report.to_csv() if cfg.format == "csv" else report.to_json() + "\n"
    if cfg.out_path:
        with open(cfg.out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
