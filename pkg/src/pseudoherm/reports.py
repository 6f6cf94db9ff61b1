"""Check records and spectrum tables, with their JSON/CSV encodings."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = "1.0"


@dataclass(frozen=True)
class Check:
    """One verified identity.

    ``deviation`` is compared against ``tolerance``; for ``bound="lower"``
    the check demands ``deviation > tolerance`` (used where an operator must
    be measurably *non*-Hermitian, for instance).
    """

    name: str
    deviation: float
    tolerance: float
    norm_type: str = "max_interior"
    bound: str = "upper"

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.deviation):
            return False
        if self.bound == "lower":
            return self.deviation > self.tolerance
        return self.deviation < self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "norm_type": self.norm_type,
            "deviation": float(self.deviation),
            "tolerance": float(self.tolerance),
            "bound": self.bound,
            "pass": self.passed,
        }


def checks_to_csv(checks) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "norm_type", "deviation", "tolerance", "bound", "pass"])
    for c in checks:
        d = c.to_dict()
        w.writerow([d["name"], d["norm_type"], repr(d["deviation"]),
                    repr(d["tolerance"]), d["bound"], d["pass"]])
    return buf.getvalue()


@dataclass(frozen=True)
class SpectrumRow:
    n1: int
    n2: int
    analytic: float
    numeric: complex

    @property
    def residual(self) -> float:
        return abs(self.numeric - self.analytic)


@dataclass(frozen=True)
class SpectrumTable:
    """Low-lying levels paired with their closed-form energies.

    ``theta``, ``theta_tilde`` and ``order2_constant`` are set for the
    noncommutative model and add three columns to the encodings.
    """

    rows: tuple[SpectrumRow, ...]
    theta: float | None = None
    theta_tilde: float | None = None
    order2_constant: float | None = None
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def is_nc(self) -> bool:
        return self.theta is not None

    @property
    def numeric(self) -> np.ndarray:
        return np.array([r.numeric for r in self.rows])

    @property
    def analytic(self) -> np.ndarray:
        return np.array([r.analytic for r in self.rows])

    @property
    def residuals(self) -> np.ndarray:
        return np.array([r.residual for r in self.rows])

    def max_residual(self) -> float:
        return float(self.residuals.max())

    def max_imag(self) -> float:
        return float(np.abs(self.numeric.imag).max())

    def columns(self) -> list[str]:
        cols = ["n1", "n2", "analytic", "numeric_re", "numeric_im", "residual"]
        if self.is_nc:
            cols += ["theta", "theta_tilde", "order2_constant"]
        return cols

    def records(self) -> list[dict]:
        out = []
        for r in self.rows:
            rec = {
                "n1": r.n1,
                "n2": r.n2,
                "analytic": float(r.analytic),
                "numeric_re": float(r.numeric.real),
                "numeric_im": float(r.numeric.imag),
                "residual": float(r.residual),
            }
            if self.is_nc:
                rec["theta"] = float(self.theta)
                rec["theta_tilde"] = float(self.theta_tilde)
                rec["order2_constant"] = float(self.order2_constant)
            out.append(rec)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.columns(), lineterminator="\n")
        w.writeheader()
        for rec in self.records():
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in rec.items()})
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"columns": self.columns(), "rows": self.records()})
