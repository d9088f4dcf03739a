"""Check records and their CSV / JSON serialization."""

from __future__ import annotations

import csv
import io
import json
import os
import platform
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, kernels

COLUMNS = ("check_name", "equation_ref", "value", "reference", "provenance", "tolerance", "abs_error", "pass")

# vocabulary for where a reference value comes from
PROVENANCE = {
    "exact": "structural identity that holds to rounding",
    "closed-form": "analytic value of the continuous problem",
    "oracle": "independent numerical method",
    "cross-check": "the same quantity through a second pipeline",
    "bound": "upper bound on a residual or spread",
    "measured": "value reported for comparison, pass if finite",
}


def _scalar(x):
    """Plain Python number; complex only when the imaginary part is nonzero."""
    if isinstance(x, (complex, np.complexfloating)):
        x = complex(x)
        return x.real if x.imag == 0 else x
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(x)


def _text(x) -> str:
    if x is None:
        return ""
    if isinstance(x, complex):
        return f"{x.real!r}{x.imag:+.17g}j"
    return repr(x)


@dataclass
class CheckRecord:
    check_name: str
    equation_ref: str
    value: object
    reference: object
    provenance: str
    tolerance: float
    abs_error: float
    passed: bool

    def row(self) -> dict:
        return {
            "check_name": self.check_name,
            "equation_ref": self.equation_ref,
            "value": _text(self.value),
            "reference": _text(self.reference),
            "provenance": self.provenance,
            "tolerance": repr(self.tolerance),
            "abs_error": repr(self.abs_error),
            "pass": "true" if self.passed else "false",
        }

    def as_json(self) -> dict:
        def enc(v):
            return {"re": v.real, "im": v.imag} if isinstance(v, complex) else v
        return {"check_name": self.check_name, "equation_ref": self.equation_ref, "value": enc(self.value),
                "reference": enc(self.reference), "provenance": self.provenance, "tolerance": self.tolerance,
                "abs_error": self.abs_error, "pass": self.passed}


def environment_stamp(threads: int) -> dict:
    """Everything that can change a number in the report; no clocks, no host names."""
    import scipy
    return {
        "package_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "kernel_backend": kernels.BACKEND,
        "threads": threads,
        "byteorder": sys.byteorder,
    }


@dataclass
class RunReport:
    scenario: str
    config: dict = field(default_factory=dict)
    threads: int = 1
    records: list = field(default_factory=list)

    def add(self, name: str, equation_ref: str, value, reference, tolerance: float,
            provenance: str, relative: bool = False) -> CheckRecord:
        """Append a check passing when ``|value - reference| < tolerance``.

        With ``relative=True`` the tolerance is multiplied by ``1 + |reference|``.
        Provenance ``measured`` passes whenever the value is finite; its
        reference may be ``None``.
        """
        if provenance not in PROVENANCE:
            raise ValueError(f"unknown provenance {provenance!r}")
        if reference is None and provenance != "measured":
            raise ValueError(f"check {name!r} needs a reference value")
        value = _scalar(value)
        reference = None if reference is None else _scalar(reference)
        err = float(abs(value - reference)) if reference is not None else 0.0
        tol = float(tolerance) * (1.0 + abs(reference)) if relative else float(tolerance)
        if provenance == "measured":
            ok = bool(np.isfinite(abs(value)))
        else:
            ok = bool(np.isfinite(err) and err < tol)
        rec = CheckRecord(name, equation_ref, value, reference, provenance, tol, err, ok)
        self.records.append(rec)
        return rec

    @property
    def failures(self) -> list:
        return [r for r in self.records if not r.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        writer.writeheader()
        for rec in self.records:
            writer.writerow(rec.row())
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "scenario": self.scenario,
            "passed": self.passed,
            "environment": environment_stamp(self.threads),
            "config": self.config,
            "provenance_tags": PROVENANCE,
            "checks": [r.as_json() for r in self.records],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def write(self, out_dir, formats=("csv", "json")) -> list:
        os.makedirs(out_dir, exist_ok=True)
        paths = []
        for fmt in formats:
            path = os.path.join(out_dir, f"{self.scenario}-report.{fmt}")
            text = self.to_csv() if fmt == "csv" else self.to_json()
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            paths.append(path)
        return paths

    def summary_lines(self) -> list:
        lines = []
        for r in self.records:
            mark = "PASS" if r.passed else "FAIL"
            if r.provenance == "measured":
                lines.append(f"{mark}  {r.check_name:<44s} value={_text(r.value)}")
            else:
                lines.append(f"{mark}  {r.check_name:<44s} err={r.abs_error:.3e} tol={r.tolerance:.1e}")
        return lines
