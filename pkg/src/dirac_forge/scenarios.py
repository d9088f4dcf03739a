"""Scenario files (INI or JSON) and the built-in preset catalog."""

from __future__ import annotations

import ast
import configparser
import json
import os
from dataclasses import asdict, dataclass, field

from .suites import SUITES


class ScenarioError(ValueError):
    """A scenario file that cannot be parsed or refers to something unknown."""


@dataclass
class Scenario:
    name: str
    suite: str
    equation_ref: str
    description: str = ""
    epsilons: tuple = (1, -1)
    order: int = 2
    grids: tuple = ()
    seed: int = 0
    out: str | None = None
    formats: tuple = ("csv", "json")
    geometry: dict = field(default_factory=dict)
    module: dict = field(default_factory=dict)
    operator: dict = field(default_factory=dict)
    model: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ScenarioError(f"scenario {self.name!r}: unknown suite {self.suite!r}; known: {sorted(SUITES)}")
        self.epsilons = _as_tuple(self.epsilons)
        if not self.epsilons or any(e not in (1, -1) for e in self.epsilons):
            raise ScenarioError(f"scenario {self.name!r}: epsilon must be +1, -1 or both, got {self.epsilons}")
        self.grids = _as_tuple(self.grids)
        if any(not isinstance(g, int) or g < 5 for g in self.grids):
            raise ScenarioError(f"scenario {self.name!r}: grid sizes must be integers >= 5, got {self.grids}")
        if any(b <= a for a, b in zip(self.grids, self.grids[1:])):
            raise ScenarioError(f"scenario {self.name!r}: grid sizes must be strictly increasing, got {self.grids}")
        self.formats = _as_tuple(self.formats)
        bad = set(self.formats) - {"csv", "json"}
        if bad:
            raise ScenarioError(f"scenario {self.name!r}: unknown output format {sorted(bad)}")
        if self.order not in (2, 4):
            raise ScenarioError(f"scenario {self.name!r}: stencil order must be 2 or 4, got {self.order}")
        if "name" in self.module and "gamma1" not in self.module:
            from .modules import BUILTINS
            if self.module["name"] not in BUILTINS:
                raise ScenarioError(f"scenario {self.name!r}: unknown module preset {self.module['name']!r}")
        if self.operator.get("sign", "adjoint") not in ("adjoint", "literal"):
            raise ScenarioError(f"scenario {self.name!r}: operator sign must be adjoint or literal")

    def echo(self) -> dict:
        """Plain-data copy for the report's config section."""
        return json.loads(json.dumps(asdict(self)))


def _as_tuple(value) -> tuple:
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return (value,)


def _typed(text: str):
    """``3`` -> int, ``1e-3`` -> float, ``64,128`` -> tuple, ``+1`` -> int; anything else stays text."""
    text = text.strip()
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


_TOP_KEYS = {"name", "suite", "equation_ref", "description", "epsilon", "order", "grids", "seed", "out", "format"}
_BLOCKS = ("geometry", "module", "operator")


def scenario_from_dict(doc: dict, default_name: str = "scenario") -> Scenario:
    """Build a scenario from ``{"scenario": {...}, "geometry": {...}, ..., "<suite>": {...}}``."""
    if "scenario" not in doc:
        raise ScenarioError("missing [scenario] section")
    top = dict(doc["scenario"])
    unknown = set(top) - _TOP_KEYS
    if unknown:
        raise ScenarioError(f"unknown keys in [scenario]: {sorted(unknown)}")
    for key in ("suite", "equation_ref"):
        if key not in top:
            raise ScenarioError(f"[scenario] needs a {key!r} entry")
    suite = top["suite"]
    extra = set(doc) - {"scenario", suite, *_BLOCKS}
    if extra:
        raise ScenarioError(f"unknown sections {sorted(extra)} for suite {suite!r}")
    return Scenario(
        name=str(top.get("name", default_name)),
        suite=suite,
        equation_ref=str(top["equation_ref"]),
        description=str(top.get("description", "")),
        epsilons=top.get("epsilon", (1, -1)),
        order=top.get("order", 2),
        grids=top.get("grids", ()),
        seed=top.get("seed", 0),
        out=top.get("out"),
        formats=top.get("format", ("csv", "json")),
        geometry=dict(doc.get("geometry", {})),
        module=dict(doc.get("module", {})),
        operator=dict(doc.get("operator", {})),
        model=dict(doc.get(suite, {})),
    )


def parse_scenario_text(text: str, fmt: str = "ini", default_name: str = "scenario") -> Scenario:
    if fmt == "json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"JSON parse error at line {exc.lineno}: {exc.msg}") from None
    else:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ScenarioError(f"INI parse error: {exc}") from None
        doc = {sec: {k: _typed(v) for k, v in parser.items(sec)} for sec in parser.sections()}
    return scenario_from_dict(doc, default_name)


def load_scenario(path: str) -> Scenario:
    """Read a scenario file; ``.json`` files are JSON, anything else INI."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    stem = os.path.splitext(os.path.basename(path))[0]
    fmt = "json" if path.endswith(".json") else "ini"
    try:
        return parse_scenario_text(text, fmt, stem)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


# name -> scenario document; the files under scenarios/ are written from these
PRESETS = {
    "algebra-all": {
        "scenario": {"suite": "algebra", "equation_ref": "clifford-relations-and-symbol-map",
                     "description": "Clifford relations, symbol map and quantization for every n <= 4"},
        "algebra": {"max_dim": 4},
    },
    "stype-torus": {
        "scenario": {"suite": "stype", "equation_ref": "simple-type-dirac-action",
                     "description": "universal action of a constant-mass simple-type operator on the flat torus"},
        "geometry": {"preset": "flat-torus", "nodes": 128},
        "module": {"name": "pauli", "p": 2, "q": 0},
        "stype": {"masses": (0.0, 0.5, 1.0)},
    },
    "sphere-scal": {
        "scenario": {"suite": "sphere-scal", "equation_ref": "dirac-potential-scalar-curvature",
                     "description": "trace of the Dirac potential against scalar curvature on a unit-sphere cap",
                     "grids": (64, 128, 256)},
        "geometry": {"preset": "unit-sphere-cap", "theta_min": 0.2},
        "module": {"name": "pauli", "p": 2, "q": 0},
    },
    "trace-torus": {
        "scenario": {"suite": "trace-formula", "equation_ref": "trace-of-dirac-potential",
                     "description": "trace of the Dirac potential against curvature and form terms"},
        "geometry": {"preset": "flat-torus", "nodes": 128},
        "module": {"name": "pauli", "p": 2, "q": 0},
        "trace-formula": {"mean": 0.7, "amplitude": 0.3},
    },
    "sigma-flat": {
        "scenario": {"suite": "sigma", "equation_ref": "sigma-model-field-norm",
                     "description": "zero-order field of a map against its energy density, 20 random linear maps"},
        "geometry": {"preset": "flat-torus", "nodes": 16},
        "module": {"name": "pauli", "p": 2, "q": 0},
        "sigma": {"maps": 20, "target_dim": 2},
    },
    "geod-sphere": {
        "scenario": {"suite": "geodesic", "equation_ref": "curve-energy",
                     "description": "minimized curve energy on the unit sphere against an RK4 shooting oracle",
                     "epsilon": 1},
        "geodesic": {"nodes": 257, "distances": (0.5, 1.0, 1.5, 2.0, 2.5)},
    },
    "ym-u1-torus": {
        "scenario": {"suite": "yang-mills", "equation_ref": "yang-mills-twisting-field",
                     "description": "constant U(1) flux: field norm ratio and the Yang-Mills action"},
        "geometry": {"preset": "flat-torus", "nodes": 16},
        "module": {"name": "pauli", "p": 2, "q": 0},
        "yang-mills": {"fluxes": (0.1, 1.0, 3.0), "fiber": "pauli"},
    },
    "dhym-torus": {
        "scenario": {"suite": "dhym", "equation_ref": "dirac-harmonic-yang-mills-split",
                     "description": "cross trace and action split of the combined map and gauge field"},
        "geometry": {"preset": "flat-torus", "nodes": 16},
        "module": {"name": "pauli", "p": 2, "q": 0},
    },
    "higgs-lambda": {
        "scenario": {"suite": "higgs", "equation_ref": "higgs-kinetic-term",
                     "description": "Higgs identity, cosmological term and the gauge-Higgs term table",
                     "epsilon": 1, "order": 4},
        "geometry": {"preset": "flat-torus", "nodes": 128},
        "module": {"name": "pauli", "p": 2, "q": 0},
        "higgs": {"charges": (1, 2), "cosmological": 3.0, "flux": 1.0, "cap_nodes": 256},
    },
    "study-interval": {
        "scenario": {"suite": "study", "equation_ref": "study-number-dirac-operator",
                     "description": "Study-number operator on [0, 1] and the curve energy it produces"},
        "study": {"nodes": 257, "distance": 1.0},
    },
}


def preset(name: str) -> Scenario:
    if name not in PRESETS:
        raise ScenarioError(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    return scenario_from_dict(PRESETS[name], name)


def preset_ini(name: str) -> str:
    """INI text of a preset, as shipped under ``scenarios/``."""
    doc = PRESETS[name]
    lines = []
    for section in ["scenario"] + [k for k in doc if k != "scenario"]:
        lines.append(f"[{section}]")
        values = dict(doc[section])
        if section == "scenario":
            values = {"name": name, **values}
        for key, val in values.items():
            if isinstance(val, tuple):
                text = ", ".join(repr(v) for v in val)
                text = text + "," if len(val) == 1 else text
            elif isinstance(val, str) and key not in ("name", "suite", "equation_ref", "description", "preset",
                                                     "fiber", "sign", "metric", "out"):
                text = repr(val)
            else:
                text = str(val)
            lines.append(f"{key} = {text}")
        lines.append("")
    return "\n".join(lines)


def catalog() -> list:
    """``(name, suite, equation_ref, description)`` for every preset."""
    out = []
    for name, doc in PRESETS.items():
        top = doc["scenario"]
        out.append((name, top["suite"], top["equation_ref"], top.get("description", "")))
    return out
