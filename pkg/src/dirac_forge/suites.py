"""Verification suites: each one turns a scenario into check records on a report."""

from __future__ import annotations

import itertools
import math

import numpy as np

from . import dirac as dr
from .algebra import (ExteriorElement, Multivector, Signature, canonical_action_matrix, inverse_symbol_map,
                      SignatureError, symbol_map)
from .geometry import ChartGrid, Geometry, conformal_torus_metric, flat_metric, sphere_cap_grid, sphere_metric
from .models import geodesic as geod
from .models.higgs import (HiggsBundle, abelian_potential, covariantly_constant_section, ehc_action,
                           gauge_higgs_report, higgs_metric, realify)
from .models.sigma import dirac_harmonic_action, linear_map, sigma_norm_check
from .models.study import study_dirac_demo
from .models.target import flat_target, sphere_target
from .models.yang_mills import (GaugeCurvature, constant_u1_flux, dhym_report, twisted_spinor_action, ym_action,
                                ym_norm_check)
from .modules import builtin_module, module_from_config, quantize, regular_module, theta_times, verify_module
from .report import RunReport


def _signatures(max_dim: int):
    for n in range(1, max_dim + 1):
        for p in range(n, -1, -1):
            yield p, n - p


def _sig_label(p, q, eps):
    return f"[{p},{q},{eps:+d}]"


def _module(spec: dict, epsilon: int):
    """A built-in module by ``name``, or explicit ``gamma1 ... tau [h]`` matrices."""
    p, q = spec.get("p", 2), spec.get("q", 0)
    if "gamma1" in spec:
        return module_from_config({**spec, "signature": f"{p},{q}", "epsilon": epsilon})
    return builtin_module(spec.get("name", "pauli"), Signature(p, q, epsilon, warn=False))


def fit_order(sizes, errors) -> float:
    """Least-squares slope of ``log error`` against ``log h`` with ``h ~ 1 / size``."""
    h = 1.0 / np.asarray(sizes, dtype=float)
    slope, _ = np.polyfit(np.log(h), np.log(np.asarray(errors, dtype=float)), 1)
    return float(slope)


# ---------------------------------------------------------------- algebra

def algebra_checks(signature: Signature, rng: np.random.Generator) -> dict:
    """Worst error of each algebraic identity for one signature."""
    s = signature
    n, eps, eta = s.n, s.epsilon, s.eta
    out = {}
    gens = [Multivector.blade(s, 1 << k) for k in range(n)]
    worst = 0.0
    for k, l in itertools.product(range(n), repeat=2):
        anti = gens[k] * gens[l] + gens[l] * gens[k]
        target = Multivector.scalar(s, 2 * eps * eta[k] if k == l else 0.0)
        worst = max(worst, float(np.abs((anti - target).coefficients).max()))
    out["generator-relations"] = worst

    def rand_mv():
        return Multivector(rng.normal(size=s.dim) + 1j * rng.normal(size=s.dim), s)

    worst = 0.0
    for _ in range(5):
        a, b, c = rand_mv(), rand_mv(), rand_mv()
        worst = max(worst, float(np.abs(((a * b) * c - a * (b * c)).coefficients).max()))
    out["associativity"] = worst

    worst = 0.0
    for _ in range(100):
        a = rand_mv()
        w = ExteriorElement(a.coefficients, s)
        worst = max(worst, float(np.abs((inverse_symbol_map(symbol_map(a)) - a).coefficients).max()),
                    float(np.abs((symbol_map(inverse_symbol_map(w)) - w).coefficients).max()))
    out["symbol-map-round-trip"] = worst

    worst = 0.0
    for _ in range(5):
        alpha, beta = rng.normal(size=n), rng.normal(size=n)
        A, B = canonical_action_matrix(s, alpha), canonical_action_matrix(s, beta)
        target = 2 * eps * float(np.sum(eta * alpha * beta)) * np.eye(s.dim)
        worst = max(worst, float(np.abs(A @ B + B @ A - target).max()))
    out["canonical-action-relations"] = worst

    reg = regular_module(s)
    out["regular-module-invariants"] = max(verify_module(reg).violations.values())
    worst = 0.0
    for _ in range(3):
        phi = rng.normal(size=(reg.rank, reg.rank)) + 1j * rng.normal(size=(reg.rank, reg.rank))
        worst = max(worst, float(np.abs(quantize(reg, theta_times(reg, phi)) - phi).max()))
    out["quantization-after-theta"] = worst
    return out


def run_algebra(sc, report: RunReport):
    spec = sc.model
    rng = np.random.default_rng(sc.seed)
    if "p" in spec:
        sigs = [(spec["p"], spec.get("q", 0))]
    else:
        sigs = list(_signatures(spec.get("max_dim", 4)))
    tol = spec.get("tolerance", 1e-12)
    for (p, q), eps in itertools.product(sigs, sc.epsilons):
        sig = Signature(p, q, eps, warn=False)
        for name, err in algebra_checks(sig, rng).items():
            report.add(f"{name}{_sig_label(p, q, eps)}", sc.equation_ref, err, 0.0, tol, "exact")
        for mod in ("study", "pauli", "dirac"):
            try:
                m = builtin_module(mod, sig)
            except SignatureError:
                continue
            r = verify_module(m)
            report.add(f"{mod}-module-invariants{_sig_label(p, q, eps)}", sc.equation_ref,
                       max(r.violations.values()), 0.0, tol, "exact")


# ----------------------------------------------------------- simple type

def _torus_geometry(geo_spec: dict, order: int, nodes: int | None = None) -> Geometry:
    nodes = nodes or geo_spec.get("nodes", 128)
    grid = ChartGrid.torus((nodes, nodes))
    if geo_spec.get("metric", "flat") == "conformal":
        return Geometry(conformal_torus_metric(grid, geo_spec.get("amplitude", 0.2)), order=order)
    return Geometry(flat_metric(grid), order=order)


def run_stype(sc, report: RunReport):
    """Universal action of ``D = quantized connection + tau m`` against ``int(-eps N scal / 4 + N m^2)``."""
    spec = sc.model
    for eps in sc.epsilons:
        geo = _torus_geometry(sc.geometry, sc.order)
        module = _module(sc.module, eps)
        conn = dr.build_clifford_connection(geo, module)
        N = module.rank
        for m in spec.get("masses", (0.0, 0.5, 1.0)):
            D = dr.build_simple_type(conn, m * module.identity)
            dec = dr.decompose(D, sc.operator.get("sign", "adjoint"))
            action = dr.universal_dirac_action(D, dec)
            if sc.geometry.get("metric", "flat") == "flat":
                reference, prov = (2 * math.pi) ** 2 * N * m * m, "closed-form"
            else:
                reference, prov = geo.integrate(-eps * N / 4 * geo.scal + N * m * m), "cross-check"
            label = f"[eps={eps:+d},m={m}]"
            report.add(f"universal-action{label}", sc.equation_ref, action, reference, 1e-6, prov, relative=True)
            report.add(f"higgs-field-recovered{label}", "zero-order-part-of-simple-type", float(
                np.abs(dec.phi - module.tau @ (m * module.identity)).max()), 0.0, 1e-10, "exact")


# ------------------------------------------------------- curved potential

def sphere_potential_error(eps: int, nodes: int, order: int, module_spec: dict, sign: str = "adjoint",
                           theta_min: float = 0.2):
    """Interior relative error of ``tr V`` against ``-eps (N/4) scal`` on the unit-sphere cap."""
    grid = sphere_cap_grid(nodes, nodes, theta_min)
    geo = Geometry(sphere_metric(grid), order=order)
    module = _module(module_spec, eps)
    conn = dr.build_clifford_connection(geo, module)
    dec = dr.decompose(dr.quantize_connection(conn), sign)
    reference = -eps * module.rank / 4 * 2.0
    err = dr.interior_max(geo, (dec.trace_potential - reference) / abs(reference), dr.default_margin(geo))
    return err, conn


def run_sphere_scal(sc, report: RunReport):
    sign = sc.operator.get("sign", "adjoint")
    tol = sc.model.get("tolerance", 1e-3)
    for eps in sc.epsilons:
        errors = []
        for nodes in sc.grids:
            err, conn = sphere_potential_error(eps, nodes, sc.order, sc.module, sign,
                                               sc.geometry.get("theta_min", 0.2))
            errors.append(err)
            if nodes == sc.grids[-1]:
                report.add(f"trace-potential-rel-error[eps={eps:+d},n={nodes}]", sc.equation_ref, err, 0.0,
                           tol, "bound")
            else:
                report.add(f"trace-potential-rel-error[eps={eps:+d},n={nodes}]", sc.equation_ref, err, None,
                           0.0, "measured")
        rep = dr.verify_clifford_connection(conn)
        report.add(f"clifford-compatibility[eps={eps:+d},n={sc.grids[-1]}]", "clifford-connection",
                   rep.clifford_violation, 0.0, rep.tol, "bound")
        if len(sc.grids) >= 2:
            report.add(f"convergence-order[eps={eps:+d}]", sc.equation_ref, fit_order(sc.grids, errors),
                       float(sc.order), 0.3, "closed-form")


def convergence_sphere_scal(sc, nodes: int) -> float:
    return sphere_potential_error(sc.epsilons[0], nodes, sc.order, sc.module, sc.operator.get("sign", "adjoint"),
                                  sc.geometry.get("theta_min", 0.2))[0]


# -------------------------------------------------------- trace formula

def run_trace_formula(sc, report: RunReport):
    spec = sc.model
    amp, mean = spec.get("amplitude", 0.3), spec.get("mean", 0.7)
    for eps in sc.epsilons:
        geo = _torus_geometry(sc.geometry, sc.order)
        module = _module(sc.module, eps)
        x, y = geo.grid.mesh()
        field = mean + amp * np.sin(x) * np.cos(2 * y)
        D = dr.build_simple_type(dr.build_clifford_connection(geo, module), field[..., None, None] * module.identity)
        dec = dr.decompose(D, sc.operator.get("sign", "adjoint"))
        rhs = dr.trace_formula_rhs(dec)
        lhs_int, rhs_int = dr.universal_dirac_action(D, dec), geo.integrate(rhs)
        label = f"[eps={eps:+d}]"
        report.add(f"integrated-trace-formula{label}", sc.equation_ref, lhs_int, rhs_int, 1e-6, "cross-check")
        report.add(f"integrated-pointwise-difference{label}", sc.equation_ref,
                   geo.integrate(dec.trace_potential - rhs), 0.0, 1e-6, "exact")
        report.add(f"pointwise-difference-max{label}", sc.equation_ref,
                   float(np.abs(dec.trace_potential - rhs).max()), None, 0.0, "measured")
        report.add(f"second-order-residual-max{label}", "square-of-dirac-operator",
                   float(np.abs(dr.second_order_residual(dec, _probe_section(geo, module.rank))).max()),
                   None, 0.0, "measured")


def _probe_section(geo: Geometry, rank: int) -> np.ndarray:
    x, y = geo.grid.mesh()
    a = np.arange(1, rank + 1)
    return (np.exp(1j * np.sin(x))[..., None] * a + np.cos(y)[..., None] * 1j / a).astype(complex)


# ------------------------------------------------------------------ sigma

def run_sigma(sc, report: RunReport):
    spec = sc.model
    rng = np.random.default_rng(sc.seed)
    nodes = sc.geometry.get("nodes", 16)
    geo = Geometry(flat_metric(ChartGrid.torus((nodes, nodes))), order=sc.order)
    eps2_list = spec.get("target_epsilons", sc.epsilons)
    for eps1, eps2 in itertools.product(sc.epsilons, eps2_list):
        m1 = _module(sc.module, eps1)
        m2 = regular_module(Signature(spec.get("target_dim", 2), 0, eps2, warn=False))
        target = flat_target(m2.n)
        maps = [linear_map(geo, target, rng.normal(size=(m2.n, geo.n))) for _ in range(spec.get("maps", 20))]
        r = sigma_norm_check(maps, m1, m2)
        refs = r.references
        label = f"[eps1={eps1:+d},eps2={eps2:+d}]"
        report.add(f"ratio-spread{label}", sc.equation_ref, r.spread, 0.0, 1e-10, "bound")
        report.add(f"ratio-vs-twisted-rank{label}", sc.equation_ref, r.constant, refs["predicted"], 1e-9,
                   "cross-check", relative=True)
        report.add(f"ratio-vs-sum-of-ranks{label}", sc.equation_ref, r.constant, refs["sum_of_ranks"], 0.0,
                   "measured")
        report.add(f"ratio-vs-product-of-ranks{label}", sc.equation_ref, r.constant, refs["product_of_ranks"],
                   0.0, "measured")
        x, y = geo.grid.mesh()
        rank = m1.rank * m2.rank
        psi = (np.exp(1j * x)[..., None] * rng.normal(size=rank) + np.cos(y)[..., None] * rng.normal(size=rank))
        act = dirac_harmonic_action(maps[0], m1, m2, psi.astype(complex))
        report.add(f"action-two-pipelines{label}", "dirac-harmonic-action", act["pipeline"], act["formula"],
                   1e-6, "cross-check", relative=True)
        report.add(f"embedded-fermion-term{label}", "dirac-harmonic-action", act["fermion_twisted"],
                   act["fermion"], 1e-9, "exact", relative=True)


# --------------------------------------------------------------- geodesic

def run_geodesic(sc, report: RunReport):
    spec = sc.model
    target = sphere_target()
    nodes = spec.get("nodes", 257)
    for d in spec.get("distances", (0.5, 1.0, 1.5, 2.0, 2.5)):
        a, b = geod.great_circle_endpoints(d)
        res = geod.geodesic_minimize(a, b, target, nodes=nodes)
        oracle, _ = geod.shoot_geodesic(a, b, target, nodes)
        label = f"[d={d}]"
        report.add(f"minimized-energy{label}", sc.equation_ref, res.energy, d * d, 1e-3 * d * d, "closed-form")
        report.add(f"path-vs-rk4{label}", sc.equation_ref, float(np.abs(res.path - oracle).max()), 0.0, 1e-3,
                   "oracle")
        report.add(f"converged{label}", sc.equation_ref, float(res.converged), 1.0, 0.5, "exact")
        arc = geod.great_circle_path(d, nodes)
        report.add(f"great-circle-energy{label}", sc.equation_ref, geod.geodesic_energy(arc, target), d * d,
                   1e-4, "closed-form")
        slow = geod.great_circle_path(d, nodes, reparam=lambda t: t * t)
        report.add(f"reparametrized-energy-excess{label}", sc.equation_ref,
                   max(0.0, d * d - geod.geodesic_energy(slow, target)), 0.0, 1e-12, "bound")


# ------------------------------------------------------------ Yang-Mills

def run_yang_mills(sc, report: RunReport):
    spec = sc.model
    nodes = sc.geometry.get("nodes", 16)
    geo = Geometry(flat_metric(ChartGrid.torus((nodes, nodes))), order=sc.order)
    eps2_list = spec.get("target_epsilons", sc.epsilons)
    for eps1, eps2 in itertools.product(sc.epsilons, eps2_list):
        spinor = _module(sc.module, eps1)
        module2 = builtin_module(spec.get("fiber", "pauli"), Signature(2, 0, eps2, warn=False))
        for f in spec.get("fluxes", (0.1, 1.0, 3.0)):
            F = constant_u1_flux(geo.grid, f)
            over_e, over_w, _ = ym_norm_check(F, spinor, module2, geo.eta)
            act = ym_action(F, geo, spinor, module2)
            label = f"[eps1={eps1:+d},eps2={eps2:+d},f={f}]"
            report.add(f"ratio-spread{label}", sc.equation_ref, over_e.spread, 0.0, 1e-10, "bound")
            report.add(f"ratio-over-E{label}", sc.equation_ref, over_e.constant,
                       over_e.references["predicted_over_E"], 1e-9, "cross-check", relative=True)
            report.add(f"ratio-vs-eps1-eps2{label}", sc.equation_ref, over_e.constant,
                       over_e.references["eps1_eps2"], 0.0, "measured")
            report.add(f"curvature-norm-density{label}", sc.equation_ref, act["norm_W"] / (2 * math.pi) ** 2,
                       2 * f * f, 1e-12, "closed-form", relative=True)
            report.add(f"action-vs-universal{label}", sc.equation_ref, act["universal"], act["formula"], 1e-6,
                       "cross-check", relative=True)
    if spec.get("twisted_spinor", True):
        spinor = _module(sc.module, sc.epsilons[0])
        F = constant_u1_flux(geo.grid, spec.get("fluxes", (1.0,))[-1])
        tsa = twisted_spinor_action(F, geo, spinor)
        report.add("twisted-spinor-factor", sc.equation_ref, tsa["measured_factor"], tsa["stated_factor"], 0.0,
                   "measured")
        report.add("twisted-spinor-split", sc.equation_ref, tsa["total"],
                   tsa["fermion"] + tsa["einstein_hilbert"] + tsa["yang_mills"], 1e-9, "exact", relative=True)


# ------------------------------------------------------------------ DHYM

def run_dhym(sc, report: RunReport):
    spec = sc.model
    rng = np.random.default_rng(sc.seed)
    nodes = sc.geometry.get("nodes", 16)
    geo = Geometry(flat_metric(ChartGrid.torus((nodes, nodes))), order=sc.order)
    for eps in sc.epsilons:
        spinor = _module(sc.module, eps)
        module2 = builtin_module("study", Signature(1, 0, eps, warn=False))
        sm = linear_map(geo, flat_target(1), rng.normal(size=(1, 2)))
        vals = 1j * rng.normal(size=geo.grid.shape + (2, 2, 1, 1))
        F = GaugeCurvature(vals - np.swapaxes(vals, -4, -3))
        rep = dhym_report(sm, F, spinor, module2)
        label = f"[eps={eps:+d}]"
        report.add(f"composite-rank{label}", sc.equation_ref, rep["rank_E1"], 8, 0.5, "exact")
        report.add(f"cross-trace-max{label}", sc.equation_ref, rep["cross_trace_max"], 0.0, 1e-12, "exact")
        report.add(f"total-vs-sum-of-parts{label}", sc.equation_ref, rep["total"], rep["sum_of_parts"], 1e-6,
                   "cross-check", relative=True)
        report.add(f"map-constant{label}", sc.equation_ref, rep["map_constant"], -rep["rank_twisted"], 0.0,
                   "measured")
        report.add(f"gauge-constant{label}", sc.equation_ref, rep["gauge_constant"], rep["rank_twisted"], 0.0,
                   "measured")


# ----------------------------------------------------------------- Higgs

def run_higgs(sc, report: RunReport):
    spec = sc.model
    nodes = sc.geometry.get("nodes", 128)
    grid = ChartGrid.torus((nodes, nodes))
    geo = Geometry(flat_metric(grid), order=max(sc.order, 4))
    x, y = grid.mesh()
    charges = tuple(spec.get("charges", (1, 2)))
    wavy = realify((np.exp(1j * np.sin(x)) * (1 + 0.3 * np.cos(y)))[..., None])
    cases = {
        "zero-section-trivial": (np.zeros((2, 2)), np.zeros(grid.shape + (2,))),
        "constant-section-trivial": (np.zeros((2, 2)), np.broadcast_to([0.6, -0.8], grid.shape + (2,))),
        "wavy-section-trivial": (np.zeros((2, 2)), wavy),
        "wavy-section-abelian": (abelian_potential(grid, charges), wavy),
        "parallel-section-abelian": (abelian_potential(grid, charges),
                                     covariantly_constant_section(grid, charges, [0.7 - 0.2j])),
    }
    for name, (A, section) in cases.items():
        hb = HiggsBundle(geo, np.eye(2), A, section)
        r = higgs_metric(hb, seed=sc.seed)
        report.add(f"higgs-identity[{name}]", sc.equation_ref, r.identity_residual, 0.0, 1e-10, "exact")
        report.add(f"higgs-identity-on-vectors[{name}]", sc.equation_ref, r.vector_residual, 0.0, 1e-10, "exact")
    hb = HiggsBundle(geo, np.eye(2), abelian_potential(grid, charges),
                     covariantly_constant_section(grid, charges, [0.7 - 0.2j]))
    r = higgs_metric(hb)
    report.add("parallel-section-map-energy", sc.equation_ref, float(np.abs(r.map_energy - geo.n).max()), 0.0,
               1e-8, "closed-form")

    lam = spec.get("cosmological", 3.0)
    report.add("ehc-flat-torus", "einstein-hilbert-cosmological", ehc_action(geo, lam),
               lam * (2 * math.pi) ** 2, 1e-9, "closed-form", relative=True)
    cap_nodes = spec.get("cap_nodes", 256)
    cap = Geometry(sphere_metric(sphere_cap_grid(cap_nodes, cap_nodes)), order=4)
    theta_min = 0.2
    zone = 2 * math.pi * (math.cos(theta_min) - math.cos(math.pi - theta_min))
    report.add("ehc-sphere-cap", "einstein-hilbert-cosmological", ehc_action(cap, 0.0), 2 * zone, 1e-3,
               "closed-form")

    spinor = _module(sc.module, sc.epsilons[0])
    F = constant_u1_flux(grid, spec.get("flux", 1.0))
    terms = gauge_higgs_report(geo, spinor, hb, F, cosmological=spec.get("lambda"))
    parts = terms["fermion"] + terms["higgs_kinetic"] + terms["yang_mills"] + terms["curvature_and_lambda"]
    for key in ("fermion", "higgs_kinetic", "yang_mills", "curvature_and_lambda"):
        report.add(f"gauge-higgs-term[{key}]", "gauge-coupled-fermion-higgs-action", terms[key], None, 0.0,
                   "measured")
    report.add("gauge-higgs-sum-of-parts", "gauge-coupled-fermion-higgs-action", terms["total"], parts, 1e-9,
               "exact", relative=True)
    report.add("gauge-higgs-lambda-term", "gauge-coupled-fermion-higgs-action", terms["curvature_and_lambda"],
               terms["lambda"] * (2 * math.pi) ** 2, 1e-9, "closed-form", relative=True)
    report.add("gauge-higgs-yang-mills-term", "gauge-coupled-fermion-higgs-action", terms["yang_mills"],
               2 * spec.get("flux", 1.0) ** 2 * (2 * math.pi) ** 2, 1e-9, "closed-form", relative=True)
    scaled = gauge_higgs_report(geo, spinor, hb.scaled(2.0), F, cosmological=spec.get("lambda"))
    report.add("higgs-term-quadratic-scaling", "gauge-coupled-fermion-higgs-action", scaled["higgs_kinetic"],
               4 * terms["higgs_kinetic"], 1e-9, "exact", relative=True)


# ----------------------------------------------------------------- Study

def run_study(sc, report: RunReport):
    nodes = sc.model.get("nodes", 257)
    for eps in sc.epsilons:
        for name, (value, reference, tol) in study_dirac_demo(nodes, eps, sc.model.get("distance", 1.0)).items():
            prov = "exact" if tol <= 1e-10 else "closed-form"
            report.add(f"{name}[eps={eps:+d}]", sc.equation_ref, value, reference, tol, prov)


SUITES = {
    "algebra": run_algebra,
    "stype": run_stype,
    "sphere-scal": run_sphere_scal,
    "trace-formula": run_trace_formula,
    "sigma": run_sigma,
    "geodesic": run_geodesic,
    "yang-mills": run_yang_mills,
    "dhym": run_dhym,
    "higgs": run_higgs,
    "study": run_study,
}

CONVERGENCE = {
    "sphere-scal": convergence_sphere_scal,
}
