import numpy as np
import pytest

from dirac_forge.geometry import ChartGrid, Geometry, flat_metric
from dirac_forge.models.sigma import linear_map
from dirac_forge.models.target import flat_target
from dirac_forge.models.yang_mills import GaugeCurvature, dhym_field, dhym_report, spinor_cl_gauge_module
from dirac_forge.modules import pauli_module, study_module, verify_module


def torus(nodes=8):
    return Geometry(flat_metric(ChartGrid.torus((nodes, nodes))), order=2)


def random_flux(shape, rng, rank=1):
    vals = 1j * rng.normal(size=shape + (2, 2, rank, rank))
    if rank > 1:
        vals = vals + rng.normal(size=vals.shape)
        vals = 0.5 * (vals - np.conj(np.swapaxes(vals, -1, -2)))
    return GaugeCurvature(vals - np.swapaxes(vals, -4, -3))


@pytest.mark.parametrize("eps", [1, -1])
def test_composite_module_is_a_clifford_module(eps):
    m = spinor_cl_gauge_module(pauli_module(epsilon=eps), 1)
    assert m.rank == 8
    assert verify_module(m).passed


@pytest.mark.parametrize("eps", [1, -1])
def test_either_field_zero_gives_a_trivial_split(eps):
    geo = torus()
    rng = np.random.default_rng(0)
    spinor, module2 = pauli_module(epsilon=eps), study_module(eps)
    zero_map = linear_map(geo, flat_target(1), np.zeros((1, 2)))
    fld = dhym_field(zero_map, random_flux(geo.grid.shape, rng), spinor, module2)
    assert np.array_equal(fld.phi_map, np.zeros_like(fld.phi_map))
    assert np.array_equal(fld.zero_order("both"), fld.zero_order("gauge"))
    zero_f = GaugeCurvature(np.zeros(geo.grid.shape + (2, 2, 1, 1)))
    fld = dhym_field(linear_map(geo, flat_target(1), rng.normal(size=(1, 2))), zero_f, spinor, module2)
    assert not np.any(fld.phi_gauge)


@pytest.mark.parametrize("eps", [1, -1])
@pytest.mark.parametrize("rank", [1, 2])
def test_cross_trace_vanishes(eps, rank):
    geo = torus(6)
    rng = np.random.default_rng(rank)
    sm = linear_map(geo, flat_target(1), rng.normal(size=(1, 2)))
    rep = dhym_report(sm, random_flux(geo.grid.shape, rng, rank), pauli_module(epsilon=eps), study_module(eps))
    assert rep["rank_E1"] == 8 * rank
    assert rep["cross_trace_max"] < 1e-12


@pytest.mark.parametrize("eps", [1, -1])
def test_total_action_is_the_sum_of_parts(eps):
    geo = torus()
    rng = np.random.default_rng(9)
    sm = linear_map(geo, flat_target(1), rng.normal(size=(1, 2)))
    rep = dhym_report(sm, random_flux(geo.grid.shape, rng), pauli_module(epsilon=eps), study_module(eps))
    assert abs(rep["total"] - rep["sum_of_parts"]) < 1e-6 * abs(rep["sum_of_parts"])
    assert rep["einstein_hilbert"] == 0.0
    assert np.isfinite(rep["map_constant"]) and np.isfinite(rep["gauge_constant"])


def test_mismatched_dimensions_are_rejected():
    geo = torus()
    sm = linear_map(geo, flat_target(1), np.ones((1, 2)))
    F = GaugeCurvature(np.zeros(geo.grid.shape[:1] + (3, 3, 1, 1)))
    with pytest.raises(ValueError):
        dhym_field(sm, F, pauli_module(), study_module())
