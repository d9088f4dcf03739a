import numpy as np
import pytest

from dirac_forge import dirac as dr
from dirac_forge.models.study import interval_geometry, study_dirac_demo
from dirac_forge.modules import study_module


@pytest.fixture(scope="module", params=[1, -1])
def demo(request):
    return request.param, study_dirac_demo(nodes=257, epsilon=request.param, distance=1.0)


def test_every_demo_check_is_within_tolerance(demo):
    _, checks = demo
    for name, (value, reference, tol) in checks.items():
        assert abs(value - reference) < tol, name


def test_demo_reports_the_expected_checks(demo):
    _, checks = demo
    assert set(checks) == {"study-trig-section", "study-constant-section", "study-pullback-operator",
                           "study-action-density-spread", "study-energy-vs-discrete", "study-energy-vs-closed-form",
                           "study-total-action", "study-constant"}


def test_constant_is_minus_twisted_rank(demo):
    eps, checks = demo
    assert checks["study-constant"][1] == -16


def test_trig_section_error_shrinks_at_fourth_order():
    errs = []
    for nodes in (65, 129):
        geo = interval_geometry(nodes)
        t = geo.grid.axis_coords(0)
        D = dr.quantize_connection(dr.build_clifford_connection(geo, study_module()))
        psi = np.stack([np.sin(t), np.cos(t)], axis=-1)
        errs.append(np.abs(D.apply(psi) - np.stack([np.cos(t), np.sin(t)], axis=-1)).max())
    assert 3.5 < np.log2(errs[0] / errs[1]) < 4.5


@pytest.mark.parametrize("distance", [0.5, 1.5])
def test_curve_energy_for_other_distances(distance):
    checks = study_dirac_demo(nodes=257, distance=distance)
    value, reference, tol = checks["study-energy-vs-closed-form"]
    assert reference == distance**2
    assert abs(value - reference) < tol
