import math

import numpy as np
import pytest

from dirac_forge.models import geodesic as geod
from dirac_forge.models.target import flat_target, sphere_target


def test_constant_path_has_zero_energy():
    path = np.tile([0.4, -1.0], (9, 1))
    assert geod.geodesic_energy(path, flat_target(2)) == 0.0
    assert geod.geodesic_energy(path, sphere_target()) == 0.0


def test_straight_line_energy():
    p = np.array([1.5, -2.0, 0.5])
    path = geod.straight_line(np.zeros(3), p, 33)
    assert math.isclose(geod.geodesic_energy(path, flat_target(3)), float(p @ p), rel_tol=1e-13)


@pytest.mark.parametrize("distance", [0.5, 1.0, 2.0])
def test_great_circle_energy(distance):
    arc = geod.great_circle_path(distance, 257)
    assert abs(geod.geodesic_energy(arc, sphere_target()) - distance**2) < 1e-4


def test_energy_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    a, b = geod.great_circle_endpoints(1.0)
    path = geod.straight_line(a, b, 9) + 0.05 * rng.normal(size=(9, 2))
    target = sphere_target()
    _, grad = geod.energy_and_gradient(path, target)
    step = 1e-6
    for k, mu in [(1, 0), (4, 1), (7, 0)]:
        up, down = path.copy(), path.copy()
        up[k, mu] += step
        down[k, mu] -= step
        fd = (geod.geodesic_energy(up, target) - geod.geodesic_energy(down, target)) / (2 * step)
        assert abs(fd - grad[k, mu]) < 1e-6


def test_flat_minimizer_is_the_straight_line():
    rng = np.random.default_rng(1)
    a, b = np.array([0.0, 1.0]), np.array([2.0, -1.0])
    init = geod.straight_line(a, b, 33)
    init[1:-1] += 0.1 * rng.normal(size=(31, 2))
    res = geod.geodesic_minimize(a, b, flat_target(2), nodes=33, init=init)
    assert res.converged
    assert np.abs(res.path - geod.straight_line(a, b, 33)).max() < 1e-8
    assert abs(res.energy - 8.0) < 1e-10


def test_sphere_minimizer_matches_the_ode_oracle():
    a, b = geod.great_circle_endpoints(1.0)
    target = sphere_target()
    res = geod.geodesic_minimize(a, b, target, nodes=257)
    oracle, _ = geod.shoot_geodesic(a, b, target, 257)
    assert res.converged
    assert abs(res.energy - 1.0) < 1e-3
    assert np.abs(res.path - oracle).max() < 1e-3
    assert abs(geod.sphere_distance(a, b) - 1.0) < 1e-12


def test_near_antipodal_endpoints_warn_and_still_converge():
    d = math.pi - 0.05
    a, b = geod.great_circle_endpoints(d)
    with pytest.warns(UserWarning, match="antipodal"):
        res = geod.geodesic_minimize(a, b, sphere_target(), nodes=65,
                                     init=geod.great_circle_path(d, 65, reparam=lambda t: t * t))
    assert res.converged and res.notes
    assert abs(res.energy - d * d) < 1e-2


@pytest.mark.parametrize("reparam", [lambda t: t * t, lambda t: np.sin(0.5 * math.pi * t)])
def test_reparametrized_paths_cost_more(reparam):
    target = sphere_target()
    for d in (0.5, 1.5):
        slow = geod.great_circle_path(d, 257, reparam=reparam)
        assert geod.geodesic_energy(slow, target) >= d * d


def test_short_paths_are_rejected():
    with pytest.raises(geod.PathError):
        geod.geodesic_energy(np.zeros((2, 2)), flat_target(2))
    with pytest.raises(geod.PathError):
        geod.geodesic_minimize([0.0, 0.0], [1.0, 1.0], flat_target(2), init=np.zeros((5, 2)))
