import math

import numpy as np
import pytest

import hpfcfv as hp


def test_structured_mesh_counts():
    m = hp.structured_quads(4, 4)
    assert (m.n_cells, m.n_faces, m.n_nodes) == (16, 40, 25)
    assert m.cells.shape == (16, 4)
    assert m.areas.sum() == pytest.approx(1.0)


def test_stokes_matrix_matches_reference_counts():
    d = hp.Discretization(hp.synthetic_stokes(), hp.structured_quads(16, 16))
    a = hp.stokes_matrix(d)
    assert a.shape == (1536, 1536)
    assert d.n_unknowns == 1536


def test_synthetic_stokes_solution_is_accurate():
    kase = hp.synthetic_stokes()
    d = hp.Discretization(kase, hp.structured_quads(16, 16))
    state, report = hp.solve(d)
    assert report["converged"]
    centroids = hp.structured_quads(16, 16).centroids
    exact = np.array([kase.exact_velocity(x) for x in centroids])
    rel = np.linalg.norm(state.u - exact) / np.linalg.norm(exact)
    assert rel < 0.2


def test_couette_newton_converges_quadratically():
    cfg = hp.SolverConfig()
    cfg.pressure_constraint = hp.PressureConstraint.ZeroMean
    rows = hp.convergence_study("couette", hp.CellType.Quad, 1, 1, cfg)
    res = rows[0]["newton_residuals"]
    assert rows[0]["converged"] and res[-1] <= 1e-10
    assert math.log(res[-1] / res[-2]) / math.log(res[-2] / res[-3]) >= 1.7


def test_mass_flux_sums_to_zero():
    d = hp.Discretization(hp.synthetic_stokes(), hp.structured_tris(8, 8))
    state, _ = hp.solve(d)
    flux = np.asarray(hp.mass_flux(d, state))
    assert abs(flux.sum()) <= 1e-12


def test_state_arrays_round_trip():
    m = hp.structured_tris(2, 2)
    s = hp.SolutionState.zeros(m)
    u = np.arange(2 * m.n_cells, dtype=float).reshape(-1, 2)
    s.u = u
    np.testing.assert_array_equal(s.u, u)
    with pytest.raises(ValueError):
        s.u = np.zeros((m.n_cells, 3))


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        hp.Discretization(hp.cavity(100.0), hp.graded_cavity_mesh(1))
    cfg = hp.SolverConfig()
    cfg.tau_p = -1.0
    with pytest.raises(ValueError):
        cfg.validate()
