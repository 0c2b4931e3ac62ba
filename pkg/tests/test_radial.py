import math

import numpy as np
import pytest

from trimerlab.hyperangular import TWO_MU3
from trimerlab.hyperradial import (
    ModelTail,
    PotentialSource,
    dense_oracle_energies,
    solve_bound_states,
)


def wall_source(coefficient, wall=1.0):
    return PotentialSource.from_model(
        ModelTail("pure-inverse-square", {"coefficient": coefficient}, 1.0), wall=wall)


def test_pure_inverse_square_wall_ladder_geometric():
    # s0 = 1: deep-ladder ratios approach e^{-2 pi}
    res = solve_bound_states(wall_source(1.25), 8, tol=1e-10, r_cap=1e14)
    E = res.energies()
    ratios = E[1:] / E[:-1]
    target = math.exp(-2 * math.pi)
    assert np.all(np.abs(ratios[3:] / target - 1) < 1e-4)
    assert [s.nodes for s in res.states] == list(range(8))


def test_radius_ladder_geometric():
    res = solve_bound_states(wall_source(1.25), 7, tol=1e-10, r_cap=1e13)
    r = res.radii()
    target = math.exp(math.pi)
    assert np.all(np.abs(r[4:] / r[3:-1] / target - 1) < 1e-3)


def test_repulsive_source_returns_empty():
    tail = ModelTail("supercritical-threshold", {"E_th": 0.0, "alpha_eff2": -2.0}, 1.0)
    src = PotentialSource.from_model(tail, wall=1.0)
    res = solve_bound_states(src, 3)
    assert len(res) == 0 and not res.truncated


def test_truncation_flag_on_short_domain():
    res = solve_bound_states(wall_source(1.25), 10, r_cap=1e4)
    assert res.truncated
    assert 0 < len(res) < 10


def test_wall_monotonicity():
    e_small = solve_bound_states(wall_source(4.25, wall=1.0), 2, r_cap=1e8).energies()
    e_big = solve_bound_states(wall_source(4.25, wall=2.0), 2, r_cap=1e8).energies()
    assert np.all(e_big > e_small)


def test_shooting_matches_dense_diagonalization():
    src = wall_source(144.25)
    sh = solve_bound_states(src, 5, tol=1e-13, step=0.001, r_cap=200.0, pad=7.0)
    den = dense_oracle_energies(src, 5, step=6e-5, r_cap=200.0)
    assert np.all(np.abs(sh.energies() / den - 1) < 1e-7)


def test_threshold_shifted_frame_exact_geometry():
    # pure threshold tail: relative ladder is Efimov-geometric in the shifted frame
    a_eff2 = 4.0
    tail = ModelTail("supercritical-threshold", {"E_th": -0.5, "alpha_eff2": a_eff2}, 1.0)
    src = PotentialSource.from_model(tail, wall=1.0)
    res = solve_bound_states(src, 6, tol=1e-11, r_cap=1e12)
    assert res.energy_offset == -0.5
    erel = res.energies_rel()
    assert np.all(res.energies() < -0.5)
    ratios = erel[1:] / erel[:-1]
    target = math.exp(-2 * math.pi / 2.0)
    assert np.abs(ratios[-1] / target - 1) < 1e-3


def test_subcritical_log_tail_radicand_clamp():
    tail = ModelTail("subcritical-log", {"beta": 0.01, "delta": -0.08}, 1.0)
    R = np.array([2.0, 100.0, 1e6])
    w = tail.w(R)
    assert w[0] == 0.0 and w[1] == 0.0  # below the validity radius
    assert w[2] < 0
