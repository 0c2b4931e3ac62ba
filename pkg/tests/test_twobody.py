import math

import numpy as np
import pytest

from trimerlab.errors import ConfigError, DomainTooSmallError
from trimerlab.model import CutoffForm, ModelConfig
from trimerlab.twobody import (
    is_subcritical,
    lowest_threshold,
    radial_effective_potential,
    solve_two_body,
)


def test_effective_potential_criticality_algebra():
    # l=1, alpha2=2, pure form: net coefficient -1/4 over m r^2
    cfg = ModelConfig(alpha2=2.0, cutoff=CutoffForm.NONE)
    r = 3.7
    v = radial_effective_potential(r, cfg, 1)
    assert v == pytest.approx(-0.25 / r**2, rel=1e-14)


def test_effective_potential_l0_pure():
    cfg = ModelConfig(alpha2=0.0, cutoff=CutoffForm.NONE)
    assert radial_effective_potential(2.0, cfg, 0) == pytest.approx(-0.25 / 4.0, rel=1e-14)


def test_effective_potential_cutoff_vanishes_far_out():
    cfg = ModelConfig(alpha2=1.0, cutoff=CutoffForm.SECH2, r0=1.0)
    r = 1e4
    assert radial_effective_potential(r, cfg, 0) == pytest.approx(-1.25 / r**2, rel=1e-7)


def test_subcritical_is_empty():
    levels = solve_two_body(ModelConfig(alpha2=0.0), l=0, n_levels=3,
                            domain=(1e-3, 1e6))
    assert len(levels) == 0


def test_l1_no_dimer_up_to_alpha2_of_two():
    assert is_subcritical(ModelConfig(alpha2=2.0), 1)
    assert len(solve_two_body(ModelConfig(alpha2=2.0), l=1, n_levels=2,
                              domain=(1e-3, 1e6))) == 0
    assert not is_subcritical(ModelConfig(alpha2=2.1), 1)


def test_pure_cutoff_rejected():
    with pytest.raises(ConfigError):
        solve_two_body(ModelConfig(alpha2=1.0, cutoff=CutoffForm.NONE), 0, 1)


@pytest.fixture(scope="module")
def alpha1_ladder():
    return solve_two_body(ModelConfig(alpha2=1.0), l=0, n_levels=7,
                          domain=(1e-4, 1e12), tol=1e-10)


def test_geometric_energy_ratios(alpha1_ladder):
    E = alpha1_ladder.energies()
    ratios = E[4:7] / E[3:6]
    assert np.all(np.abs(ratios / math.exp(-2 * math.pi) - 1) < 0.01)


def test_geometric_radius_ratios(alpha1_ladder):
    r = alpha1_ladder.radii()
    ratios = r[4:7] / r[3:6]
    assert np.all(np.abs(ratios / math.exp(math.pi) - 1) < 0.02)


def test_node_theorem(alpha1_ladder):
    assert [lv.nodes for lv in alpha1_ladder.levels] == list(range(7))


def test_ratio_monotone_convergence(alpha1_ladder):
    E = alpha1_ladder.energies()
    devs = np.abs(E[1:] / E[:-1] - math.exp(-2 * math.pi))
    assert devs[1] < devs[0]


def test_r0_scaling():
    a = solve_two_body(ModelConfig(alpha2=1.0, r0=1.0), 0, 3, (1e-4, 1e10), tol=1e-10)
    b = solve_two_body(ModelConfig(alpha2=1.0, r0=2.0), 0, 3, (2e-4, 2e10), tol=1e-10)
    assert np.allclose(b.energies(), a.energies() / 4.0, rtol=1e-9)
    # radii carry the quadrature error of the shifted log grid
    assert np.allclose(b.radii(), a.radii() * 2.0, rtol=1e-5)


def test_variational_monotonicity_in_alpha2():
    e1 = solve_two_body(ModelConfig(alpha2=1.0), 0, 1, (1e-4, 1e8)).energies()[0]
    e2 = solve_two_body(ModelConfig(alpha2=1.02), 0, 1, (1e-4, 1e8)).energies()[0]
    assert e2 < e1


def test_domain_too_small():
    with pytest.raises(DomainTooSmallError):
        solve_two_body(ModelConfig(alpha2=1.0), 0, 8, (1e-4, 1e6))


def test_lowest_threshold_none_when_subcritical():
    assert lowest_threshold(ModelConfig(alpha2=0.0)) is None


def test_csv_export(tmp_path, alpha1_ladder):
    path = tmp_path / "twobody.csv"
    alpha1_ladder.to_csv(path, manifest_hash="deadbeef")
    lines = path.read_text().splitlines()
    assert lines[0] == "# manifest_hash=deadbeef"
    assert lines[1] == "v,l,E,r_mean,nodes"
    assert len(lines) == 2 + 7
