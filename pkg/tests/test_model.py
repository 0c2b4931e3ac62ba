import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trimerlab.errors import ConfigError, SingularInputError
from trimerlab.model import (
    BOSON_0P,
    FERMION_1P,
    CutoffForm,
    HyperangularPoint,
    ModelConfig,
    pair_distances,
    pair_potential,
    total_potential,
)


def test_pure_potential_trivial_value():
    cfg = ModelConfig(alpha2=0.0, cutoff=CutoffForm.NONE)
    assert pair_potential(1.0, cfg) == pytest.approx(-0.25, rel=1e-15)


def test_sech2_at_origin_equals_quarter():
    cfg = ModelConfig(alpha2=0.0, cutoff=CutoffForm.SECH2, r0=1.0)
    assert pair_potential(0.0, cfg) == pytest.approx(-0.25, rel=1e-15)


def test_regularized_matches_pure_far_out():
    cfg = ModelConfig(alpha2=0.0, cutoff=CutoffForm.SECH2, r0=1.0)
    pure = ModelConfig(alpha2=0.0, cutoff=CutoffForm.NONE)
    v_reg = pair_potential(100.0, cfg)
    v_pure = pair_potential(100.0, pure)
    # sech^2 term is doubly-exponentially small; float values must coincide
    assert v_reg == v_pure or abs(v_reg / v_pure - 1) < 1e-80


def test_pure_potential_singular_at_origin():
    cfg = ModelConfig(alpha2=0.0, cutoff=CutoffForm.NONE)
    with pytest.raises(SingularInputError):
        pair_potential(0.0, cfg)


def test_alpha2_below_quarter_rejected():
    with pytest.raises(ConfigError):
        ModelConfig(alpha2=-0.26)


def test_nonpositive_r0_rejected_unless_pure():
    with pytest.raises(ConfigError):
        ModelConfig(alpha2=0.0, r0=0.0)
    ModelConfig(alpha2=0.0, r0=-1.0, cutoff=CutoffForm.NONE)  # r0 ignored


@given(s=st.floats(min_value=0.1, max_value=10.0),
       r=st.floats(min_value=1e-3, max_value=1e3))
def test_cutoff_scaling_law(s, r):
    for form in (CutoffForm.SECH2, CutoffForm.GAUSSIAN, CutoffForm.CONSTANT):
        a = pair_potential(r, ModelConfig(alpha2=0.3, r0=s, cutoff=form))
        b = pair_potential(r / s, ModelConfig(alpha2=0.3, r0=1.0, cutoff=form)) / s**2
        assert a == pytest.approx(b, rel=1e-13)


def test_equilateral_distances():
    p = HyperangularPoint(R=5.0, theta=0.0, phi=1.234)
    r = pair_distances(p)
    assert np.allclose(r, 3 ** (-0.25) * 5.0, rtol=1e-14)


def test_two_body_coincidence():
    p = HyperangularPoint(R=2.0, theta=math.pi / 2, phi=math.pi)
    r = pair_distances(p)
    assert r[0] == pytest.approx(0.0, abs=1e-8)


@given(R=st.floats(min_value=1e-2, max_value=1e6),
       theta=st.floats(min_value=0.0, max_value=math.pi / 2),
       phi=st.floats(min_value=0.0, max_value=2 * math.pi - 1e-9))
def test_distance_sum_rule(R, theta, phi):
    r = pair_distances(HyperangularPoint(R, theta, phi))
    assert sum(x * x for x in r) == pytest.approx(math.sqrt(3) * R * R, rel=1e-12)


def test_zero_coefficient_switches_potential_off():
    cfg = ModelConfig(alpha2=-0.25)
    p = HyperangularPoint(3.0, 0.7, 0.4)
    assert total_potential(p, cfg) == 0.0


def test_equilateral_total_potential():
    cfg = ModelConfig(alpha2=0.0, cutoff=CutoffForm.SECH2, r0=1.0)
    p = HyperangularPoint(10.0, 0.0, 0.0)
    expect = 3 * pair_potential(3 ** (-0.25) * 10.0, cfg)
    assert total_potential(p, cfg) == pytest.approx(expect, rel=1e-14)


@settings(max_examples=40)
@given(theta=st.floats(min_value=1e-3, max_value=math.pi / 2 - 1e-3),
       phi=st.floats(min_value=0.0, max_value=2 * math.pi - 1e-9))
def test_permutation_symmetry(theta, phi):
    cfg = ModelConfig(alpha2=0.1, cutoff=CutoffForm.SECH2, r0=1.0)
    R = 7.0
    v0 = total_potential(HyperangularPoint(R, theta, phi), cfg)
    v_rot = total_potential(
        HyperangularPoint(R, theta, (phi + 2 * math.pi / 3) % (2 * math.pi)), cfg)
    v_ref = total_potential(HyperangularPoint(R, theta, (-phi) % (2 * math.pi)), cfg)
    assert v_rot == pytest.approx(v0, rel=1e-12)
    assert v_ref == pytest.approx(v0, rel=1e-12)


def test_subcritical_potential_nonpositive():
    cfg = ModelConfig(alpha2=-0.1, cutoff=CutoffForm.GAUSSIAN)
    r = np.geomspace(1e-3, 1e3, 50)
    assert np.all(pair_potential(r, cfg) < 0)


def test_config_json_round_trip():
    cfg = ModelConfig(alpha2=0.5, r0=2.0, cutoff=CutoffForm.GAUSSIAN, sector=FERMION_1P)
    back = ModelConfig.from_json(cfg.to_json())
    assert back == cfg
    d = cfg.to_dict()
    assert d["cutoff"] == "gaussian"
    assert d["sector"] == {"statistics": "fermion", "J": 1, "parity": 1}


def test_sector_validation():
    assert BOSON_0P.is_bosonic_ground_sector
    assert not FERMION_1P.is_bosonic_ground_sector
    with pytest.raises(ConfigError):
        ModelConfig.from_dict({"alpha2": 0.0, "cutoff": "sinc"})
