"""Problem-file loader: family kinds, delta tables, prefilters."""
import math

import numpy as np
import pytest

from drqft.problems import ProblemError, load_problem


BASE = {
    "name": "t",
    "timing": {"Ts": 0.4, "N": 2},
    "controllers": {
        "g_fast": {"num": [1.0], "den": [1.0]},
        "g_slow": {"num": [0.5, -0.25], "den": [1.0, -1.0]},
    },
}


def make(plant, **extra):
    obj = dict(BASE)
    obj["plant"] = plant
    obj.update(extra)
    return obj


def test_gain_family():
    p = load_problem(make({
        "kind": "gain",
        "base": {"num": [2.0], "den": [1.0, 1.0]},
        "gains": [0.5, 1.0, 2.0],
        "nominal_index": 1,
    }))
    members = p.family.members()
    assert len(members) == 3
    assert members[0](0.0) == pytest.approx(1.0)
    assert p.family.nominal()(0.0) == pytest.approx(2.0)
    assert members[2](0.0) == pytest.approx(4.0)


def test_coefficient_family_grid_and_nominal():
    p = load_problem(make({
        "kind": "coefficient",
        "num": [[0.0, 1.0]],
        "den": [[1.0], [0.5, 1.0], [0.0, 0.5]],
        "grid": {"start": 0.5, "stop": 2.5, "step": 0.5},
        "nominal_value": 1.5,
    }))
    assert len(p.family.parameter_grid) == 5
    nominal = p.family.nominal()
    # a/((s+0.5)(s+a)) at a = 1.5
    assert nominal(0.0) == pytest.approx(1.5 / 0.75)
    assert np.allclose(np.sort(nominal.poles().real), [-1.5, -0.5], atol=1e-12)


def test_rwip_family_respects_inertia_flag():
    plant = {
        "kind": "rwip",
        "j_f_values": [145.0, 290.0],
        "nominal_j_f": 290.0,
        "actuator_gain": 0.0,  # bare pendulum model
    }
    timing = {"Ts": 0.008, "N": 2}
    p = load_problem(make(plant, timing=timing))
    members = p.family.members()
    assert np.allclose(members[0].den.coeffs, members[1].den.coeffs)
    plant2 = dict(plant, vary_total_inertia=True)
    p2 = load_problem(make(plant2, timing=timing))
    m2 = p2.family.members()
    assert not np.allclose(
        np.sort(m2[0].poles().real), np.sort(m2[1].poles().real), rtol=1e-3
    )


def test_delta_table_and_constant():
    spec = {
        "delta1": {"kind": "table", "omega": [0.0, 1.0, 10.0], "values": [0.1, 0.5, 2.0]},
        "delta2": {"kind": "constant", "value": 1.4},
        "reference": {"kind": "step"},
        "dtrack_frequencies": [0.5],
        "ctrack_frequencies": [0.5],
    }
    p = load_problem(make(
        {"kind": "explicit", "members": [{"num": [1.0], "den": [1.0, 1.0]}]},
        specs=spec,
    ))
    assert p.specs.delta1(1.0) == pytest.approx(0.5)
    assert p.specs.delta1(5.5) == pytest.approx(1.25)  # interpolated
    assert p.specs.delta2(123.0) == pytest.approx(1.4)


def test_design_frequencies_scale_with_nyquist():
    p = load_problem(make(
        {"kind": "explicit", "members": [{"num": [1.0], "den": [1.0, 1.0]}]},
        specs={"mu": 0.5, "stability_frequencies": [0.5, 1.0]},
    ))
    nyq = math.pi / 0.4
    assert p.specs.stability_frequencies == (0.5 * nyq, nyq)


def test_improper_controller_rejected():
    obj = make({"kind": "explicit", "members": [{"num": [1.0], "den": [1.0, 1.0]}]})
    obj["controllers"] = {
        "g_fast": {"num": [1.0, 0.0, 0.0], "den": [1.0, 0.5]},
        "g_slow": {"num": [1.0], "den": [1.0]},
    }
    with pytest.raises(ProblemError):
        load_problem(obj)


def test_explicit_prefilter_discrete():
    obj = make({"kind": "explicit", "members": [{"num": [1.0], "den": [1.0, 1.0]}]})
    obj["prefilters"] = {
        "f": {"num": [1.0], "den": [0.1, 1.0]},
        "f_l": {"num": [0.4], "den": [1.0, -0.6]},
    }
    p = load_problem(obj)
    assert p.prefilter_d is not None
    assert p.prefilter_d.sample_time == pytest.approx(0.4)
    loop = p.nominal_loop()
    assert np.allclose(loop.prefilter_d.num.coeffs, [0.4])
