"""Closed-loop frequency-domain quantities."""
import cmath
import math

import numpy as np
import pytest

from drqft import (
    DeltaSupport,
    RationalTF,
    ReferenceSignal,
    compose,
    harmonic_response,
    hold_response,
    output_spectrum,
    output_spectrum_sampled,
    s_l,
    starred_transform,
)
from drqft.spectra import comp_sensitivity, continuous_sensitivity, make_loop

from conftest import bench_plant, wrap_phase_to


def test_sl_open_loop_is_one(bench_timing, g_fast):
    g_zero = RationalTF([0.0], [1.0], bench_timing.Ts)
    loop = make_loop(bench_plant(), g_fast, g_zero, bench_timing)
    for w in (0.1, 1.0, 5.0):
        assert s_l(loop, w) == pytest.approx(1.0)


def test_sl_vanishes_at_dc_with_integral_action(bench_loop):
    assert abs(s_l(bench_loop, 1e-9)) < 1e-6


def test_sl_below_two_across_band(bench_loop, bench_timing):
    ws = np.linspace(1e-3, math.pi / bench_timing.Ts, 400)
    mags = [abs(s_l(bench_loop, w)) for w in ws]
    assert max(mags) < 2.0


COMP_SENS_FIXTURES = [
    (1, 0.2545, -178.5),
    (3, 0.3166, -265.3),
]


@pytest.mark.parametrize("mult,mag,phase", COMP_SENS_FIXTURES)
def test_comp_sensitivity_fixture_values(bench_loop, mult, mag, phase):
    T = comp_sensitivity(bench_loop, mult * math.pi / 0.4)
    assert abs(T) == pytest.approx(mag, rel=0.01)
    got = wrap_phase_to(math.degrees(cmath.phase(T)), phase)
    assert got == pytest.approx(phase, abs=1.5)


def test_comp_sensitivity_third_fixture_print_precision(bench_loop):
    """The 2-significant-digit reported value is matched to print precision.

    The ratio |T(5 pi/0.4)| / |T(pi/0.4)| is independent of every
    controller coefficient (only the plant and the hold enter), which
    pins |T(5 pi/0.4)| = 0.002077 given the first fixture; that rounds to
    the reported 0.0021 but sits 1.1% under it.  The acceptance suite
    carries the literal 1% check; see the decisions ledger.
    """
    T = comp_sensitivity(bench_loop, 5 * math.pi / 0.4)
    assert abs(T) == pytest.approx(0.0021, abs=5e-5)
    got = wrap_phase_to(math.degrees(cmath.phase(T)), -344.3)
    assert got == pytest.approx(-344.3, abs=1.5)


def test_comp_sensitivity_conjugate_symmetry(bench_loop):
    rng = np.random.default_rng(5)
    for _ in range(100):
        w = rng.uniform(0.01, 60.0)
        a = comp_sensitivity(bench_loop, w)
        b = comp_sensitivity(bench_loop, -w)
        assert abs(b - np.conj(a)) <= 1e-12 * (1 + abs(a))


def test_comp_sensitivity_periodic_factorization(bench_loop, bench_timing):
    """T at w and w + 2pi/Ts differ only through the non-periodic factors."""
    t = bench_timing
    rng = np.random.default_rng(8)
    for _ in range(20):
        w = rng.uniform(0.05, 7.0)
        w2 = w + 2 * math.pi / t.Ts

        def cont_factor(x):
            return (
                bench_loop.plant.at_frequency(x)
                * bench_loop.g_fast(cmath.exp(1j * x * t.Tf))
                * hold_response(t.Ts, x)
            )

        lhs = comp_sensitivity(bench_loop, w2) * cont_factor(w)
        rhs = comp_sensitivity(bench_loop, w) * cont_factor(w2)
        assert abs(lhs - rhs) <= 1e-10 * (1 + abs(rhs))


def test_output_spectrum_step_component(bench_loop_filtered):
    ref = ReferenceSignal("step")
    val = output_spectrum(bench_loop_filtered, ref, 3 * math.pi / 0.4)
    assert abs(val) == pytest.approx(0.1527, rel=0.02)


def test_output_spectrum_zero_when_sampled_reference_vanishes(bench_loop, bench_timing):
    # a sine at the slow Nyquist rate samples to the zero sequence
    ref = ReferenceSignal("sinusoid", frequency=math.pi / bench_timing.Ts)
    star = starred_transform(ref, bench_timing.Ts)
    assert star.z_tf.num.is_zero
    val = output_spectrum(bench_loop, ref, 2.2)
    assert val == 0


def test_output_spectrum_rejects_delta_support(bench_loop_filtered, bench_timing):
    ref = ReferenceSignal("step")
    with pytest.raises(DeltaSupport):
        output_spectrum(bench_loop_filtered, ref, 2 * math.pi / bench_timing.Ts)


def test_sampled_output_identity(bench_loop_filtered, bench_timing):
    """(1 - S_L) F_L R* equals the closed-form slow-loop response."""
    ref = ReferenceSignal("step")
    star = starred_transform(ref, bench_timing.Ts)
    closed = compose(
        compose(bench_loop_filtered.g_slow, bench_loop_filtered.lifted, "series"),
        mode="feedback_unity",
    )
    rng = np.random.default_rng(4)
    for _ in range(32):
        w = rng.uniform(0.05, 7.0)
        lhs = output_spectrum_sampled(bench_loop_filtered, ref, w)
        rhs = (
            closed.at_frequency(w)
            * bench_loop_filtered.prefilter_d.at_frequency(w)
            * star(w)
        )
        assert abs(lhs - rhs) <= 1e-10 * (1 + abs(rhs))


def test_harmonic_response_merges_mirrored_lines(bench_loop):
    """At the slow Nyquist fundamental the mirrored chain doubles each line."""
    w0 = math.pi / 0.4
    hr = harmonic_response(bench_loop, w0, K=2)
    t1 = abs(comp_sensitivity(bench_loop, w0))
    t3 = abs(comp_sensitivity(bench_loop, 3 * w0))
    assert hr.amplitude_at(w0) == pytest.approx(2 * t1, rel=1e-9)
    assert hr.amplitude_at(3 * w0) == pytest.approx(2 * t3, rel=1e-9)
    assert hr.tail_bound < 0.02


def test_harmonic_response_zero_when_gain_vanishes(bench_loop, bench_timing):
    # the hold zero kills the response at the slow sampling frequency
    w0 = 2 * math.pi / bench_timing.Ts
    hr = harmonic_response(bench_loop, w0, K=0)
    ts = np.linspace(0, 2.0, 200)
    assert np.max(np.abs(hr.synthesize(ts))) < 1e-12


def test_continuous_sensitivity_plotted_peak(bench_loop_filtered):
    ref = ReferenceSignal("step")
    val = continuous_sensitivity(
        bench_loop_filtered, ref, 3 * math.pi / 0.4, convention="plotted"
    )
    db = 20 * math.log10(abs(val))
    assert db == pytest.approx(11.0, abs=1.0)


def test_continuous_sensitivity_exact_dc_limits(bench_loop_filtered, bench_timing, g_fast):
    ref = ReferenceSignal("step")
    # integral action: error ratio vanishes at dc
    val = continuous_sensitivity(bench_loop_filtered, ref, 1e-6)
    assert abs(val) < 1e-4
    # without integral action the limit is F(0) * S_L(1)
    g_def = RationalTF([2.0, -1.0], [1.0, -0.3], bench_timing.Ts)
    loop = make_loop(
        bench_plant(), g_fast, g_def, bench_timing,
        prefilter_c=RationalTF([1.0], [0.1, 1.0]),
    )
    lim = continuous_sensitivity(loop, ref, 1e-7)
    want = abs(loop.prefilter_c(0.0)) * abs(s_l(loop, 0.0))
    assert abs(lim) == pytest.approx(want, rel=1e-3)


def test_continuous_sensitivity_notched_below_spec(bench_loop_notched):
    """The retuned loop keeps the intersample error under the beyond-Nyquist bound."""
    ref = ReferenceSignal("step")
    val = continuous_sensitivity(bench_loop_notched, ref, 3 * math.pi / 0.4)
    assert abs(val) < 1.0


def test_make_loop_derives_discrete_prefilter(bench_loop_filtered, bench_timing):
    fl = bench_loop_filtered.prefilter_d
    a = math.exp(-10 * bench_timing.Ts)
    assert np.allclose(fl.num.coeffs, [1.0 - a], atol=1e-12)
    assert np.allclose(fl.den.coeffs, [1.0, -a], atol=1e-12)
