"""Closed-loop frequency-domain quantities of the dual-rate loop.

The loop object caches the exact lifted plant and the closed-loop rational
forms, so every response here is the evaluation of a fixed rational
function: no per-call discretization, no frequency grids baked in.

Conventions.  The complementary sensitivity returned by
``comp_sensitivity`` is normalized per sample period (the literal
operator chain divided by Ts).  With that normalization a harmonic
reference cos(w0 t) produces the steady-state output

    y(t) = Re[ F_L(e^{j w0 Ts}) * sum_k T(j(w0 + k 2pi/Ts)) e^{j(...)t} ],

i.e. |T| read at the aliased frequencies is directly the per-line output
amplitude, which is what the time-domain simulator reproduces.
``continuous_sensitivity`` supports two conventions, see its docstring.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .lti import RationalTF, compose
from .sampling import (
    DualRateTiming,
    ReferenceSignal,
    hold_response,
    lift_downsample,
    reference_ratio,
    starred_transform,
    zoh_discretize,
)

__all__ = [
    "DualRateLoop",
    "HarmonicResponse",
    "SingularLoop",
    "DeltaSupport",
    "ZeroReferenceSpectrum",
    "make_loop",
    "s_l",
    "comp_sensitivity",
    "output_spectrum",
    "output_spectrum_sampled",
    "harmonic_response",
    "continuous_sensitivity",
]


class SingularLoop(Exception):
    """1 + G_L * P_L vanishes at the requested frequency."""


class DeltaSupport(Exception):
    """Frequency sits on a spectral line of the sampled reference."""


class ZeroReferenceSpectrum(Exception):
    """Reference spectrum vanishes at the requested frequency."""


@dataclass(frozen=True)
class DualRateLoop:
    """Plant + two-rate controller + prefilters, with cached derived systems.

    ``lifted`` is the slow-rate equivalent of plant -> fast ZOH -> fast
    controller -> repeat-hold upsampler; ``fast_discretized`` is the fast
    ZOH equivalent of the plant alone.
    """

    plant: RationalTF
    g_fast: RationalTF
    g_slow: RationalTF
    prefilter_c: RationalTF
    prefilter_d: RationalTF
    timing: DualRateTiming
    fast_discretized: RationalTF
    lifted: RationalTF
    # closed-loop rationals in z_s (den = den_L + num_L):
    sensitivity_tf: RationalTF          # S_L = d_L / (d_L + n_L)
    closed_slow_tf: RationalTF          # G_L * S_L = n_g d_p / (d_L + n_L)

    def open_loop(self) -> RationalTF:
        """L = G_L * P_L without stable-pair cancellation surprises."""
        return compose(self.g_slow, self.lifted, "series")


def make_loop(
    plant: RationalTF,
    g_fast: RationalTF,
    g_slow: RationalTF,
    timing: DualRateTiming,
    prefilter_c: RationalTF | None = None,
    prefilter_d: RationalTF | None = None,
) -> DualRateLoop:
    """Assemble a loop, deriving P_R, P_L and the discrete prefilter.

    When ``prefilter_d`` is omitted it is the zero-order-hold
    discretization of the continuous prefilter at the slow period.
    """
    if plant.is_discrete:
        raise ValueError("plant must be continuous")
    if not g_fast.is_discrete or not g_slow.is_discrete:
        raise ValueError("controllers must be discrete")
    if not math.isclose(g_fast.sample_time, timing.Tf, rel_tol=1e-9):
        raise ValueError("fast controller period must match Tf")
    if not math.isclose(g_slow.sample_time, timing.Ts, rel_tol=1e-9):
        raise ValueError("slow controller period must match Ts")
    if prefilter_c is None:
        prefilter_c = RationalTF.constant(1.0)
    if prefilter_d is None:
        prefilter_d = zoh_discretize(prefilter_c, timing.Ts)

    p_r = zoh_discretize(plant, timing.Tf)
    fast_chain = compose(p_r, g_fast, "series")
    p_l = lift_downsample(fast_chain, timing.N)

    n_g, d_g = g_slow.num, g_slow.den
    n_p, d_p = p_l.num, p_l.den
    closed_den = d_g * d_p + n_g * n_p
    sensitivity_tf = RationalTF(d_g * d_p, closed_den, timing.Ts)
    closed_slow_tf = RationalTF(n_g * d_p, closed_den, timing.Ts)

    return DualRateLoop(
        plant=plant,
        g_fast=g_fast,
        g_slow=g_slow,
        prefilter_c=prefilter_c,
        prefilter_d=prefilter_d,
        timing=timing,
        fast_discretized=p_r,
        lifted=p_l,
        sensitivity_tf=sensitivity_tf,
        closed_slow_tf=closed_slow_tf,
    )


def s_l(loop: DualRateLoop, omega: float) -> complex:
    """Discrete sensitivity 1 / (1 + G_L(e^{j w Ts}) P_L(e^{j w Ts}))."""
    val = loop.sensitivity_tf.at_frequency(omega)
    closed = loop.sensitivity_tf.den.__call__(
        cmath.exp(1j * omega * loop.timing.Ts)
    )
    scale = max(np.max(np.abs(loop.sensitivity_tf.den.coeffs)), 1.0)
    if abs(closed) < 1e-12 * scale:
        raise SingularLoop(f"closed loop singular at omega={omega}")
    return val


def comp_sensitivity(loop: DualRateLoop, omega: float) -> complex:
    """Per-harmonic gain from the sampled reference to the continuous output.

    P(jw) * G_R(e^{j w Tf}) * H_Ts(jw) * G_L(e^{j w Ts}) * S_L(e^{j w Ts}),
    normalized by Ts so that the value is directly the amplitude of the
    corresponding output line for a unit harmonic reference.  Defined for
    all real frequencies, not just below the slow Nyquist rate.
    """
    t = loop.timing
    chain = (
        loop.plant.at_frequency(omega)
        * loop.g_fast(cmath.exp(1j * omega * t.Tf))
        * hold_response(t.Ts, omega)
        * loop.closed_slow_tf.at_frequency(omega)
    )
    return chain / t.Ts


def _comp_sensitivity_exact(loop: DualRateLoop, omega: float) -> complex:
    """Un-normalized operator chain (spectrum-level gain, = Ts * T)."""
    return comp_sensitivity(loop, omega) * loop.timing.Ts


def output_spectrum(loop: DualRateLoop, ref: ReferenceSignal, omega: float) -> complex:
    """Output line amplitude T(jw) * F_L(e^{j w Ts}) * R*(e^{j w Ts}).

    Uses the rational part of the sampled reference spectrum; frequencies
    on the reference's spectral lines must go through
    ``harmonic_response`` instead.
    """
    t = loop.timing
    if ref.delta_support(t.Ts, omega):
        raise DeltaSupport(
            f"omega={omega} lies on the sampled reference's spectral lines"
        )
    star = starred_transform(ref, t.Ts)
    return (
        comp_sensitivity(loop, omega)
        * loop.prefilter_d.at_frequency(omega)
        * star(omega)
    )


def output_spectrum_sampled(loop: DualRateLoop, ref: ReferenceSignal, omega: float) -> complex:
    """Sampled-output spectrum (1 - S_L) F_L R* at the slow rate."""
    t = loop.timing
    if ref.delta_support(t.Ts, omega):
        raise DeltaSupport(
            f"omega={omega} lies on the sampled reference's spectral lines"
        )
    star = starred_transform(ref, t.Ts)
    one_minus_sl = 1.0 - loop.sensitivity_tf.at_frequency(omega)
    return one_minus_sl * loop.prefilter_d.at_frequency(omega) * star(omega)


@dataclass(frozen=True)
class HarmonicResponse:
    """Truncated line spectrum of the response to cos(w0 t).

    terms[k] = (nu_k, c_k) for nu_k = w0 + k*2pi/Ts, k = -K..K; the real
    signal is y(t) = Re( sum_k c_k exp(j nu_k t) ).  Frequencies with
    negative nu represent the mirrored branch (their conjugates land on
    |nu|).  ``tail_bound`` is the magnitude of the first discarded line.
    """

    fundamental: float
    terms: tuple[tuple[float, complex], ...]
    tail_bound: float

    def synthesize(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for nu, c in self.terms:
            out += np.real(c * np.exp(1j * nu * t))
        return out

    def amplitude_at(self, nu: float, tol: float = 1e-9) -> float:
        """Real amplitude of the merged line at |nu| (conjugate pairs combined)."""
        acc = 0.0 + 0.0j
        for f, c in self.terms:
            if abs(f - nu) < tol:
                acc += c
            elif abs(f + nu) < tol:
                acc += np.conj(c)
        return abs(acc)


def harmonic_response(loop: DualRateLoop, omega0: float, K: int = 8) -> HarmonicResponse:
    """Line spectrum of the steady-state response to cos(omega0 t).

    Keeps lines at omega0 + k*2pi/Ts for k = -K..K.  The discarded-tail
    certificate is the largest |T| just outside the kept window.
    """
    if K < 0:
        raise ValueError("K must be non-negative")
    t = loop.timing
    fl = loop.prefilter_d(cmath.exp(1j * omega0 * t.Ts))
    terms = []
    for k in range(-K, K + 1):
        nu = omega0 + k * 2 * math.pi / t.Ts
        terms.append((nu, fl * comp_sensitivity(loop, nu)))
    tail = 0.0
    for k in (K + 1, K + 2, -(K + 1), -(K + 2)):
        nu = omega0 + k * 2 * math.pi / t.Ts
        tail = max(tail, abs(comp_sensitivity(loop, nu)))
    return HarmonicResponse(fundamental=omega0, terms=tuple(terms), tail_bound=tail)


def continuous_sensitivity(
    loop: DualRateLoop,
    ref: ReferenceSignal,
    omega: float,
    convention: str = "exact",
) -> complex:
    """Tracking-error ratio E(jw)/R(jw) for the given reference.

    convention="exact": the operator-exact ratio
        F - P G_R H_Ts G_L S_L F_L R*/R,
    which tends to 0 at dc for loops with integral action and is the form
    whose robust-design boundaries this package computes.

    convention="plotted": F * (1 - T (F_L/F) (R*/R)) with the per-period
    normalized T of ``comp_sensitivity``; this is the reported-curve
    convention for the intersample tracking peak.  The two differ by the
    hold factor H_Ts(jw)/Ts inside the cross term.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    t = loop.timing
    f_val = loop.prefilter_c.at_frequency(omega)
    fl_val = loop.prefilter_d.at_frequency(omega)
    try:
        ratio = reference_ratio(ref, t.Ts, omega)
    except ZeroDivisionError as exc:
        raise ZeroReferenceSpectrum(str(exc)) from exc

    if convention == "plotted":
        cross = comp_sensitivity(loop, omega) * fl_val * ratio
    elif convention == "exact":
        cross = _comp_sensitivity_exact(loop, omega) * fl_val * ratio
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return f_val - cross
