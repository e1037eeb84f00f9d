"""Exact time-domain simulation of the dual-rate closed loop.

The continuous plant sees a piecewise-constant input, so integration is
exact: one matrix exponential per substep, no ODE stepper.  Discrete
controllers run as transposed direct-form-II difference equations.  This
module is the independent oracle for every frequency-domain claim the
rest of the package makes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .lti import ImproperTF, RationalTF, to_state_space
from .sampling import DualRateTiming, ReferenceSignal
from .spectra import DualRateLoop

__all__ = [
    "SimTrace",
    "RippleReport",
    "InsufficientSteadyState",
    "NonPositiveInertia",
    "simulate",
    "ripple_metrics",
    "rwip_plant",
    "RWIP_TABLE",
]


class InsufficientSteadyState(Exception):
    """Trace too short to isolate a steady-state fitting window."""


class NonPositiveInertia(Exception):
    """Flywheel inertia must be positive."""


class _DF2T:
    """Transposed direct-form II realization of a discrete transfer function."""

    def __init__(self, tf: RationalTF):
        if not tf.is_proper:
            raise ImproperTF("difference equation needs a proper transfer function")
        den = np.asarray(tf.den.coeffs, dtype=float)
        num = np.asarray(tf.num.coeffs, dtype=float)
        n = len(den)
        num = np.concatenate([np.zeros(n - len(num)), num])
        self.b = num
        self.a = den
        self.state = np.zeros(n - 1)

    def step(self, u: float) -> float:
        if self.state.size == 0:
            return self.b[0] * u
        y = self.b[0] * u + self.state[0]
        s_next = np.empty_like(self.state)
        s_next[:-1] = self.state[1:]
        s_next[-1] = 0.0
        self.state = s_next + self.b[1:] * u - self.a[1:] * y
        return y


@dataclass(frozen=True)
class SimTrace:
    """Dense closed-loop trace plus the slow-rate samples."""

    t: np.ndarray        # substep times, strictly increasing, starts at 0
    y: np.ndarray        # plant output at t
    u: np.ndarray        # plant input active on [t_k, t_{k+1})
    t_slow: np.ndarray   # k*Ts
    y_slow: np.ndarray   # output samples at k*Ts
    u_slow: np.ndarray   # slow controller outputs
    r: np.ndarray        # reference samples at k*Ts
    timing: DualRateTiming

    def to_csv(self) -> str:
        lines = ["t,r,u,y"]
        r_dense = np.repeat(self.r, len(self.t) // max(len(self.r), 1))[: len(self.t)]
        for i, (ti, yi, ui) in enumerate(zip(self.t, self.y, self.u)):
            ri = r_dense[i] if i < len(r_dense) else r_dense[-1]
            lines.append(f"{ti:.12g},{ri:.12g},{ui:.12g},{yi:.12g}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "t": self.t.tolist(),
            "y": self.y.tolist(),
            "u": self.u.tolist(),
            "t_slow": self.t_slow.tolist(),
            "y_slow": self.y_slow.tolist(),
            "u_slow": self.u_slow.tolist(),
            "r": self.r.tolist(),
            "Ts": self.timing.Ts,
            "Tf": self.timing.Tf,
            "N": self.timing.N,
        }


def simulate(
    loop: DualRateLoop,
    ref: ReferenceSignal,
    t_end: float,
    substeps: int = 8,
) -> SimTrace:
    """Run the closed loop from rest until ``t_end``.

    Per slow period: sample the output, apply the discrete prefilter to
    the sampled reference, form the slow error, advance the slow
    controller, hold its output over N fast periods, advance the fast
    controller each fast period, and integrate the plant exactly with the
    held actuator value.  Output resolution is Tf/substeps.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if substeps < 1:
        raise ValueError("substeps must be at least 1")
    t = loop.timing
    plant_ss = to_state_space(loop.plant)
    if abs(plant_ss.D[0, 0]) > 0:
        raise ImproperTF("plant must be strictly proper")
    n = plant_ss.order
    tau = t.Tf / substeps
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = plant_ss.A
    M[:n, n:] = plant_ss.B
    Md = expm(M * tau)
    Ad, Bd = Md[:n, :n], Md[:n, n:]
    C = plant_ss.C

    g_slow = _DF2T(loop.g_slow)
    g_fast = _DF2T(loop.g_fast)
    f_slow = _DF2T(loop.prefilter_d)

    n_slow = int(math.ceil(t_end / t.Ts))
    x = np.zeros((n, 1))

    times = [0.0]
    ys = [float((C @ x).item())]
    us = []
    t_slow = []
    y_slow = []
    u_slow = []
    r_samp = []

    for k in range(n_slow):
        tk = k * t.Ts
        yk = float((C @ x).item())
        rk = ref.sample(tk)
        ek = f_slow.step(rk) - yk
        uk = g_slow.step(ek)
        t_slow.append(tk)
        y_slow.append(yk)
        u_slow.append(uk)
        r_samp.append(rk)
        for i in range(t.N):
            uf = g_fast.step(uk)
            for m in range(substeps):
                us.append(uf)
                x = Ad @ x + Bd * uf
                times.append(tk + (i * substeps + m + 1) * tau)
                ys.append(float((C @ x).item()))
    us.append(us[-1] if us else 0.0)

    return SimTrace(
        t=np.asarray(times),
        y=np.asarray(ys),
        u=np.asarray(us),
        t_slow=np.asarray(t_slow),
        y_slow=np.asarray(y_slow),
        u_slow=np.asarray(u_slow),
        r=np.asarray(r_samp),
        timing=t,
    )


@dataclass(frozen=True)
class RippleReport:
    """Least-squares line amplitudes of the steady-state window."""

    fundamental_frequency: float
    fundamental_amplitude: float
    harmonic_amplitudes: tuple[tuple[float, float], ...]
    dominant_ripple_frequency: float
    dominant_ripple_amplitude: float
    steady_state_window: tuple[float, float]
    dc_level: float

    def amplitude_near(self, nu: float, tol: float = 1e-6) -> float:
        for f, a in self.harmonic_amplitudes:
            if abs(f - nu) < tol * max(1.0, abs(nu)):
                return a
        return 0.0

    def to_json(self) -> dict:
        return {
            "fundamental_frequency": self.fundamental_frequency,
            "fundamental_amplitude": self.fundamental_amplitude,
            "harmonics": [[f, a] for f, a in self.harmonic_amplitudes],
            "dominant_ripple_frequency": self.dominant_ripple_frequency,
            "dominant_ripple_amplitude": self.dominant_ripple_amplitude,
            "steady_state_window": list(self.steady_state_window),
            "dc_level": self.dc_level,
        }


def ripple_metrics(
    trace: SimTrace,
    omega0: float | None = None,
    n_harmonics: int | None = None,
    window: tuple[float, float] | None = None,
) -> RippleReport:
    """Fit sinusoid pairs at the expected intersample line frequencies.

    For a harmonic reference (``omega0`` given) the candidate lines sit at
    omega0 and |±omega0 + k*2pi/Ts| and the output itself is fitted.  For
    a step-like reference (``omega0`` None) the lines sit at k*pi/Ts and
    the fit runs on the intersample residual -- the output minus the
    linear interpolation of its slow samples -- which isolates ripple
    from the slow settling modes.  The default window is the trailing 40%
    of the trace; either way it is snapped to whole slow periods and must
    cover at least five of them.
    """
    Ts = trace.timing.Ts
    t_total = trace.t[-1]
    if window is None:
        span = 0.4 * t_total
        periods = int(span / Ts)
        t_start = t_total - periods * Ts
        t_stop = t_total
    else:
        t_start, t_stop = window
        t_stop = min(t_stop, t_total)
        periods = int((t_stop - t_start) / Ts)
        t_start = t_stop - periods * Ts
    if periods < 5:
        raise InsufficientSteadyState(
            f"need at least 5 slow periods in the fitting window; have {periods}"
        )
    sel = (trace.t >= t_start - 1e-12) & (trace.t <= t_stop + 1e-12)
    tw = trace.t[sel]
    yw = trace.y[sel]
    if omega0 is None:
        yw = yw - np.interp(tw, trace.t_slow, trace.y_slow)

    if n_harmonics is None:
        n_harmonics = 2 * trace.timing.N + 2
    freqs: list[float] = []
    if omega0 is None:
        fundamental = 0.0
        for k in range(1, n_harmonics + 1):
            freqs.append(k * math.pi / Ts)
    else:
        fundamental = omega0
        freqs.append(omega0)
        for k in range(1, n_harmonics + 1):
            for nu in (omega0 + k * 2 * math.pi / Ts, -omega0 + k * 2 * math.pi / Ts):
                freqs.append(abs(nu))
    uniq: list[float] = []
    for f in sorted(freqs):
        if f > 1e-12 and (not uniq or abs(f - uniq[-1]) > 1e-9 * max(1.0, f)):
            uniq.append(f)

    cols = [np.ones_like(tw)]
    for f in uniq:
        cols.append(np.cos(f * tw))
        cols.append(np.sin(f * tw))
    X = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(X, yw, rcond=None)
    dc = float(coef[0])
    amps = []
    for i, f in enumerate(uniq):
        c, s = coef[1 + 2 * i], coef[2 + 2 * i]
        amps.append((f, float(math.hypot(c, s))))

    fund_amp = 0.0
    ripple_candidates = []
    for f, a in amps:
        if omega0 is not None and abs(f - omega0) < 1e-9 * max(1.0, omega0):
            fund_amp = a
        else:
            ripple_candidates.append((f, a))
    if not ripple_candidates:
        dom_f, dom_a = 0.0, 0.0
    else:
        dom_f, dom_a = max(ripple_candidates, key=lambda fa: fa[1])

    return RippleReport(
        fundamental_frequency=fundamental,
        fundamental_amplitude=fund_amp,
        harmonic_amplitudes=tuple(amps),
        dominant_ripple_frequency=dom_f,
        dominant_ripple_amplitude=dom_a,
        steady_state_window=(float(t_start), float(t_stop)),
        dc_level=dc,
    )


# ---------------------------------------------------------------------------
# reaction wheel inverted pendulum
# ---------------------------------------------------------------------------

# physical constants of the balancing rig (SI conversions applied in
# rwip_plant): inertias in kg*mm^2, masses in kg, lengths in mm
RWIP_TABLE = {
    "J_p": 413.0,      # pendulum inertia, kg mm^2
    "m_p": 0.233,      # pendulum mass (incl. motor), kg
    "l_p": 84.85,      # pendulum CoG distance, mm
    "J_f_nominal": 290.0,  # flywheel inertia, kg mm^2
    "m_f": 0.147,      # flywheel mass, kg
    "l_f": 84.85,      # flywheel CoG distance, mm
    "B": 0.1,          # joint viscous friction, N m s
    "g": 9.81,         # gravity, m/s^2
}


def rwip_plant(
    j_f: float = RWIP_TABLE["J_f_nominal"],
    vary_total_inertia: bool = False,
    table: dict | None = None,
) -> RationalTF:
    """Linearized pendulum angle over flywheel speed: J_f s / (J_T s^2 + B s - ML g).

    ``j_f`` is in kg*mm^2.  With ``vary_total_inertia`` False the total
    inertia J_T keeps its nominal value, so a flywheel change scales only
    the gain (the gain-only uncertainty reading); True re-derives J_T
    from the varied flywheel.
    """
    if j_f <= 0:
        raise NonPositiveInertia(f"flywheel inertia must be positive, got {j_f}")
    tab = dict(RWIP_TABLE)
    if table:
        tab.update(table)
    mm2 = 1e-6  # kg mm^2 -> kg m^2
    m = 1e-3    # mm -> m
    l_p = tab["l_p"] * m
    l_f = tab["l_f"] * m
    j_for_total = j_f if vary_total_inertia else tab["J_f_nominal"]
    J_T = (
        tab["m_p"] * l_p**2
        + tab["m_f"] * l_f**2
        + tab["J_p"] * mm2
        + j_for_total * mm2
    )
    ML_g = (tab["m_p"] * l_p + tab["m_f"] * l_f) * tab["g"]
    return RationalTF([j_f * mm2, 0.0], [J_T, tab["B"], -ML_g])
