"""Discretization, dual-rate lifting, hold functions and starred transforms.

This module is the bridge between the three time bases of a dual-rate
loop: continuous time, the fast period ``Tf`` and the slow period
``Ts = N * Tf``.  The production path for the lifted plant is exact
(state-space powers); the aliasing sum is kept only as an independent
test oracle with a truncation certificate.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
import numpy as np
from scipy.linalg import expm

from .lti import (
    ImproperTF,
    RationalTF,
    StateSpace,
    from_state_space,
    to_state_space,
)

__all__ = [
    "DualRateTiming",
    "ReferenceSignal",
    "StarredTransform",
    "NonConvergence",
    "UnsupportedMultiplicity",
    "zoh_discretize",
    "lift_downsample",
    "p_l_frequency_sum",
    "hold_response",
    "upsampler_response",
    "starred_transform",
    "reference_ratio",
]


class NonConvergence(Exception):
    """Aliasing sum did not meet its truncation certificate."""


class UnsupportedMultiplicity(Exception):
    """Reference transform has a pole of multiplicity three or higher."""


@dataclass(frozen=True)
class DualRateTiming:
    """Slow period Ts, fast period Tf = Ts/N, integer rate ratio N >= 1."""

    Ts: float
    N: int
    Tf: float = 0.0

    def __init__(self, Ts: float, N: int, Tf: float | None = None):
        if Ts <= 0:
            raise ValueError("Ts must be positive")
        if N < 1 or int(N) != N:
            raise ValueError("N must be a positive integer")
        derived = Ts / N
        if Tf is not None and not math.isclose(Tf, derived, rel_tol=1e-12):
            raise ValueError("Tf must equal Ts/N exactly")
        object.__setattr__(self, "Ts", float(Ts))
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "Tf", derived)

    @property
    def nyquist_slow(self) -> float:
        return math.pi / self.Ts

    @property
    def nyquist_fast(self) -> float:
        return math.pi / self.Tf


@dataclass(frozen=True)
class ReferenceSignal:
    """Causal reference with a rational Laplace transform.

    kinds: step, ramp, sinusoid, damped_sinusoid, exponential.  The
    sinusoid takes an optional phase so that cosine references
    (phase = pi/2) can be expressed; the Laplace transform tracks it:
    A*(s*sin(phase) + b*cos(phase)) / (s^2 + b^2).
    """

    kind: str
    amplitude: float = 1.0
    frequency: float = 0.0   # b, rad/s
    decay: float = 0.0       # a >= 0
    phase: float = 0.0       # sinusoid only

    def __post_init__(self):
        if self.kind not in ("step", "ramp", "sinusoid", "damped_sinusoid", "exponential"):
            raise ValueError(f"unknown reference kind {self.kind!r}")
        if self.decay < 0:
            raise ValueError("decay must be non-negative")
        if self.kind in ("sinusoid", "damped_sinusoid") and self.frequency <= 0:
            raise ValueError("sinusoid needs a positive frequency")

    @property
    def laplace(self) -> RationalTF:
        A, b, a = self.amplitude, self.frequency, self.decay
        if self.kind == "step":
            return RationalTF([A], [1.0, 0.0])
        if self.kind == "ramp":
            return RationalTF([A], [1.0, 0.0, 0.0])
        if self.kind == "exponential":
            return RationalTF([A], [1.0, a])
        if self.kind == "sinusoid":
            sp, cp = math.sin(self.phase), math.cos(self.phase)
            return RationalTF([A * sp, A * b * cp], [1.0, 0.0, b * b])
        # damped sinusoid: A e^{-at} sin(bt)  ->  A b / ((s+a)^2 + b^2)
        return RationalTF([A * b], [1.0, 2 * a, a * a + b * b])

    def sample(self, t: float) -> float:
        if t < 0:
            return 0.0
        A, b, a = self.amplitude, self.frequency, self.decay
        if self.kind == "step":
            return A
        if self.kind == "ramp":
            return A * t
        if self.kind == "exponential":
            return A * math.exp(-a * t)
        if self.kind == "sinusoid":
            return A * math.sin(b * t + self.phase)
        return A * math.exp(-a * t) * math.sin(b * t)

    def imaginary_axis_poles(self) -> list[float]:
        """Frequencies (rad/s, >= 0) where the spectrum is singular."""
        out = []
        for p in self.laplace.poles():
            if abs(p.real) < 1e-12 and p.imag >= -1e-12:
                out.append(max(p.imag, 0.0))
        return sorted(set(out))

    def delta_support(self, Ts: float, omega: float, tol: float = 1e-9) -> bool:
        """True when omega aliases onto a spectral line of the sampled reference."""
        period = 2 * math.pi / Ts
        for wp in self.imaginary_axis_poles():
            for base in (wp, -wp):
                k = round((omega - base) / period)
                if abs(omega - base - k * period) <= tol * max(1.0, period):
                    return True
        return False

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "amplitude": self.amplitude,
            "frequency": self.frequency,
            "decay": self.decay,
            "phase": self.phase,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ReferenceSignal":
        return cls(
            kind=obj["kind"],
            amplitude=float(obj.get("amplitude", 1.0)),
            frequency=float(obj.get("frequency", 0.0)),
            decay=float(obj.get("decay", 0.0)),
            phase=float(obj.get("phase", 0.0)),
        )


@dataclass(frozen=True)
class StarredTransform:
    """z-transform of the sampled causal reference."""

    z_tf: RationalTF

    def __call__(self, omega: float) -> complex:
        return self.z_tf.at_frequency(omega)


# ---------------------------------------------------------------------------
# discretization and lifting
# ---------------------------------------------------------------------------

def _zoh_matrices(ss: StateSpace, T: float):
    """Ad = exp(A T), Bd = int_0^T exp(A tau) dtau B via the augmented exponential."""
    n = ss.order
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = ss.A
    M[:n, n:] = ss.B
    Md = expm(M * T)
    return Md[:n, :n], Md[:n, n:]


def zoh_discretize(P: RationalTF, T: float) -> RationalTF:
    """Zero-order-hold equivalent of a continuous plant at period T."""
    if P.is_discrete:
        raise ValueError("plant is already discrete")
    if T <= 0:
        raise ValueError("period must be positive")
    if P.num.is_zero or (P.num.degree == 0 and P.den.degree == 0):
        # static gain passes through the hold unchanged
        return RationalTF(P.num, P.den, T)
    if not P.is_strictly_proper:
        raise ImproperTF("zero-order-hold discretization needs a strictly proper plant")
    ss = to_state_space(P)
    Ad, Bd = _zoh_matrices(ss, T)
    return from_state_space(StateSpace(Ad, Bd, ss.C, np.array([[0.0]]), T))


def lift_downsample(M: RationalTF, N: int) -> RationalTF:
    """Slow-rate equivalent of fast system M driven through the repeat-hold upsampler.

    The input is held constant over N fast steps and the output decimated
    by N, so with realization (A, B, C, D):
    A_L = A^N, B_L = (A^{N-1} + ... + A + I) B, C_L = C, D_L = D.
    """
    if not M.is_discrete:
        raise ValueError("lifting needs a discrete system")
    if N < 1 or int(N) != N:
        raise ValueError("N must be a positive integer")
    if N == 1:
        return M
    if not M.is_proper:
        raise ImproperTF("lifting needs a proper system")
    ss = to_state_space(M)
    if ss.order == 0:
        return RationalTF(M.num, M.den, M.sample_time * N)
    AN = np.linalg.matrix_power(ss.A, N)
    S = np.zeros_like(ss.A)
    Ai = np.eye(ss.order)
    for _ in range(N):
        S = S + Ai
        Ai = Ai @ ss.A
    BL = S @ ss.B
    return from_state_space(StateSpace(AN, BL, ss.C, ss.D, M.sample_time * N))


def hold_response(T: float, omega: float) -> complex:
    """Zero-order hold frequency function (1 - e^{-j w T}) / (j w).

    Evaluated in the numerically exact product form
    T * e^{-j w T / 2} * sinc(w T / 2pi); the removable singularity at
    omega = 0 gives T.
    """
    x = omega * T
    return T * cmath.exp(-0.5j * x) * float(np.sinc(x / (2 * math.pi)))


def upsampler_response(timing: DualRateTiming, omega: float) -> complex:
    """Repeat-hold upsampler function (1 - e^{-j w N Tf}) / (1 - e^{-j w Tf}).

    Removable singularities at multiples of the fast sampling frequency
    evaluate to N.
    """
    theta = omega * timing.Tf
    half = 0.5 * theta
    den = math.sin(half)
    if abs(den) < 1e-12:
        return complex(timing.N)
    num = math.sin(timing.N * half)
    return (num / den) * cmath.exp(-0.5j * (timing.N - 1) * theta)


def p_l_frequency_sum(
    P: RationalTF,
    G_R: RationalTF,
    timing: DualRateTiming,
    omega: float,
    M_terms: int = 200,
) -> tuple[complex, float]:
    """Aliasing-sum form of the lifted plant frequency response.

    (1/Ts) * sum_{n=-M..M} P(j w_n) G_R(e^{j w_n Tf}) H_Ts(j w_n),
    with w_n = omega + n*2*pi/Ts.  Returns (value, last-term magnitude);
    raises NonConvergence when the certificate exceeds 1e-6 of the sum.
    """
    if M_terms < 1:
        raise ValueError("M_terms must be at least 1")
    Ts = timing.Ts
    total = 0.0 + 0.0j
    last = 0.0
    for n in range(-M_terms, M_terms + 1):
        wn = omega + n * 2 * math.pi / Ts
        term = (
            P.at_frequency(wn)
            * G_R(cmath.exp(1j * wn * timing.Tf))
            * hold_response(Ts, wn)
        )
        total += term
        if abs(n) == M_terms:
            last = max(last, abs(term))
    total /= Ts
    if abs(total) > 0 and last > 1e-6 * abs(total):
        raise NonConvergence(
            f"last retained term {last:.3e} exceeds 1e-6 of |sum| {abs(total):.3e}"
        )
    return total, last


# ---------------------------------------------------------------------------
# starred transforms (residue method)
# ---------------------------------------------------------------------------

def _pole_groups(tf: RationalTF, tol: float = 1e-8):
    """Cluster denominator roots into (pole, multiplicity) groups."""
    roots = sorted(tf.poles(), key=lambda r: (round(r.real, 6), round(r.imag, 6)))
    groups: list[list[complex]] = []
    for r in roots:
        for g in groups:
            if abs(r - g[0]) < tol * max(1.0, abs(g[0])):
                g.append(r)
                break
        else:
            groups.append([r])
    return [(np.mean(g), len(g)) for g in groups]


def _partial_fractions(tf: RationalTF):
    """[(pole p, [c1, c2])] with R(s) = sum c1/(s-p) + c2/(s-p)^2.

    Strictly proper rationals with pole multiplicity at most two.
    Residues come from derivatives of the denominator at the pole, which
    is more robust than symbolic deflation at these tiny orders.
    """
    if not tf.is_strictly_proper:
        raise UnsupportedMultiplicity("reference transform must be strictly proper")
    groups = _pole_groups(tf)
    for p, mult in groups:
        if mult > 2:
            raise UnsupportedMultiplicity(f"pole {p} has multiplicity {mult}")
    res = []
    num = tf.num
    den = tf.den
    dden = den.derivative()
    for p, mult in groups:
        if mult == 1:
            c1 = complex(num(p)) / complex(dden(p))
            res.append((p, [c1, 0.0]))
        else:
            # den(s) = (s-p)^2 q(s); q(p) = den''(p)/2
            d2 = dden.derivative()
            qp = complex(d2(p)) / 2.0
            c2 = complex(num(p)) / qp
            # c1 = d/ds [num/q] at p; q'(p) = den'''(p)/6
            d3 = d2.derivative()
            qprime = complex(d3(p)) / 6.0 if d3.degree >= 0 else 0.0
            dnum = num.derivative()
            c1 = (complex(dnum(p)) * qp - complex(num(p)) * qprime) / (qp * qp)
            res.append((p, [c1, c2]))
    return res


def starred_transform(ref: ReferenceSignal, Ts: float) -> StarredTransform:
    """Exact z-transform of the sampled causal reference via residues.

    Simple pole p contributes c1 * z/(z - e^{p Ts}); a double pole adds
    c2 * Ts * e^{p Ts} * z / (z - e^{p Ts})^2.
    """
    if Ts <= 0:
        raise ValueError("Ts must be positive")
    terms = _partial_fractions(ref.laplace)

    # assemble the sum of rational terms over a common denominator
    parts = []
    for p, (c1, c2) in terms:
        alpha = cmath.exp(p * Ts)
        if abs(c1) > 0:
            parts.append((np.array([c1, 0.0]), np.array([1.0, -alpha])))
        if abs(c2) > 0:
            parts.append(
                (np.array([c2 * Ts * alpha, 0.0]),
                 np.polymul([1.0, -alpha], [1.0, -alpha]))
            )
    if not parts:
        return StarredTransform(RationalTF([0.0], [1.0], Ts))
    common = np.array([1.0 + 0.0j])
    for _, d in parts:
        common = np.polymul(common, d)
    total = np.array([0.0 + 0.0j])
    for n, d in parts:
        rest, _ = _exact_div(common, d)
        total = np.polyadd(total, np.polymul(n, rest))
    # real-coefficient reconstruction (conjugate pole pairs cancel imag parts)
    imag_scale = max(np.max(np.abs(total)), np.max(np.abs(common)), 1.0)
    if max(np.max(np.abs(total.imag)), np.max(np.abs(common.imag))) > 1e-7 * imag_scale:
        raise ValueError("starred transform did not reduce to real coefficients")
    res_scale = max(
        (max(abs(c1), abs(c2)) for _, (c1, c2) in terms), default=1.0
    )
    if np.max(np.abs(total)) < 1e-12 * max(res_scale, 1.0) * np.max(np.abs(common)):
        # sampled sequence is identically zero (e.g. a sine at the Nyquist rate)
        return StarredTransform(RationalTF([0.0], common.real, Ts))
    num = _trim_small(total.real)
    den = _trim_small(common.real)
    return StarredTransform(RationalTF(num, den, Ts))


def _trim_small(coeffs: np.ndarray) -> np.ndarray:
    """Drop cancellation residue in leading coefficients (relative 1e-12)."""
    coeffs = np.atleast_1d(coeffs)
    scale = np.max(np.abs(coeffs))
    if scale == 0:
        return np.zeros(1)
    idx = np.flatnonzero(np.abs(coeffs) > 1e-12 * scale)
    return coeffs[idx[0]:]


def _exact_div(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q, r = np.polydiv(a, b)
    return np.atleast_1d(q), np.atleast_1d(r)


def reference_ratio(ref: ReferenceSignal, Ts: float, omega: float) -> complex:
    """Pole-robust ratio R*(e^{j w Ts}) / R(j w) of sampled to continuous spectra.

    Near an imaginary-axis pole of R both factors blow up with the same
    residue; the ratio stays finite (1/Ts exactly at the pole).  The
    singular term is factored out analytically so the ratio is stable
    arbitrarily close to the pole.
    """
    terms = _partial_fractions(ref.laplace)
    s = 1j * omega
    z = cmath.exp(1j * omega * Ts)

    # locate a (simple) pole we are close to
    near = None
    for p, (c1, c2) in terms:
        if abs(s - p) < 1e-6 * max(1.0, abs(p)):
            if abs(c2) > 0:
                raise UnsupportedMultiplicity(
                    "ratio at a multiple spectral pole is not defined"
                )
            near = (p, c1)
            break

    def star_val() -> complex:
        total = 0.0 + 0.0j
        for p, (c1, c2) in terms:
            alpha = cmath.exp(p * Ts)
            total += c1 * z / (z - alpha)
            if abs(c2) > 0:
                total += c2 * Ts * alpha * z / (z - alpha) ** 2
        return total

    def cont_val() -> complex:
        total = 0.0 + 0.0j
        for p, (c1, c2) in terms:
            total += c1 / (s - p)
            if abs(c2) > 0:
                total += c2 / (s - p) ** 2
        return total

    if near is None:
        R = cont_val()
        if abs(R) == 0:
            raise ZeroDivisionError("reference spectrum is zero at this frequency")
        return star_val() / R

    p0, c0 = near
    alpha0 = cmath.exp(p0 * Ts)
    # multiply numerator and denominator by (s - p0):
    #   num' = c0 * z * (s-p0)/(z - alpha0) + (s-p0) * rest_z
    #   den' = c0 + (s-p0) * rest_s
    w = (s - p0) * Ts
    # (s-p0)/(z-alpha0) = w / (Ts * alpha0 * (e^w - 1)), stable via w/expm1
    if abs(w) < 1e-12:
        expm1_ratio = 1.0 / (1.0 + w / 2.0 + w * w / 6.0)
    else:
        expm1_ratio = w / (cmath.exp(w) - 1.0)
    sing_num = c0 * z * expm1_ratio / (Ts * alpha0)
    rest_z = 0.0 + 0.0j
    rest_s = 0.0 + 0.0j
    for p, (c1, c2) in terms:
        if p == p0:
            continue
        alpha = cmath.exp(p * Ts)
        rest_z += c1 * z / (z - alpha)
        if abs(c2) > 0:
            rest_z += c2 * Ts * alpha * z / (z - alpha) ** 2
        rest_s += c1 / (s - p)
        if abs(c2) > 0:
            rest_s += c2 / (s - p) ** 2
    num_p = sing_num + (s - p0) * rest_z
    den_p = c0 + (s - p0) * rest_s
    return num_p / den_p
