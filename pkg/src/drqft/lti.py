"""Real-coefficient polynomial and rational transfer-function arithmetic.

Everything downstream (discretization, lifting, loop analysis, boundary
computation) works on the two value types defined here: ``Polynomial``
(real coefficients, highest degree first) and ``RationalTF`` (a ratio of
two polynomials with an optional sample time).  Values are immutable and
safe to share between threads.

Roots are always obtained from the companion matrix (``numpy.roots``);
denominators are normalized to monic form on construction for
conditioning.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

__all__ = [
    "LTIError",
    "PoleProximity",
    "SampleTimeMismatch",
    "ImproperTF",
    "Polynomial",
    "RationalTF",
    "StateSpace",
    "compose",
    "to_state_space",
    "dc_gain",
]

# Two roots closer than this are treated as a common factor, but only when
# they sit strictly in the stable region (inside the unit circle / open left
# half-plane).  Cancelling on or outside the stability boundary would hide
# exactly the illegal modes the analysis must see.
CANCEL_TOL = 1e-8
STABLE_MARGIN = 1e-8


class LTIError(Exception):
    """Base class for transfer-function arithmetic errors."""


class PoleProximity(LTIError):
    """Evaluation point is (numerically) a pole of the transfer function."""


class SampleTimeMismatch(LTIError):
    """Operands live on different time bases."""


class ImproperTF(LTIError):
    """Operation requires a proper (or strictly proper) transfer function."""


def _trim(coeffs: np.ndarray) -> np.ndarray:
    """Drop leading zeros; identically-zero polynomial keeps a single 0."""
    idx = np.flatnonzero(np.abs(coeffs) > 0)
    if idx.size == 0:
        return np.zeros(1)
    return coeffs[idx[0]:]


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial, coefficients highest degree first."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs: Iterable[float]):
        arr = _trim(np.atleast_1d(np.asarray(list(coeffs), dtype=float)))
        object.__setattr__(self, "coeffs", tuple(arr.tolist()))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0.0

    def __call__(self, x):
        return np.polyval(self.coeffs, x)

    def roots(self) -> np.ndarray:
        if self.degree < 1:
            return np.array([], dtype=complex)
        return np.roots(self.coeffs)

    def derivative(self) -> "Polynomial":
        return Polynomial(np.polyder(self.coeffs))

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(np.polymul(self.coeffs, other.coeffs))
        return Polynomial(np.asarray(self.coeffs) * float(other))

    __rmul__ = __mul__

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(np.polyadd(self.coeffs, other.coeffs))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(np.polysub(self.coeffs, other.coeffs))

    def monic(self) -> "Polynomial":
        return Polynomial(np.asarray(self.coeffs) / self.coeffs[0])

    def deflate(self, root: complex) -> "Polynomial":
        """Divide out (x - root); for complex roots the conjugate pair."""
        if abs(root.imag) < 1e-12:
            factor = [1.0, -root.real]
        else:
            factor = [1.0, -2.0 * root.real, abs(root) ** 2]
        quotient, _ = np.polydiv(self.coeffs, factor)
        return Polynomial(np.real(quotient))


def _as_poly(p) -> Polynomial:
    if isinstance(p, Polynomial):
        return p
    if isinstance(p, (int, float)):
        return Polynomial([float(p)])
    return Polynomial(p)


@dataclass(frozen=True)
class RationalTF:
    """Ratio of real polynomials; ``sample_time=None`` means continuous time.

    The denominator is normalized to monic form on construction.
    """

    num: Polynomial
    den: Polynomial
    sample_time: float | None = None

    def __init__(self, num, den, sample_time: float | None = None):
        num = _as_poly(num)
        den = _as_poly(den)
        if den.is_zero:
            raise ZeroDivisionError("denominator is identically zero")
        if sample_time is not None and sample_time <= 0:
            raise ValueError("sample_time must be positive")
        lead = den.coeffs[0]
        object.__setattr__(self, "num", Polynomial(np.asarray(num.coeffs) / lead))
        object.__setattr__(self, "den", den.monic())
        object.__setattr__(self, "sample_time", sample_time)

    # -- structure ---------------------------------------------------------
    @property
    def is_discrete(self) -> bool:
        return self.sample_time is not None

    @property
    def is_proper(self) -> bool:
        return self.num.degree <= self.den.degree or self.num.is_zero

    @property
    def is_strictly_proper(self) -> bool:
        return self.num.degree < self.den.degree or self.num.is_zero

    def poles(self) -> np.ndarray:
        return self.den.roots()

    def zeros(self) -> np.ndarray:
        return self.num.roots()

    # -- evaluation --------------------------------------------------------
    def __call__(self, point: complex) -> complex:
        return eval_tf(self, point)

    def at_frequency(self, omega: float) -> complex:
        """Frequency response: s = j*omega, or z = exp(j*omega*Ts)."""
        if self.is_discrete:
            return eval_tf(self, np.exp(1j * omega * self.sample_time))
        return eval_tf(self, 1j * omega)

    # -- serialization -----------------------------------------------------
    def to_json(self) -> dict:
        return {
            "num": list(self.num.coeffs),
            "den": list(self.den.coeffs),
            "ts": self.sample_time,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RationalTF":
        return cls(obj["num"], obj["den"], obj.get("ts"))

    @classmethod
    def constant(cls, value: float, sample_time: float | None = None) -> "RationalTF":
        return cls([float(value)], [1.0], sample_time)


def eval_tf(tf: RationalTF, point: complex) -> complex:
    """num(point)/den(point), refusing points that sit on a pole."""
    den_val = complex(tf.den(point))
    scale = max(np.max(np.abs(tf.den.coeffs)), 1.0) * max(1.0, abs(point)) ** tf.den.degree
    if abs(den_val) < 1e-300 * scale or den_val == 0:
        raise PoleProximity(f"evaluation at {point} hits a pole of the denominator")
    return complex(tf.num(point)) / den_val


def _same_base(a: RationalTF, b: RationalTF) -> float | None:
    if (a.sample_time is None) != (b.sample_time is None):
        raise SampleTimeMismatch("cannot combine continuous and discrete systems")
    if a.sample_time is not None:
        if not math.isclose(a.sample_time, b.sample_time, rel_tol=1e-12):
            raise SampleTimeMismatch(
                f"sample times differ: {a.sample_time} vs {b.sample_time}"
            )
    return a.sample_time


def _is_strictly_stable(root: complex, discrete: bool) -> bool:
    if discrete:
        return abs(root) < 1.0 - STABLE_MARGIN
    return root.real < -STABLE_MARGIN


def _cancel_common(num: Polynomial, den: Polynomial, discrete: bool):
    """Remove num/den root pairs that match within CANCEL_TOL.

    Only strictly stable pairs are removed (Assumption: unstable or
    boundary hidden modes must stay visible to the stability analysis).
    Returns the possibly deflated pair.
    """
    if num.is_zero or num.degree < 1 or den.degree < 1:
        return num, den
    nroots = list(num.roots())
    droots = list(den.roots())
    changed = False
    i = 0
    while i < len(nroots):
        r = nroots[i]
        if not _is_strictly_stable(r, discrete):
            i += 1
            continue
        j = next((k for k, d in enumerate(droots) if abs(d - r) < CANCEL_TOL), None)
        if j is None:
            i += 1
            continue
        # deflate both sides; conjugate partners go together
        num = num.deflate(r)
        den = den.deflate(droots[j])
        if abs(r.imag) >= 1e-12:
            nroots = [x for k, x in enumerate(nroots) if k != i and abs(x - np.conj(r)) > 1e-9]
            droots = [x for k, x in enumerate(droots)
                      if k != j and abs(x - np.conj(droots[j])) > 1e-9]
        else:
            nroots.pop(i)
            droots.pop(j)
        changed = True
        i = 0
    if not changed:
        return num, den
    return num, den


def compose(a: RationalTF, b: RationalTF | float | None = None,
            mode: str = "series") -> RationalTF:
    """Combine transfer functions: ``series``, ``parallel`` or ``feedback_unity``.

    ``feedback_unity`` closes a unit negative-feedback loop around the
    (optionally composed) forward path: L/(1+L).
    """
    if isinstance(b, (int, float)):
        b = RationalTF.constant(float(b), a.sample_time)
    if b is not None:
        ts = _same_base(a, b)
    else:
        ts = a.sample_time

    if mode == "series":
        if b is None:
            raise ValueError("series requires two operands")
        num = a.num * b.num
        den = a.den * b.den
    elif mode == "parallel":
        if b is None:
            raise ValueError("parallel requires two operands")
        num = a.num * b.den + b.num * a.den
        den = a.den * b.den
    elif mode == "feedback_unity":
        loop = compose(a, b, "series") if b is not None else a
        num = loop.num
        den = loop.den + loop.num
        ts = loop.sample_time
    else:
        raise ValueError(f"unknown mode {mode!r}")

    num, den = _cancel_common(num, den, discrete=ts is not None)
    return RationalTF(num, den, ts)


@dataclass(frozen=True)
class StateSpace:
    """SISO state-space realization (A, B, C, D)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    sample_time: float | None = None

    @property
    def order(self) -> int:
        return self.A.shape[0]

    def __call__(self, point: complex) -> complex:
        if self.order == 0:
            return complex(self.D[0, 0])
        n = self.order
        M = point * np.eye(n) - self.A
        x = np.linalg.solve(M, self.B)
        return complex((self.C @ x).item()) + complex(self.D[0, 0])

    def step_matrices(self):
        return self.A, self.B, self.C, self.D


def to_state_space(tf: RationalTF) -> StateSpace:
    """Controllable-canonical realization of a proper transfer function."""
    if not tf.is_proper:
        raise ImproperTF("state-space realization needs a proper transfer function")
    den = np.asarray(tf.den.coeffs, dtype=float)
    num = np.asarray(tf.num.coeffs, dtype=float)
    n = len(den) - 1
    num = np.concatenate([np.zeros(n + 1 - len(num)), num])
    d = num[0]
    A = np.zeros((n, n))
    if n:
        A[0, :] = -den[1:]
        A[1:, :-1] = np.eye(n - 1)
    B = np.zeros((n, 1))
    if n:
        B[0, 0] = 1.0
    C = (num[1:] - den[1:] * d).reshape(1, -1)
    D = np.array([[d]])
    return StateSpace(A, B, C, D, tf.sample_time)


def from_state_space(ss: StateSpace) -> RationalTF:
    """Back-convert a SISO realization to a transfer function.

    Uses det(zI - A + B C) = den(z) * (1 + C (zI-A)^{-1} B), so the strictly
    proper numerator is poly(A - B C) - poly(A).
    """
    n = ss.order
    if n == 0:
        return RationalTF([ss.D[0, 0]], [1.0], ss.sample_time)
    den = np.poly(ss.A)
    num = np.poly(ss.A - ss.B @ ss.C) - den + ss.D[0, 0] * den
    return RationalTF(np.real(num), np.real(den), ss.sample_time)


def dc_gain(tf: RationalTF) -> float:
    """Steady-state gain: value at s=0 (continuous) or z=1 (discrete).

    A pole at the evaluation point gives ``math.inf`` (sign from the
    surviving numerator).
    """
    x0 = 1.0 if tf.is_discrete else 0.0
    num_val = float(np.real(tf.num(x0)))
    den_val = float(np.real(tf.den(x0)))
    scale = max(np.max(np.abs(tf.den.coeffs)), 1.0)
    if abs(den_val) < 1e-12 * scale:
        if abs(num_val) < 1e-12 * max(np.max(np.abs(tf.num.coeffs)), 1.0):
            # 0/0: cancel the common factors and retry once
            num, den = _cancel_common(tf.num, tf.den, tf.is_discrete)
            reduced = RationalTF(num, den, tf.sample_time)
            if abs(float(np.real(reduced.den(x0)))) > 1e-12 * scale:
                return dc_gain(reduced)
        return math.copysign(math.inf, num_val) if num_val else math.inf
    return num_val / den_val


def reduced_for_evaluation(tf: RationalTF) -> RationalTF:
    """Copy with *all* matched num/den root pairs deflated (any region).

    Used by curve generators so that exactly-cancelling boundary pairs do
    not produce 0/0 evaluations; the analysis-side pole bookkeeping keeps
    working on the unreduced form.
    """
    if tf.num.is_zero or tf.num.degree < 1 or tf.den.degree < 1:
        return tf
    num, den = tf.num, tf.den
    nroots = list(num.roots())
    for r in nroots:
        if r.imag < -1e-12:
            continue  # conjugate handled with its partner
        droots = den.roots()
        match = next((d for d in droots if abs(d - r) < CANCEL_TOL), None)
        if match is None:
            continue
        num = num.deflate(r)
        den = den.deflate(match)
    return RationalTF(num, den, tf.sample_time)
