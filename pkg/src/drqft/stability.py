"""Nyquist-like stability assessment of the dual-rate loop.

The verdict comes from counting signed crossings of the ray
R0 = {phase = -180 deg (mod 360), gain > 0 dB} by the gain/phase curve of
the slow open loop L = G_L * P_L, against the count of strictly unstable
open-loop poles.  Poles exactly on the unit circle at z = 1 are handled
by a synthesized indentation segment.  An independent closed-loop pole
oracle cross-checks every verdict.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .lti import RationalTF, compose, reduced_for_evaluation
from .spectra import DualRateLoop

__all__ = [
    "NicholsCurve",
    "IndentationArc",
    "StabilityVerdict",
    "AssumptionReport",
    "OnCirclePole",
    "TangentialCrossing",
    "NoCrossover",
    "check_assumptions",
    "nichols_curve",
    "count_crossings",
    "closed_loop_poles",
    "margins",
    "worst_case_margins",
    "assess",
]

UNIT_TOL = 1e-9          # |z|-distance that counts as "on the unit circle"
OPEN_LOOP_BAND = 1e-7    # circle band for open-loop pole classification
                         # (wider than UNIT_TOL: lifted integrator poles carry
                         # matrix-power roundoff of a few 1e-9)
INTEGRATOR_CLUSTER = 1e-5  # radius around z = 1 grouping integrator
                           # poles/zeros; a numerically split double root
                           # scatters by sqrt(coefficient noise) ~ 1e-6
CANCEL_MATCH = 1e-8      # pole/zero match distance for hidden-mode checks
PHASE_STEP_DEG = 30.0    # refinement threshold for adjacent curve samples
ON_RAY_TOL_DEG = 1e-6


class OnCirclePole(Exception):
    """Open loop has a unit-circle pole away from z = 1."""


class TangentialCrossing(Exception):
    """Curve touches the ray without crossing; refine the grid."""


class NoCrossover(Exception):
    """No gain or phase crossover in the evaluated range."""


@dataclass(frozen=True)
class IndentationArc:
    """Synthetic segment replacing the z = 1 pole excursion.

    Sweeps phase from ``phase_from`` down/up to ``phase_to`` at a gain
    large enough to sit above the ray threshold.
    """

    phase_from: float
    phase_to: float
    gain_db: float
    multiplicity: int

    def crossings(self) -> int:
        """Signed ray crossings of the full arc (sign: left-to-right = +1)."""
        lo, hi = sorted((self.phase_from, self.phase_to))
        count = 0
        k0 = math.ceil((lo + 180.0) / 360.0)
        x = -180.0 + 360.0 * k0
        while x < hi:
            if x > lo:
                count += 1
            x += 360.0
        return count if self.phase_to > self.phase_from else -count


@dataclass
class NicholsCurve:
    """Sampled gain/phase curve with unwrapped phase."""

    omega: np.ndarray
    phase_deg: np.ndarray
    gain_db: np.ndarray
    range: str                                 # "half" or "full"
    indentation: tuple[IndentationArc, ...] = ()

    def to_csv(self) -> str:
        lines = ["omega,phase_deg,gain_db"]
        for w, p, g in zip(self.omega, self.phase_deg, self.gain_db):
            lines.append(f"{w:.12g},{p:.12g},{g:.12g}")
        return "\n".join(lines) + "\n"

    def min_distance_to_critical(self) -> float:
        """Distance (in the gain/phase metric: dB and degrees mixed) to
        the nearest critical point (-180 mod 360, 0 dB)."""
        ph = self.phase_deg
        k = np.round((ph + 180.0) / 360.0)
        dphi = ph + 180.0 - 360.0 * k
        return float(np.min(np.hypot(dphi, self.gain_db)))


@dataclass(frozen=True)
class AssumptionItem:
    index: int
    name: str
    passed: bool
    witness: str


@dataclass(frozen=True)
class AssumptionReport:
    items: tuple[AssumptionItem, ...]
    warnings: tuple[str, ...] = ()

    @property
    def all_pass(self) -> bool:
        return all(item.passed for item in self.items)

    def to_json(self) -> dict:
        return {
            "items": [
                {
                    "index": i.index,
                    "name": i.name,
                    "passed": i.passed,
                    "witness": i.witness,
                }
                for i in self.items
            ],
            "warnings": list(self.warnings),
            "all_pass": self.all_pass,
        }


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    net_crossings: float
    required_crossings: float
    assumption_report: AssumptionReport
    gain_margin_db: float
    phase_margin_deg: float
    closed_loop_poles: tuple[complex, ...]
    oracle_verdict: str            # "stable" | "unstable" | "marginal"
    oracle_agrees: bool
    critical_distance: float
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "stable": self.stable,
            "net_crossings": self.net_crossings,
            "required_crossings": self.required_crossings,
            "assumptions": self.assumption_report.to_json(),
            "gain_margin_db": _json_float(self.gain_margin_db),
            "phase_margin_deg": _json_float(self.phase_margin_deg),
            "closed_loop_poles": [[p.real, p.imag] for p in self.closed_loop_poles],
            "oracle_verdict": self.oracle_verdict,
            "oracle_agrees": self.oracle_agrees,
            "critical_distance": self.critical_distance,
            "notes": list(self.notes),
        }


def _json_float(x: float):
    return None if math.isinf(x) or math.isnan(x) else x


# ---------------------------------------------------------------------------
# assumption checks
# ---------------------------------------------------------------------------

def check_assumptions(loop: DualRateLoop) -> AssumptionReport:
    """Sampling-pathology and hidden-mode checks for the dual-rate loop."""
    t = loop.timing
    warnings: list[str] = []

    # 1: fast sampling of the continuous plant
    poles_p = loop.plant.poles()
    ok1, wit1 = True, "plant poles clear of the fast sampling lattice"
    wf = 2 * math.pi / t.Tf
    for p in poles_p:
        k = round(p.imag / wf)
        if k != 0 and abs(p.real) < 1e-9 and abs(p.imag - k * wf) < 1e-9 * max(1.0, abs(p)):
            ok1, wit1 = False, f"pole {p:.6g} sits at j*{k}*2pi/Tf"
    if ok1:
        crhp = [p for p in poles_p if p.real >= -1e-9]
        for i, p in enumerate(crhp):
            for q in crhp[i + 1:]:
                d = p - q
                k = round(d.imag / wf)
                if k != 0 and abs(d.real) < 1e-9 and abs(d.imag - k * wf) < 1e-9 * max(1.0, abs(p)):
                    ok1, wit1 = False, f"poles {p:.6g}, {q:.6g} differ by j*{k}*2pi/Tf"

    # 2: slow sampling of the fast discretized plant
    ok2, wit2 = True, "no aliased unstable pole pair in the fast plant"
    pr_poles = loop.fast_discretized.poles()
    outer = [p for p in pr_poles if abs(p) >= 1 - UNIT_TOL]
    for i, p in enumerate(outer):
        for q in outer:
            if q is p:
                continue
            for k in range(1, t.N):
                rot = q * cmath.exp(2j * math.pi * k / t.N)
                if abs(p - rot) < 1e-9 * max(1.0, abs(p)):
                    ok2, wit2 = False, f"poles {p:.6g}, {q:.6g} alias under decimation by {t.N}"

    # 3: no unstable hidden modes in the fast and slow products
    ok3, wit3 = True, "no pole/zero cancellation outside the unit circle"
    fast_prod = compose(loop.fast_discretized, loop.g_fast, "series")
    slow_prod = compose(loop.lifted, loop.g_slow, "series")
    for name, prod in (("fast product", fast_prod), ("slow product", slow_prod)):
        zs = prod.zeros()
        for p in prod.poles():
            match = next((z for z in zs if abs(z - p) < CANCEL_MATCH), None)
            if match is None:
                continue
            if abs(p) > 1 + UNIT_TOL:
                ok3, wit3 = False, f"{name}: cancellation at {p:.6g} outside the unit circle"
            elif abs(p) >= 1 - 1e-6:
                warnings.append(
                    f"{name}: pole/zero pair on the unit circle at {p:.6g} "
                    "(marginal hidden mode; verdict relies on the crossing test)"
                )

    # 4: fast controller stability
    ok4, wit4 = True, "fast controller poles strictly inside the unit circle"
    for p in loop.g_fast.poles():
        if abs(p) >= 1 - UNIT_TOL:
            ok4, wit4 = False, f"fast controller pole at {p:.6g} not strictly inside"

    items = (
        AssumptionItem(1, "non-pathological fast sampling", ok1, wit1),
        AssumptionItem(2, "non-pathological slow sampling", ok2, wit2),
        AssumptionItem(3, "no unstable hidden modes", ok3, wit3),
        AssumptionItem(4, "fast controller stable", ok4, wit4),
    )
    return AssumptionReport(items=items, warnings=tuple(warnings))


# ---------------------------------------------------------------------------
# curve generation
# ---------------------------------------------------------------------------

def _integrator_cluster(tf: RationalTF) -> tuple[int, int]:
    """(pole count, zero count) inside the z = 1 cluster radius."""
    mp = sum(1 for p in tf.poles() if abs(p - 1.0) < INTEGRATOR_CLUSTER)
    mz = sum(1 for z in tf.zeros() if abs(z - 1.0) < INTEGRATOR_CLUSTER)
    return mp, mz


def _cluster_limit(tf: RationalTF, mp: int, mz: int) -> complex:
    """lim (z-1)^(mp-mz) * tf(z): cluster factors deflated, then evaluated at 1."""
    num = tf.num
    den = tf.den
    for _ in range(mz):
        num = num.deflate(1.0)
    for _ in range(mp):
        den = den.deflate(1.0)
    return complex(num(1.0)) / complex(den(1.0))


def _wrapped_step(a: float, b: float) -> float:
    """Phase increment from a to b reduced into (-180, 180]."""
    d = (b - a) % 360.0
    if d > 180.0:
        d -= 360.0
    return d


def nichols_curve(
    L: RationalTF,
    grid: np.ndarray | None = None,
    curve_range: str = "half",
    points: int = 1024,
) -> NicholsCurve:
    """Gain/phase curve of a discrete open loop over [0, pi/Ts] or [0, 2pi/Ts).

    Unit-circle poles at z = 1 get a synthesized indentation segment; any
    other unit-circle pole raises OnCirclePole.  Phase is unwrapped on an
    adaptively refined grid (intervals are bisected until adjacent phase
    steps are below 30 degrees or the interval is narrower than
    2^-20 * pi/Ts).
    """
    if not L.is_discrete:
        raise ValueError("nichols_curve needs a discrete loop")
    if curve_range not in ("half", "full"):
        raise ValueError("curve_range must be 'half' or 'full'")
    Ts = L.sample_time
    L_eval = reduced_for_evaluation(L)

    mp, mz = _integrator_cluster(L_eval)
    m_ind = max(mp - mz, 0)
    for p in L_eval.poles():
        if abs(abs(p) - 1.0) < OPEN_LOOP_BAND and abs(p - 1.0) > INTEGRATOR_CLUSTER:
            raise OnCirclePole(f"open-loop pole on the unit circle at {p:.6g}")

    w_nyq = math.pi / Ts
    # keep clear of the z = 1 root cluster: split roots scatter by ~1e-6
    w_lo_cluster = w_nyq * 1e-4 if mp else 0.0
    if curve_range == "half":
        w_hi = w_nyq
    else:
        # the full range returns to z = 1 at 2pi/Ts: stay clear there too
        w_hi = 2 * w_nyq - max(w_lo_cluster, 2 * w_nyq * 1e-12)
    if grid is not None:
        ws = list(np.asarray(grid, dtype=float))
    else:
        w_lo = max(w_nyq * 1e-7, w_lo_cluster)
        ws = sorted(
            set(np.geomspace(w_lo, w_hi, points // 2).tolist())
            | set(np.linspace(w_lo, w_hi, points - points // 2).tolist())
        )
    if m_ind == 0 and (grid is None or (ws and ws[0] > 0.0)):
        ws = [w for w in ws if w > max(w_lo_cluster, 0.0) or (w == 0.0 and not mp)]
        if not mp:
            ws = [0.0] + [w for w in ws if w > 0.0]
    elif m_ind > 0:
        ws = [w for w in ws if w > max(w_lo_cluster * (1 - 1e-12), 0.0)]

    def value(w: float) -> complex:
        if w == 0.0:
            return _cluster_limit(L_eval, mp, mz) if mp else L_eval(1.0 + 0.0j)
        return L_eval(cmath.exp(1j * w * Ts))

    if m_ind == 0 and mp and (grid is None):
        ws = [0.0] + ws  # fully cancelled cluster: prepend the exact limit

    vals = [value(w) for w in ws]

    # adaptive refinement on wrapped phase steps
    min_width = (2.0 ** -20) * w_nyq
    i = 0
    while i < len(ws) - 1:
        a = math.degrees(cmath.phase(vals[i])) if vals[i] != 0 else 0.0
        b = math.degrees(cmath.phase(vals[i + 1])) if vals[i + 1] != 0 else 0.0
        if abs(_wrapped_step(a, b)) > PHASE_STEP_DEG and (ws[i + 1] - ws[i]) > min_width:
            mid = 0.5 * (ws[i] + ws[i + 1])
            ws.insert(i + 1, mid)
            vals.insert(i + 1, value(mid))
        else:
            i += 1

    mags = np.array([abs(v) for v in vals])
    mags[mags == 0] = 1e-300
    gains = 20.0 * np.log10(mags)
    raw_phases = [math.degrees(cmath.phase(v)) if v != 0 else 0.0 for v in vals]
    phases = [raw_phases[0]]
    for k in range(1, len(raw_phases)):
        phases.append(phases[-1] + _wrapped_step(raw_phases[k - 1], raw_phases[k]))

    indent: tuple[IndentationArc, ...] = ()
    if m_ind > 0:
        residue = _cluster_limit(L_eval, mp, mz)
        phi_c = math.degrees(cmath.phase(residue))
        # align the arc with the unwrapped start of the curve: the curve
        # begins where the arc ends (phase(residue) - m*90)
        end = phi_c - 90.0 * m_ind
        shift = 360.0 * round((phases[0] - end) / 360.0)
        arc = IndentationArc(
            phase_from=phi_c + 90.0 * m_ind + shift,
            phase_to=end + shift,
            gain_db=float(np.max(gains)) + 120.0,
            multiplicity=m_ind,
        )
        indent = (arc,)

    return NicholsCurve(
        omega=np.asarray(ws),
        phase_deg=np.asarray(phases),
        gain_db=gains,
        range=curve_range,
        indentation=indent,
    )


# ---------------------------------------------------------------------------
# crossing counting
# ---------------------------------------------------------------------------

def _lattice_points_between(a: float, b: float) -> list[float]:
    lo, hi = sorted((a, b))
    out = []
    k = math.ceil((lo + 180.0) / 360.0)
    x = -180.0 + 360.0 * k
    while x < hi:
        if x > lo:
            out.append(x)
        x += 360.0
    return out


def _on_lattice(phi: float) -> float | None:
    k = round((phi + 180.0) / 360.0)
    x = -180.0 + 360.0 * k
    return x if abs(phi - x) < ON_RAY_TOL_DEG else None


def count_crossings(curve: NicholsCurve) -> float:
    """Net signed crossings of the ray R0, endpoint hits counted as halves.

    Positive sign for left-to-right (phase increasing) crossings.  The
    half-range curve adds half of each indentation arc's crossings; the
    full-range curve adds them once.
    """
    ph = curve.phase_deg
    g = curve.gain_db
    n = len(ph)
    total = 0.0

    on_ray = [
        (_on_lattice(ph[i]) is not None) and g[i] > 0.0 for i in range(n)
    ]

    # interior transversal crossings strictly between samples
    for i in range(n - 1):
        a, b = ph[i], ph[i + 1]
        if a == b:
            continue
        for x in _lattice_points_between(a, b):
            if _on_lattice(a) == x or _on_lattice(b) == x:
                continue  # endpoint hits handled below
            alpha = (x - a) / (b - a)
            gain_here = g[i] + alpha * (g[i + 1] - g[i])
            if gain_here > 0.0:
                total += 1.0 if b > a else -1.0

    # samples sitting exactly on the ray
    i = 0
    while i < n:
        if not on_ray[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and on_ray[j + 1] and _on_lattice(ph[j + 1]) == _on_lattice(ph[i]):
            j += 1
        x = _on_lattice(ph[i])
        prev_side = None
        for k in range(i - 1, -1, -1):
            if _on_lattice(ph[k]) != x or not on_ray[k]:
                prev_side = math.copysign(1.0, ph[k] - x) if ph[k] != x else None
                break
        next_side = None
        for k in range(j + 1, n):
            if _on_lattice(ph[k]) != x or not on_ray[k]:
                next_side = math.copysign(1.0, ph[k] - x) if ph[k] != x else None
                break
        if prev_side is None and next_side is None:
            pass  # whole curve rides the ray; no net crossing
        elif prev_side is None:
            total += 0.5 * next_side          # starts on the ray, departs
        elif next_side is None:
            total += -0.5 * prev_side         # ends on the ray, arrives
        elif prev_side != next_side:
            total += 1.0 if next_side > 0 else -1.0
        else:
            raise TangentialCrossing(
                f"curve touches the ray at phase {x} deg without crossing; "
                "refine the frequency grid"
            )
        i = j + 1

    for arc in curve.indentation:
        contribution = arc.crossings()
        total += contribution / 2.0 if curve.range == "half" else float(contribution)
    return total


# ---------------------------------------------------------------------------
# margins, oracle, assessment
# ---------------------------------------------------------------------------

def margins(target: NicholsCurve | RationalTF) -> tuple[float, float]:
    """(gain margin dB, phase margin deg) from the half-range curve.

    With several crossovers the most critical (smallest magnitude) margin
    is reported; missing crossovers give infinite margins.
    """
    curve = target if isinstance(target, NicholsCurve) else nichols_curve(target)
    ph, g = curve.phase_deg, curve.gain_db

    gm_candidates: list[float] = []
    for i in range(len(ph) - 1):
        a, b = ph[i], ph[i + 1]
        if a == b:
            continue
        for x in _lattice_points_between(a, b):
            alpha = (x - a) / (b - a)
            gm_candidates.append(-(g[i] + alpha * (g[i + 1] - g[i])))
    for i in range(len(ph)):
        if _on_lattice(ph[i]) is not None:
            gm_candidates.append(-g[i])

    pm_candidates: list[float] = []
    for i in range(len(g) - 1):
        if (g[i] > 0) == (g[i + 1] > 0):
            continue
        alpha = (0.0 - g[i]) / (g[i + 1] - g[i])
        phi_c = ph[i] + alpha * (ph[i + 1] - ph[i])
        lam = phi_c % 360.0 - 360.0
        pm_candidates.append(180.0 + lam)

    gm = min(gm_candidates, key=abs) if gm_candidates else math.inf
    pm = min(pm_candidates, key=abs) if pm_candidates else math.inf
    return gm, pm


def worst_case_margins(mu: float) -> tuple[float, float]:
    """Margins guaranteed by the stability-margin parameter mu in (0, 1).

    GM = 1/(1-mu) (in dB), PM = 2*asin(mu/2) in degrees.
    """
    if not 0 < mu < 1:
        raise ValueError("mu must lie in (0, 1)")
    gm_db = 20.0 * math.log10(1.0 / (1.0 - mu))
    pm_deg = math.degrees(2.0 * math.asin(mu / 2.0))
    return gm_db, pm_deg


def closed_loop_poles(loop: DualRateLoop) -> np.ndarray:
    """Roots of num(L) + den(L) for L = G_L * P_L (no cancellation)."""
    n = loop.g_slow.num * loop.lifted.num
    d = loop.g_slow.den * loop.lifted.den
    char = d + n
    return np.roots(char.coeffs)


def _oracle_verdict(poles: np.ndarray) -> str:
    mods = np.abs(poles)
    if np.any(mods > 1 + UNIT_TOL):
        return "unstable"
    if np.any(mods >= 1 - UNIT_TOL):
        return "marginal"
    return "stable"


def assess(loop: DualRateLoop, points: int = 2048) -> StabilityVerdict:
    """Full stability assessment: assumptions, crossing test, margins, oracle."""
    report = check_assumptions(loop)
    L = loop.open_loop()
    # classify on the reduced loop: exactly-cancelling pairs are hidden
    # modes (flagged by the assumption check), not crossing requirements;
    # the z = 1 integrator cluster is handled by the indentation segment
    L_red = reduced_for_evaluation(L)
    n_unstable = int(
        np.sum(
            [
                abs(p) > 1 + OPEN_LOOP_BAND and abs(p - 1.0) > INTEGRATOR_CLUSTER
                for p in L_red.poles()
            ]
        )
    )
    required = n_unstable / 2.0

    curve = nichols_curve(L, curve_range="half", points=points)
    net = count_crossings(curve)
    critical = curve.min_distance_to_critical()
    gm, pm = margins(curve)

    cl_poles = closed_loop_poles(loop)
    oracle = _oracle_verdict(cl_poles)

    notes: list[str] = []
    crossing_stable = (net == required) and critical > 1e-9
    if not report.all_pass:
        notes.append("assumption check failed; crossing test not conclusive")
    stable = crossing_stable and report.all_pass

    if oracle == "marginal":
        agrees = True
        notes.append(
            "closed-loop pole(s) on the unit circle within tolerance: "
            "exponential stability undetermined by the pole oracle"
        )
    else:
        agrees = (oracle == "stable") == crossing_stable
        if not agrees:
            notes.append(
                f"DEFECT: crossing verdict ({crossing_stable}) disagrees with "
                f"pole oracle ({oracle})"
            )

    return StabilityVerdict(
        stable=stable,
        net_crossings=net,
        required_crossings=required,
        assumption_report=report,
        gain_margin_db=gm,
        phase_margin_deg=pm,
        closed_loop_poles=tuple(cl_poles.tolist()),
        oracle_verdict=oracle,
        oracle_agrees=agrees,
        critical_distance=critical,
        notes=tuple(notes),
    )
