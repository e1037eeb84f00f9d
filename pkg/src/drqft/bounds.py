"""QFT machinery: uncertainty templates and Nichols-plane boundary curves.

A boundary is, per design frequency, the set of allowed open-loop values
for the *nominal* slow loop: at each phase a list of allowed gain
intervals.  Three robust specifications are covered:

* stability margin      |1 + L0 D| >= mu            for every member D,
* sampled-error bound   |1 + L0 D| >= |F_L|/delta1  for every member D,
* continuous tracking   |1 + L0 A| <= gamma |1 + L0 D|  for every member,

where D is the member's lifted-plant ratio to the nominal and A folds the
reference-tracking cross term into the same form.  Specification
frequencies above the slow Nyquist rate constrain the loop at their
folded alias; on the mirrored branch the constraint applies to the
conjugate loop value, which is equivalent to conjugating A.

Every boundary keeps both the per-phase allowed intervals (for rendering
and loop shaping) and the defining member constraints (for exact
membership tests), so validation never relies on grid interpolation.
"""
from __future__ import annotations

import cmath
import math
import warnings as _warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .lti import RationalTF, compose
from .sampling import (
    DualRateTiming,
    ReferenceSignal,
    hold_response,
    lift_downsample,
    reference_ratio,
    zoh_discretize,
)

__all__ = [
    "PlantFamily",
    "LiftedFamily",
    "Template",
    "Boundary",
    "SpecSet",
    "StabilityHypothesisUnchecked",
    "build_template",
    "stability_boundary",
    "dtrack_boundary",
    "ctrack_boundary",
    "fold",
    "worst_case_boundary",
    "validate_design",
    "DesignReport",
]

GAIN_RANGE_DB = (-80.0, 80.0)
PHASE_STEP_DEG = 1.0
_EPS = 1e-14


class StabilityHypothesisUnchecked(UserWarning):
    """Tracking boundaries assume a stable loop; caller skipped the check."""


# ---------------------------------------------------------------------------
# plant families and templates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlantFamily:
    """Parametric family of continuous plants with a nominal member."""

    generator: Callable[[Sequence[float]], RationalTF]
    parameter_grid: tuple[tuple[float, ...], ...]
    nominal_index: int

    def __init__(self, generator, parameter_grid, nominal_index=0):
        grid = tuple(tuple(float(x) for x in np.atleast_1d(p)) for p in parameter_grid)
        if not grid:
            raise ValueError("parameter grid is empty")
        if not 0 <= nominal_index < len(grid):
            raise ValueError("nominal index outside the grid")
        object.__setattr__(self, "generator", generator)
        object.__setattr__(self, "parameter_grid", grid)
        object.__setattr__(self, "nominal_index", int(nominal_index))

    def members(self) -> list[RationalTF]:
        return [self.generator(p) for p in self.parameter_grid]

    def nominal(self) -> RationalTF:
        return self.generator(self.parameter_grid[self.nominal_index])

    def validate_pole_structure(self) -> bool:
        """All members must share the number of closed-right-half-plane poles."""
        counts = {
            int(np.sum(m.poles().real >= -1e-9)) for m in self.members()
        }
        return len(counts) == 1


@dataclass(frozen=True)
class LiftedFamily:
    """Family bound to a fast controller and timing; caches lifted members."""

    family: PlantFamily
    g_fast: RationalTF
    timing: DualRateTiming
    members: tuple[RationalTF, ...]
    lifted: tuple[RationalTF, ...]

    @classmethod
    def build(cls, family: PlantFamily, g_fast: RationalTF,
              timing: DualRateTiming) -> "LiftedFamily":
        members = tuple(family.members())
        lifted = []
        for m in members:
            p_r = zoh_discretize(m, timing.Tf)
            lifted.append(lift_downsample(compose(p_r, g_fast, "series"), timing.N))
        return cls(family, g_fast, timing, members, tuple(lifted))

    @property
    def nominal_index(self) -> int:
        return self.family.nominal_index

    def nominal_lifted(self) -> RationalTF:
        return self.lifted[self.nominal_index]

    def delta_l(self, omega: float) -> np.ndarray:
        pl0 = self.nominal_lifted().at_frequency(omega)
        out = np.array([pl.at_frequency(omega) / pl0 for pl in self.lifted])
        out[self.nominal_index] = 1.0 + 0.0j
        return out

    def delta(self, omega: float) -> np.ndarray:
        pl0 = self.nominal_lifted().at_frequency(omega)
        gr = self.g_fast(cmath.exp(1j * omega * self.timing.Tf))
        return np.array(
            [m.at_frequency(omega) * gr / pl0 for m in self.members]
        )


@dataclass(frozen=True)
class Template:
    """Frequency-response uncertainty sets at one frequency."""

    omega: float
    delta_l: tuple[complex, ...]
    delta: tuple[complex, ...]
    nominal_index: int


def build_template(lifted_family: LiftedFamily, omega: float) -> Template:
    """Member-wise lifted and continuous uncertainty ratios at ``omega``."""
    if omega < 0:
        raise ValueError("omega must be non-negative")
    return Template(
        omega=omega,
        delta_l=tuple(lifted_family.delta_l(omega).tolist()),
        delta=tuple(lifted_family.delta(omega).tolist()),
        nominal_index=lifted_family.nominal_index,
    )


# ---------------------------------------------------------------------------
# allowed-gain interval machinery
# ---------------------------------------------------------------------------

Interval = tuple[float, float]


def _intersect(a: list[Interval], b: list[Interval]) -> list[Interval]:
    out: list[Interval] = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo < hi:
            out.append((lo, hi))
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return out


def _margin_intervals(w: complex, c: float, phi_rad: float) -> list[Interval]:
    """Allowed g > 0 (linear) for |1 + g e^{j phi} w| >= c."""
    aw = abs(w)
    if aw < _EPS:
        return [(0.0, math.inf)] if 1.0 >= c else []
    b = (cmath.exp(1j * phi_rad) * w).real
    disc = b * b - aw * aw * (1.0 - c * c)
    if disc <= 0:
        return [(0.0, math.inf)]
    root = math.sqrt(disc)
    r1 = (-b - root) / (aw * aw)
    r2 = (-b + root) / (aw * aw)
    lo, hi = max(r1, 0.0), max(r2, 0.0)
    if hi <= 0 or lo >= hi:
        return [(0.0, math.inf)]
    out: list[Interval] = []
    if lo > 0:
        out.append((0.0, lo))
    out.append((hi, math.inf))
    return out


def _ratio_intervals(a_val: complex, d_val: complex, gamma: float,
                     phi_rad: float) -> list[Interval]:
    """Allowed g > 0 for |1 + g e^{j phi} A| <= gamma |1 + g e^{j phi} D|."""
    e = cmath.exp(1j * phi_rad)
    c2 = abs(a_val) ** 2 - gamma * gamma * abs(d_val) ** 2
    c1 = 2.0 * ((e * a_val).real - gamma * gamma * (e * d_val).real)
    c0 = 1.0 - gamma * gamma
    scale = max(abs(c2), abs(c1), abs(c0), 1.0)
    if abs(c2) < 1e-14 * scale:
        if abs(c1) < 1e-14 * scale:
            return [(0.0, math.inf)] if c0 <= 0 else []
        bound = -c0 / c1
        if c1 > 0:
            return [(0.0, bound)] if bound > 0 else []
        return [(max(bound, 0.0), math.inf)]
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc <= 0:
        return [(0.0, math.inf)] if c2 < 0 else []
    root = math.sqrt(disc)
    r1 = (-c1 - root) / (2.0 * c2)
    r2 = (-c1 + root) / (2.0 * c2)
    r1, r2 = min(r1, r2), max(r1, r2)
    if c2 > 0:
        lo, hi = max(r1, 0.0), r2
        return [(lo, hi)] if hi > lo else []
    out: list[Interval] = []
    if r1 > 0:
        out.append((0.0, r1))
    hi_start = max(r2, 0.0)
    out.append((hi_start, math.inf))
    return [iv for iv in out if iv[1] > iv[0]]


def _to_db(intervals: list[Interval], lo_db: float, hi_db: float) -> list[Interval]:
    out: list[Interval] = []
    for glo, ghi in intervals:
        a = lo_db if glo <= 0 else 20.0 * math.log10(glo)
        b = hi_db if math.isinf(ghi) else 20.0 * math.log10(ghi) if ghi > 0 else lo_db
        a, b = max(a, lo_db), min(b, hi_db)
        if b <= a:
            continue
        # close sub-milli-dB gaps: hairline forbidden bands appear at
        # constraint-tangency phases on numerical noise and carry no
        # loop-shaping information
        if out and a - out[-1][1] < 1e-3:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return [iv for iv in out if iv[1] - iv[0] > 1e-3 or (iv[1] - iv[0]) == hi_db - lo_db]


# ---------------------------------------------------------------------------
# constraints (exact membership, independent of the phase grid)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MarginConstraint:
    deltas: tuple[complex, ...]
    threshold: float

    def satisfied(self, point: complex) -> bool:
        return all(abs(1.0 + point * d) >= self.threshold for d in self.deltas)

    def worst_slack(self, point: complex) -> float:
        return min(abs(1.0 + point * d) - self.threshold for d in self.deltas)

    def intervals(self, phi_rad: float) -> list[Interval]:
        out = [(0.0, math.inf)]
        for d in self.deltas:
            out = _intersect(out, _margin_intervals(d, self.threshold, phi_rad))
            if not out:
                break
        return out


@dataclass(frozen=True)
class RatioConstraint:
    a_values: tuple[complex, ...]
    d_values: tuple[complex, ...]
    gamma: float

    def satisfied(self, point: complex) -> bool:
        return all(
            abs(1.0 + point * a) <= self.gamma * abs(1.0 + point * d)
            for a, d in zip(self.a_values, self.d_values)
        )

    def worst_slack(self, point: complex) -> float:
        return min(
            self.gamma * abs(1.0 + point * d) - abs(1.0 + point * a)
            for a, d in zip(self.a_values, self.d_values)
        )

    def intervals(self, phi_rad: float) -> list[Interval]:
        out = [(0.0, math.inf)]
        for a, d in zip(self.a_values, self.d_values):
            out = _intersect(out, _ratio_intervals(a, d, self.gamma, phi_rad))
            if not out:
                break
        return out


@dataclass(frozen=True)
class CompositeConstraint:
    parts: tuple

    def satisfied(self, point: complex) -> bool:
        return all(p.satisfied(point) for p in self.parts)

    def worst_slack(self, point: complex) -> float:
        return min(p.worst_slack(point) for p in self.parts)

    def intervals(self, phi_rad: float) -> list[Interval]:
        out = [(0.0, math.inf)]
        for p in self.parts:
            out = _intersect(out, p.intervals(phi_rad))
            if not out:
                break
        return out


# ---------------------------------------------------------------------------
# boundaries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Boundary:
    """Per-frequency allowed region for the nominal open loop."""

    omega_design: float
    omega_source: float
    kind: str                        # stability | dtrack | ctrack | worst
    conjugated: bool
    phase_grid: tuple[float, ...]    # degrees in [-360, 0]
    allowed: tuple[tuple[Interval, ...], ...]
    orientation: str
    constraint: MarginConstraint | RatioConstraint | CompositeConstraint
    label: str = ""

    def allows(self, phase_deg: float, gain_db: float) -> bool:
        """Exact membership via the defining inequality."""
        phi = math.radians(_wrap_phase(phase_deg))
        g = 10.0 ** (gain_db / 20.0)
        return self.constraint.satisfied(g * cmath.exp(1j * phi))

    def allows_value(self, value: complex) -> bool:
        return self.constraint.satisfied(value)

    def violation_db(self, phase_deg: float, gain_db: float) -> float:
        """Distance (dB) from the point to the nearest allowed gain at its phase.

        0 when the point is allowed; +inf when nothing is allowed there.
        """
        if self.allows(phase_deg, gain_db):
            return 0.0
        phi = math.radians(_wrap_phase(phase_deg))
        lo, hi = GAIN_RANGE_DB
        ivs = _to_db(self.constraint.intervals(phi), lo, hi)
        if not ivs:
            return math.inf
        return min(
            abs(gain_db - a) if gain_db < a else abs(gain_db - b)
            for a, b in ivs
        )

    def to_json(self) -> dict:
        return {
            "omega_design": self.omega_design,
            "omega_source": self.omega_source,
            "kind": self.kind,
            "conjugated": self.conjugated,
            "label": self.label,
            "orientation": self.orientation,
            "phases": list(self.phase_grid),
            "allowed": [[list(iv) for iv in row] for row in self.allowed],
        }

    def to_csv(self) -> str:
        """Long-form rows: phase, interval index, lo dB, hi dB."""
        lines = ["phase_deg,interval,lo_db,hi_db"]
        for phase, row in zip(self.phase_grid, self.allowed):
            if not row:
                lines.append(f"{phase:.6g},0,,")
            for k, (a, b) in enumerate(row):
                lines.append(f"{phase:.6g},{k},{a:.6g},{b:.6g}")
        return "\n".join(lines) + "\n"


def _wrap_phase(phase_deg: float) -> float:
    """Map into [-360, 0]."""
    p = phase_deg % 360.0
    return p - 360.0 if p > 0 else p


def _default_phase_grid(step: float = PHASE_STEP_DEG) -> np.ndarray:
    return np.arange(-360.0, 0.0 + step / 2, step)


def _classify(allowed_rows: list[list[Interval]], lo_db: float, hi_db: float) -> str:
    """Orientation of the forbidden region, for rendering."""
    votes = {"below": 0, "above": 0, "inside": 0, "outside": 0, "none": 0}
    for row in allowed_rows:
        if not row:
            votes["outside"] += 1
        elif len(row) == 1:
            a, b = row[0]
            if a > lo_db and b >= hi_db:
                votes["below"] += 1
            elif a <= lo_db and b < hi_db:
                votes["above"] += 1
            elif a <= lo_db and b >= hi_db:
                votes["none"] += 1
            else:
                votes["outside"] += 1
        else:
            votes["inside"] += 1
    votes.pop("none")
    best = max(votes, key=votes.get)
    return best if votes[best] > 0 else "none"


def _build_boundary(constraint, omega_design, omega_source, kind, conjugated,
                    phase_grid, gain_range, label="") -> Boundary:
    lo, hi = gain_range
    rows = []
    for phase in phase_grid:
        ivs = constraint.intervals(math.radians(phase))
        rows.append(_to_db(ivs, lo, hi))
    return Boundary(
        omega_design=float(omega_design),
        omega_source=float(omega_source),
        kind=kind,
        conjugated=conjugated,
        phase_grid=tuple(float(p) for p in phase_grid),
        allowed=tuple(tuple(r) for r in rows),
        orientation=_classify(rows, lo, hi),
        constraint=constraint,
        label=label,
    )


def stability_boundary(
    template: Template,
    mu: float,
    phase_grid: Sequence[float] | None = None,
    gain_range: Interval = GAIN_RANGE_DB,
) -> Boundary:
    """Allowed nominal-loop region for |1 + L0 * Delta_L| >= mu."""
    if not 0 < mu < 1:
        raise ValueError("mu must lie in (0, 1)")
    grid = _default_phase_grid() if phase_grid is None else np.asarray(phase_grid, float)
    constraint = MarginConstraint(deltas=template.delta_l, threshold=mu)
    return _build_boundary(
        constraint, template.omega, template.omega, "stability", False, grid, gain_range
    )


def dtrack_boundary(
    template: Template,
    delta1_value: float,
    prefilter_d: RationalTF,
    omega: float,
    phase_grid: Sequence[float] | None = None,
    gain_range: Interval = GAIN_RANGE_DB,
) -> Boundary:
    """Sampled-error tracking bound |1 + L0 Delta_L| >= |F_L| / delta1."""
    if delta1_value <= 0:
        raise ValueError("delta1 must be positive")
    grid = _default_phase_grid() if phase_grid is None else np.asarray(phase_grid, float)
    fl = abs(prefilter_d.at_frequency(omega))
    constraint = MarginConstraint(deltas=template.delta_l, threshold=fl / delta1_value)
    return _build_boundary(
        constraint, template.omega, omega, "dtrack", False, grid, gain_range
    )


def fold(omega: float, Ts: float) -> tuple[float, bool]:
    """Alias a specification frequency into [0, pi/Ts].

    Even bands [2k, 2k+1]*pi/Ts map straight (conjugated False); odd
    bands reflect (conjugated True).  Band edges resolve to the straight
    branch.
    """
    if omega < 0:
        raise ValueError("omega must be non-negative")
    nyq = math.pi / Ts
    period = 2.0 * nyq
    wm = omega % period
    edge_tol = 1e-9 * nyq
    if abs(wm - nyq) < edge_tol:
        return nyq, False
    if wm < edge_tol or abs(wm - period) < edge_tol:
        return 0.0, False
    if wm < nyq:
        return wm, False
    return period - wm, True


def ctrack_boundary(
    lifted_family: LiftedFamily,
    delta2_value: float,
    prefilter_c: RationalTF,
    prefilter_d: RationalTF,
    reference: ReferenceSignal,
    omega_source: float,
    phase_grid: Sequence[float] | None = None,
    gain_range: Interval = GAIN_RANGE_DB,
    stability_checked: bool = False,
) -> Boundary:
    """Continuous tracking bound |E/R| <= delta2 at a source frequency.

    Member-wise the constraint on the nominal loop value x at the folded
    design frequency is |1 + x A| <= gamma |1 + x Delta_L(folded)| with
    gamma = delta2/|F| and

        A = Delta_L(source) - rho * Delta(source),
        rho = H_Ts(j w) F_L(e^{j w Ts}) R*(e^{j w Ts}) / (F(j w) R(j w)),

    conjugated on mirrored (odd) bands.
    """
    if not stability_checked:
        _warnings.warn(
            "continuous tracking bounds assume closed-loop stability; run the "
            "stability assessment first",
            StabilityHypothesisUnchecked,
            stacklevel=2,
        )
    if delta2_value <= 0:
        raise ValueError("delta2 must be positive")
    t = lifted_family.timing
    grid = _default_phase_grid() if phase_grid is None else np.asarray(phase_grid, float)
    w = omega_source
    f_val = prefilter_c.at_frequency(w)
    if abs(f_val) == 0:
        raise ZeroDivisionError("continuous prefilter vanishes at the source frequency")
    gamma = delta2_value / abs(f_val)

    rho = (
        hold_response(t.Ts, w)
        * prefilter_d.at_frequency(w)
        * reference_ratio(reference, t.Ts, w)
        / f_val
    )
    dl_src = lifted_family.delta_l(w)
    d_src = lifted_family.delta(w)
    a_vals = dl_src - rho * d_src

    w_fold, conj = fold(w, t.Ts)
    if conj:
        a_vals = np.conj(a_vals)
    dl_fold = lifted_family.delta_l(w_fold)

    constraint = RatioConstraint(
        a_values=tuple(a_vals.tolist()),
        d_values=tuple(dl_fold.tolist()),
        gamma=gamma,
    )
    return _build_boundary(
        constraint, w_fold, w, "ctrack", conj, grid, gain_range
    )


def worst_case_boundary(boundaries: Sequence[Boundary]) -> Boundary:
    """Per-phase intersection of boundaries sharing a design frequency."""
    if not boundaries:
        raise ValueError("no boundaries given")
    first = boundaries[0]
    if len(boundaries) == 1:
        return first
    for b in boundaries[1:]:
        if not math.isclose(b.omega_design, first.omega_design, rel_tol=1e-9):
            raise ValueError("boundaries are at different design frequencies")
        if b.phase_grid != first.phase_grid:
            raise ValueError("boundaries use different phase grids")
    rows = []
    for i in range(len(first.phase_grid)):
        acc = list(first.allowed[i])
        for b in boundaries[1:]:
            acc = _intersect(acc, list(b.allowed[i]))
        rows.append(acc)
    constraint = CompositeConstraint(tuple(b.constraint for b in boundaries))
    lo, hi = GAIN_RANGE_DB
    return Boundary(
        omega_design=first.omega_design,
        omega_source=first.omega_design,
        kind="worst",
        conjugated=False,
        phase_grid=first.phase_grid,
        allowed=tuple(tuple(r) for r in rows),
        orientation=_classify(rows, lo, hi),
        constraint=constraint,
        label="worst-case",
    )


# ---------------------------------------------------------------------------
# specification sets and design validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpecSet:
    """Robust design targets: margin, tracking bounds, design frequencies."""

    mu: float | None = None
    delta1: Callable[[float], float] | None = None
    delta2: Callable[[float], float] | None = None
    reference: ReferenceSignal | None = None
    stability_frequencies: tuple[float, ...] = ()
    dtrack_frequencies: tuple[float, ...] = ()
    ctrack_frequencies: tuple[float, ...] = ()


@dataclass(frozen=True)
class BoundaryResult:
    index: int
    label: str
    kind: str
    omega_design: float
    omega_source: float
    passed: bool
    violation_db: float
    loop_phase_deg: float
    loop_gain_db: float

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "label": self.label,
            "kind": self.kind,
            "omega_design": self.omega_design,
            "omega_source": self.omega_source,
            "passed": self.passed,
            "violation_db": None if math.isinf(self.violation_db) else self.violation_db,
            "loop_phase_deg": self.loop_phase_deg,
            "loop_gain_db": self.loop_gain_db,
        }


@dataclass(frozen=True)
class SweepResult:
    name: str
    passed: bool
    worst_ratio_db: float
    worst_omega: float

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst_ratio_db": self.worst_ratio_db,
            "worst_omega": self.worst_omega,
        }


@dataclass(frozen=True)
class DesignReport:
    boundary_results: tuple[BoundaryResult, ...]
    sweeps: tuple[SweepResult, ...] = ()

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.boundary_results) and all(
            s.passed for s in self.sweeps
        )

    def failing(self) -> list[BoundaryResult]:
        return [r for r in self.boundary_results if not r.passed]

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "boundaries": [r.to_json() for r in self.boundary_results],
            "sweeps": [s.to_json() for s in self.sweeps],
        }


def validate_design(
    L0: RationalTF,
    boundaries: Sequence[Boundary],
    lifted_family: LiftedFamily | None = None,
    specs: SpecSet | None = None,
    prefilter_c: RationalTF | None = None,
    prefilter_d: RationalTF | None = None,
    sweep_points: int = 400,
    sweep_max_omega: float | None = None,
) -> DesignReport:
    """Check the nominal loop against boundaries, plus dense spec sweeps.

    The boundary checks evaluate the defining inequalities exactly at the
    loop's value for each design frequency.  When the lifted family and a
    spec set are supplied, dense frequency sweeps of the worst-member
    sampled sensitivity and of the worst-member continuous tracking error
    are run against their bounds.
    """
    results = []
    for idx, b in enumerate(boundaries, start=1):
        val = L0.at_frequency(b.omega_design)
        gain_db = 20.0 * math.log10(abs(val)) if val != 0 else -math.inf
        phase = math.degrees(cmath.phase(val))
        ok = b.allows_value(val)
        viol = 0.0 if ok else b.violation_db(phase, gain_db)
        results.append(
            BoundaryResult(
                index=idx,
                label=b.label or f"#{idx}",
                kind=b.kind,
                omega_design=b.omega_design,
                omega_source=b.omega_source,
                passed=ok,
                violation_db=viol,
                loop_phase_deg=_wrap_phase(phase),
                loop_gain_db=gain_db,
            )
        )

    sweeps: list[SweepResult] = []
    if lifted_family is not None and specs is not None:
        t = lifted_family.timing
        nyq = math.pi / t.Ts
        if specs.delta1 is not None and prefilter_d is not None:
            ws = np.linspace(nyq * 1e-3, nyq, sweep_points)
            worst = -math.inf
            worst_w = ws[0]
            for w in ws:
                sl_bound = specs.delta1(w) / max(abs(prefilter_d.at_frequency(w)), 1e-300)
                if specs.mu:
                    sl_bound = min(sl_bound, 1.0 / specs.mu)
                sl_worst = _worst_member_sl(L0, lifted_family, w)
                ratio = 20.0 * math.log10(max(sl_worst, 1e-300) / sl_bound)
                if ratio > worst:
                    worst, worst_w = ratio, w
            sweeps.append(
                SweepResult("sampled_sensitivity", worst <= 1e-9, worst, float(worst_w))
            )
        if specs.delta2 is not None and specs.reference is not None and prefilter_c is not None:
            w_hi = sweep_max_omega if sweep_max_omega else 10.0 * nyq
            ws = np.linspace(nyq * 1e-3, w_hi, sweep_points)
            worst = -math.inf
            worst_w = ws[0]
            for w in ws:
                if specs.reference.delta_support(t.Ts, w, tol=1e-6):
                    continue
                er = _worst_member_er(
                    L0, lifted_family, prefilter_c,
                    prefilter_d if prefilter_d is not None else RationalTF.constant(1.0, t.Ts),
                    specs.reference, w,
                )
                ratio = 20.0 * math.log10(max(er, 1e-300) / specs.delta2(w))
                if ratio > worst:
                    worst, worst_w = ratio, w
            sweeps.append(
                SweepResult("continuous_tracking", worst <= 1e-9, worst, float(worst_w))
            )
    return DesignReport(tuple(results), tuple(sweeps))


def _worst_member_sl(L0: RationalTF, fam: LiftedFamily, omega: float) -> float:
    x = L0.at_frequency(omega)
    dl = fam.delta_l(omega)
    return float(np.max(1.0 / np.abs(1.0 + x * dl)))


def _worst_member_er(
    L0: RationalTF,
    fam: LiftedFamily,
    prefilter_c: RationalTF,
    prefilter_d: RationalTF,
    reference: ReferenceSignal,
    omega: float,
) -> float:
    """max over members of |E/R| via the member-ratio form."""
    t = fam.timing
    f_val = prefilter_c.at_frequency(omega)
    rho = (
        hold_response(t.Ts, omega)
        * prefilter_d.at_frequency(omega)
        * reference_ratio(reference, t.Ts, omega)
        / f_val
    )
    dl = fam.delta_l(omega)
    dd = fam.delta(omega)
    a_vals = dl - rho * dd
    x = L0.at_frequency(omega)
    return float(np.max(np.abs(f_val) * np.abs(1.0 + x * a_vals) / np.abs(1.0 + x * dl)))
