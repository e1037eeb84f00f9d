"""JSON-over-HTTP service backing the interactive loop-shaping frontend.

Strictly request/response.  Problems are posted once; specification
boundaries are computed on first request and cached per session -- they
depend only on the plant family, fast controller and specs, never on the
slow controller, so controller edits never invalidate them.
"""
from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Response

from .bounds import _worst_member_er, _worst_member_sl, validate_design
from .cli import dumps_canonical
from .lti import ImproperTF, Polynomial, RationalTF, compose
from .problems import Problem, ProblemError, compute_boundaries, load_problem
from .sampling import ReferenceSignal
from .simulate import InsufficientSteadyState, ripple_metrics, simulate
from .stability import assess, nichols_curve

__all__ = ["create_app", "apply_sections"]


def apply_sections(g_slow: RationalTF, sections: list[dict]) -> RationalTF:
    """Compose controller edit sections onto the base slow controller.

    Section kinds: gain (dB), real_zero / real_pole (position on the real
    axis), and a notch K(z - a1)(z + a2) / ((z - 0.5)(z + 0.5)).  The
    result must stay proper.
    """
    ts = g_slow.sample_time
    num = g_slow.num
    den = g_slow.den
    for s in sections:
        kind = s.get("type")
        if kind == "gain":
            num = num * (10.0 ** (float(s["db"]) / 20.0))
        elif kind == "real_zero":
            num = num * Polynomial([1.0, -float(s["position"])])
        elif kind == "real_pole":
            den = den * Polynomial([1.0, -float(s["position"])])
        elif kind == "notch":
            k, a1, a2 = float(s["K"]), float(s["alpha1"]), float(s["alpha2"])
            num = num * Polynomial(k * np.polymul([1.0, -a1], [1.0, a2]))
            den = den * Polynomial(np.polymul([1.0, -0.5], [1.0, 0.5]))
        else:
            raise ValueError(f"unknown section type {kind!r}")
    out = RationalTF(num, den, ts)
    if not out.is_proper:
        raise ImproperTF("edited controller is improper")
    return out


def _sensitivity_sweep(p: Problem, lf, L0, loop) -> dict:
    """Worst-member sensitivity curves with their specification bounds.

    Supplies the frontend's Bode panel; all numbers are computed here so
    the client renders payload values verbatim.
    """
    specs = p.specs
    nyq = math.pi / p.timing.Ts
    points = int(p.grids.get("sweep_points", 200))
    out: dict = {}

    def db(x: float) -> float:
        return 20.0 * math.log10(max(x, 1e-300))

    if specs.delta1 is not None:
        ws = np.linspace(nyq * 1e-3, nyq, points)
        vals, bounds = [], []
        for w in ws:
            bound = specs.delta1(w) / max(abs(loop.prefilter_d.at_frequency(w)), 1e-300)
            if specs.mu:
                bound = min(bound, 1.0 / specs.mu)
            vals.append(db(_worst_member_sl(L0, lf, w)))
            bounds.append(db(bound))
        out["sampled"] = {"omega": ws.tolist(), "value_db": vals, "bound_db": bounds}
    if specs.delta2 is not None and specs.reference is not None:
        w_hi = p.grids.get("sweep_max_omega")
        if w_hi is None:
            w_hi = 1.3 * max(specs.ctrack_frequencies) if specs.ctrack_frequencies else 10 * nyq
        ws = np.linspace(nyq * 1e-3, w_hi, points)
        vals, bounds, kept = [], [], []
        for w in ws:
            if specs.reference.delta_support(p.timing.Ts, w, tol=1e-6):
                continue
            kept.append(float(w))
            vals.append(db(_worst_member_er(
                L0, lf, p.prefilter_c, loop.prefilter_d, specs.reference, w
            )))
            bounds.append(db(specs.delta2(w)))
        out["tracking"] = {"omega": kept, "value_db": vals, "bound_db": bounds}
    return out


@dataclass
class _Session:
    problem: Problem
    boundaries: list | None = None
    boundary_computes: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)

    def get_boundaries(self):
        with self.lock:
            if self.boundaries is None:
                self.boundaries = compute_boundaries(self.problem)
                self.boundary_computes += 1
            return self.boundaries


def create_app() -> FastAPI:
    app = FastAPI(title="dual-rate loop shaping service")
    sessions: dict[str, _Session] = {}
    counter = itertools.count(1)
    store_lock = threading.Lock()

    def session_of(pid: str) -> _Session:
        s = sessions.get(pid)
        if s is None:
            raise HTTPException(status_code=404, detail=f"unknown problem id {pid!r}")
        return s

    @app.post("/problems")
    def post_problem(body: dict):
        try:
            problem = load_problem(body)
        except ProblemError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        with store_lock:
            pid = f"p{next(counter)}"
            sessions[pid] = _Session(problem=problem)
        return {"id": pid, "name": problem.name}

    @app.get("/problems/{pid}")
    def get_problem(pid: str):
        s = session_of(pid)
        p = s.problem
        return {
            "name": p.name,
            "Ts": p.timing.Ts,
            "Tf": p.timing.Tf,
            "N": p.timing.N,
            "members": len(p.family.parameter_grid),
            "g_slow": p.g_slow.to_json(),
            "g_fast": p.g_fast.to_json(),
            "boundary_computes": s.boundary_computes,
        }

    @app.get("/problems/{pid}/boundaries")
    def get_boundaries(pid: str, omega: float | None = Query(default=None),
                       kind: str | None = Query(default=None)):
        s = session_of(pid)
        bl = s.get_boundaries()
        out = []
        for b in bl:
            if omega is not None and not math.isclose(
                b.omega_design, omega, rel_tol=1e-9, abs_tol=1e-12
            ):
                continue
            if kind is not None and b.kind != kind:
                continue
            out.append(b.to_json())
        return Response(content=dumps_canonical(out) + "\n",
                        media_type="application/json")

    @app.post("/problems/{pid}/controller")
    def post_controller(pid: str, body: dict):
        s = session_of(pid)
        p = s.problem
        sections = body.get("sections", [])
        try:
            g_slow = apply_sections(p.g_slow, sections)
        except (ImproperTF, ValueError, KeyError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        computes_before = s.boundary_computes
        boundaries = s.get_boundaries()
        try:
            loop = p.nominal_loop(g_slow=g_slow)
        except Exception as exc:  # degenerate edits (e.g. unstable hidden modes)
            raise HTTPException(status_code=422, detail=str(exc))
        verdict = assess(loop)
        lf = p.lifted_family()
        L0 = compose(g_slow, lf.nominal_lifted(), "series")
        report = validate_design(
            L0, boundaries, lf, p.specs,
            prefilter_c=p.prefilter_c, prefilter_d=loop.prefilter_d,
            sweep_points=int(p.grids.get("sweep_points", 200)),
        )
        curve = nichols_curve(L0, points=int(p.grids.get("curve_points", 512)))
        markers = []
        for b in boundaries:
            val = L0.at_frequency(b.omega_design)
            markers.append({
                "label": b.label,
                "omega": b.omega_design,
                "phase_deg": math.degrees(np.angle(val)),
                "gain_db": 20.0 * math.log10(abs(val)) if val != 0 else None,
            })
        sensitivity = _sensitivity_sweep(p, lf, L0, loop)
        return {
            "g_slow": g_slow.to_json(),
            "l0_curve": {
                "omega": curve.omega.tolist(),
                "phase_deg": curve.phase_deg.tolist(),
                "gain_db": curve.gain_db.tolist(),
            },
            "markers": markers,
            "margins": {
                "gain_margin_db": None if math.isinf(verdict.gain_margin_db)
                else verdict.gain_margin_db,
                "phase_margin_deg": None if math.isinf(verdict.phase_margin_deg)
                else verdict.phase_margin_deg,
            },
            "verdict": verdict.to_json(),
            "validation": report.to_json(),
            "sensitivity": sensitivity,
            "boundary_computes": s.boundary_computes,
            "recomputed_boundaries": s.boundary_computes != computes_before,
        }

    @app.post("/problems/{pid}/simulate")
    def post_simulate(pid: str, body: dict):
        s = session_of(pid)
        p = s.problem
        t_end = body.get("t_end")
        if not isinstance(t_end, (int, float)) or t_end <= 0:
            raise HTTPException(status_code=422, detail="t_end must be positive")
        ref_obj = body.get("reference")
        if ref_obj is not None:
            try:
                ref = ReferenceSignal.from_json(ref_obj)
            except (ValueError, KeyError) as exc:
                raise HTTPException(status_code=422, detail=str(exc))
        elif p.specs.reference is not None:
            ref = p.specs.reference
        else:
            raise HTTPException(status_code=422, detail="no reference signal given")
        sections = body.get("sections", [])
        try:
            g_slow = apply_sections(p.g_slow, sections)
            loop = p.nominal_loop(g_slow=g_slow)
        except (ImproperTF, ValueError, KeyError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        trace = simulate(loop, ref, float(t_end), substeps=int(body.get("substeps", 8)))
        omega0 = ref.frequency if ref.kind in ("sinusoid", "damped_sinusoid") else None
        out = {"trace": trace.to_json()}
        try:
            out["ripple"] = ripple_metrics(trace, omega0=omega0).to_json()
        except InsufficientSteadyState:
            out["ripple"] = None
        return out

    return app
