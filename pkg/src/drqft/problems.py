"""Problem-file ingestion: plant families, controllers, specs from JSON.

One JSON format describes an analysis/design problem; the CLI and the
HTTP service share this loader, so both produce identical downstream
artifacts for identical inputs.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from jsonschema import Draft202012Validator

from .bounds import (
    Boundary,
    LiftedFamily,
    PlantFamily,
    SpecSet,
    build_template,
    ctrack_boundary,
    dtrack_boundary,
    stability_boundary,
)
from .lti import RationalTF, compose
from .sampling import DualRateTiming, ReferenceSignal
from .simulate import rwip_plant
from .spectra import DualRateLoop, make_loop

__all__ = ["Problem", "ProblemError", "load_problem", "compute_boundaries", "PROBLEM_SCHEMA"]


class ProblemError(Exception):
    """Problem file is malformed or inconsistent."""


_TF_SCHEMA = {
    "type": "object",
    "properties": {
        "num": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "den": {"type": "array", "items": {"type": "number"}, "minItems": 1},
    },
    "required": ["num", "den"],
    "additionalProperties": False,
}

_DELTA_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {
            "enum": ["ramp", "ramp_then_level", "second_order_step", "table", "constant"]
        },
        "slope": {"type": "number"},
        "cutoff": {"type": "number"},
        "level": {"type": "number"},
        "value": {"type": "number"},
        "wn": {"type": "number"},
        "zeta": {"type": "number"},
        "omega": {"type": "array", "items": {"type": "number"}},
        "values": {"type": "array", "items": {"type": "number"}},
    },
    "required": ["kind"],
}

PROBLEM_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "timing": {
            "type": "object",
            "properties": {
                "Ts": {"type": "number", "exclusiveMinimum": 0},
                "N": {"type": "integer", "minimum": 1},
            },
            "required": ["Ts", "N"],
            "additionalProperties": False,
        },
        "plant": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["explicit", "gain", "coefficient", "rwip"]},
                "members": {"type": "array", "items": _TF_SCHEMA},
                "base": _TF_SCHEMA,
                "gains": {"type": "array", "items": {"type": "number"}},
                "num": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                "den": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                "grid": {
                    "type": "object",
                    "properties": {
                        "start": {"type": "number"},
                        "stop": {"type": "number"},
                        "step": {"type": "number"},
                        "count": {"type": "integer"},
                    },
                },
                "values": {"type": "array", "items": {"type": "number"}},
                "nominal_index": {"type": "integer", "minimum": 0},
                "nominal_value": {"type": "number"},
                "j_f_values": {"type": "array", "items": {"type": "number"}},
                "nominal_j_f": {"type": "number"},
                "vary_total_inertia": {"type": "boolean"},
                "actuator_gain": {"type": "number"},
            },
            "required": ["kind"],
        },
        "controllers": {
            "type": "object",
            "properties": {"g_fast": _TF_SCHEMA, "g_slow": _TF_SCHEMA},
            "required": ["g_fast", "g_slow"],
            "additionalProperties": False,
        },
        "prefilters": {
            "type": "object",
            "properties": {"f": _TF_SCHEMA, "f_l": _TF_SCHEMA},
            "additionalProperties": False,
        },
        "specs": {
            "type": "object",
            "properties": {
                "mu": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "delta1": _DELTA_SCHEMA,
                "delta2": _DELTA_SCHEMA,
                "reference": {
                    "type": "object",
                    "properties": {
                        "kind": {
                            "enum": ["step", "ramp", "sinusoid", "damped_sinusoid", "exponential"]
                        },
                        "amplitude": {"type": "number"},
                        "frequency": {"type": "number"},
                        "decay": {"type": "number"},
                        "phase": {"type": "number"},
                    },
                    "required": ["kind"],
                },
                "stability_frequencies": {"type": "array", "items": {"type": "number"}},
                "dtrack_frequencies": {"type": "array", "items": {"type": "number"}},
                "ctrack_frequencies": {"type": "array", "items": {"type": "number"}},
            },
        },
        "grids": {
            "type": "object",
            "properties": {
                "phase_step_deg": {"type": "number", "exclusiveMinimum": 0},
                "gain_range_db": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 2,
                    "maxItems": 2,
                },
                "curve_points": {"type": "integer", "minimum": 16},
                "sweep_points": {"type": "integer", "minimum": 16},
                "sweep_max_omega": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
    "required": ["name", "timing", "plant", "controllers"],
}

_VALIDATOR = Draft202012Validator(PROBLEM_SCHEMA)


def _delta_fn(obj: dict | None) -> Callable[[float], float] | None:
    if obj is None:
        return None
    kind = obj["kind"]
    if kind == "constant":
        v = float(obj["value"])
        return lambda w: v
    if kind == "ramp":
        s = float(obj["slope"])
        return lambda w: s * w
    if kind == "ramp_then_level":
        s, cut, lev = float(obj["slope"]), float(obj["cutoff"]), float(obj["level"])
        return lambda w: s * w if w <= cut * (1 + 1e-12) else lev
    if kind == "second_order_step":
        wn, zeta = float(obj["wn"]), float(obj["zeta"])
        cut = float(obj.get("cutoff", wn))
        lev = float(obj.get("level", math.sqrt(2)))

        def fn(w: float) -> float:
            if w > cut:
                return lev
            s = 1j * w
            return abs(1.0 - wn**2 / (s * s + 2 * zeta * wn * s + wn**2))

        return fn
    if kind == "table":
        ws = np.asarray(obj["omega"], dtype=float)
        vs = np.asarray(obj["values"], dtype=float)
        return lambda w: float(np.interp(w, ws, vs))
    raise ProblemError(f"unknown delta kind {kind!r}")


def _family_from_json(obj: dict, timing: DualRateTiming) -> PlantFamily:
    kind = obj["kind"]
    if kind == "explicit":
        members = [RationalTF(m["num"], m["den"]) for m in obj["members"]]
        idx = int(obj.get("nominal_index", 0))
        return PlantFamily(lambda p, _m=members: _m[int(p[0])],
                           [(float(i),) for i in range(len(members))], idx)
    if kind == "gain":
        base = RationalTF(obj["base"]["num"], obj["base"]["den"])
        gains = [float(g) for g in obj["gains"]]
        idx = int(obj.get("nominal_index", len(gains) - 1))
        return PlantFamily(
            lambda p, _b=base: RationalTF(
                [c * p[0] for c in _b.num.coeffs], _b.den.coeffs
            ),
            [(g,) for g in gains],
            idx,
        )
    if kind == "coefficient":
        num_rows = obj["num"]
        den_rows = obj["den"]
        values = _grid_values(obj)
        nominal = float(obj["nominal_value"])
        idx = int(np.argmin([abs(v - nominal) for v in values]))

        def gen(p, _n=num_rows, _d=den_rows):
            a = p[0]
            num = [float(np.polyval(list(reversed(row)), a)) for row in _n]
            den = [float(np.polyval(list(reversed(row)), a)) for row in _d]
            return RationalTF(num, den)

        return PlantFamily(gen, [(v,) for v in values], idx)
    if kind == "rwip":
        jfs = [float(j) for j in obj["j_f_values"]]
        nominal = float(obj.get("nominal_j_f", max(jfs)))
        idx = int(np.argmin([abs(j - nominal) for j in jfs]))
        vary = bool(obj.get("vary_total_inertia", False))
        k_a = float(obj.get("actuator_gain", 1.0))

        def gen(p, _v=vary, _k=k_a):
            plant = rwip_plant(p[0], vary_total_inertia=_v)
            if _k == 0:
                return plant
            return compose(plant, RationalTF([_k], [1.0, 0.0]), "series")

        return PlantFamily(gen, [(j,) for j in jfs], idx)
    raise ProblemError(f"unknown plant kind {kind!r}")


def _grid_values(obj: dict) -> list[float]:
    if "values" in obj:
        return [float(v) for v in obj["values"]]
    g = obj["grid"]
    if "step" in g:
        n = int(round((g["stop"] - g["start"]) / g["step"]))
        return [g["start"] + i * g["step"] for i in range(n + 1)]
    return list(np.linspace(g["start"], g["stop"], int(g["count"])))


@dataclass
class Problem:
    name: str
    timing: DualRateTiming
    family: PlantFamily
    g_fast: RationalTF
    g_slow: RationalTF
    prefilter_c: RationalTF
    prefilter_d: RationalTF | None
    specs: SpecSet
    grids: dict
    raw: dict
    _lifted: LiftedFamily | None = field(default=None, repr=False)

    def nominal_loop(self, g_slow: RationalTF | None = None) -> DualRateLoop:
        return make_loop(
            self.family.nominal(),
            self.g_fast,
            g_slow if g_slow is not None else self.g_slow,
            self.timing,
            prefilter_c=self.prefilter_c,
            prefilter_d=self.prefilter_d,
        )

    def lifted_family(self) -> LiftedFamily:
        if self._lifted is None:
            self._lifted = LiftedFamily.build(self.family, self.g_fast, self.timing)
        return self._lifted

    @property
    def phase_grid(self) -> np.ndarray:
        step = float(self.grids.get("phase_step_deg", 1.0))
        return np.arange(-360.0, 0.0 + step / 2, step)

    @property
    def gain_range(self) -> tuple[float, float]:
        rng = self.grids.get("gain_range_db", (-80.0, 80.0))
        return float(rng[0]), float(rng[1])


def load_problem(source: str | Path | dict) -> Problem:
    """Parse and validate a problem description (path or already-loaded dict)."""
    if isinstance(source, (str, Path)):
        try:
            raw = json.loads(Path(source).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ProblemError(f"cannot read problem file: {exc}") from exc
    else:
        raw = source
    errors = sorted(_VALIDATOR.iter_errors(raw), key=lambda e: list(e.path))
    if errors:
        msgs = "; ".join(f"{'/'.join(str(p) for p in e.path)}: {e.message}" for e in errors[:5])
        raise ProblemError(f"schema violation: {msgs}")

    timing = DualRateTiming(Ts=raw["timing"]["Ts"], N=raw["timing"]["N"])
    family = _family_from_json(raw["plant"], timing)
    if not family.validate_pole_structure():
        raise ProblemError("family members differ in unstable pole count")
    ctrl = raw["controllers"]
    g_fast = RationalTF(ctrl["g_fast"]["num"], ctrl["g_fast"]["den"], timing.Tf)
    g_slow = RationalTF(ctrl["g_slow"]["num"], ctrl["g_slow"]["den"], timing.Ts)
    if not g_fast.is_proper or not g_slow.is_proper:
        raise ProblemError("controllers must be proper")

    pf = raw.get("prefilters", {})
    prefilter_c = (
        RationalTF(pf["f"]["num"], pf["f"]["den"]) if "f" in pf else RationalTF.constant(1.0)
    )
    prefilter_d = (
        RationalTF(pf["f_l"]["num"], pf["f_l"]["den"], timing.Ts) if "f_l" in pf else None
    )

    sp = raw.get("specs", {})
    nyq = math.pi / timing.Ts
    specs = SpecSet(
        mu=sp.get("mu"),
        delta1=_delta_fn(sp.get("delta1")),
        delta2=_delta_fn(sp.get("delta2")),
        reference=ReferenceSignal.from_json(sp["reference"]) if "reference" in sp else None,
        stability_frequencies=tuple(
            f * nyq for f in sp.get("stability_frequencies", [])
        ),
        dtrack_frequencies=tuple(f * nyq for f in sp.get("dtrack_frequencies", [])),
        ctrack_frequencies=tuple(f * nyq for f in sp.get("ctrack_frequencies", [])),
    )
    return Problem(
        name=raw["name"],
        timing=timing,
        family=family,
        g_fast=g_fast,
        g_slow=g_slow,
        prefilter_c=prefilter_c,
        prefilter_d=prefilter_d,
        specs=specs,
        grids=raw.get("grids", {}),
        raw=raw,
    )


def compute_boundaries(problem: Problem, kinds: tuple[str, ...] = ("stability", "dtrack", "ctrack"),
                       omega: float | None = None) -> list[Boundary]:
    """All specification boundaries of a problem, deterministically ordered.

    Frequencies in the problem file are fractions of the slow Nyquist rate;
    ``omega`` (rad/s) restricts the output to design frequencies matching
    it (after folding, for the continuous-tracking kind).
    """
    lf = problem.lifted_family()
    specs = problem.specs
    grid = problem.phase_grid
    rng = problem.gain_range
    out: list[Boundary] = []
    loop = problem.nominal_loop()
    prefilter_d = loop.prefilter_d

    if "stability" in kinds and specs.mu:
        for i, w in enumerate(specs.stability_frequencies, start=1):
            t = build_template(lf, w)
            b = stability_boundary(t, specs.mu, grid, rng)
            out.append(_relabel(b, f"stab-{i}"))
    if "dtrack" in kinds and specs.delta1 is not None:
        for i, w in enumerate(specs.dtrack_frequencies, start=1):
            t = build_template(lf, w)
            b = dtrack_boundary(t, specs.delta1(w), prefilter_d, w, grid, rng)
            out.append(_relabel(b, f"dtrack-{i}"))
    if "ctrack" in kinds and specs.delta2 is not None and specs.reference is not None:
        for i, w in enumerate(specs.ctrack_frequencies, start=1):
            b = ctrack_boundary(
                lf,
                specs.delta2(w),
                problem.prefilter_c,
                prefilter_d,
                specs.reference,
                w,
                grid,
                rng,
                stability_checked=True,
            )
            out.append(_relabel(b, f"ctrack-{i}"))
    if omega is not None:
        out = [b for b in out if math.isclose(b.omega_design, omega, rel_tol=1e-9, abs_tol=1e-12)]
    return out


def _relabel(b: Boundary, label: str) -> Boundary:
    return Boundary(
        omega_design=b.omega_design,
        omega_source=b.omega_source,
        kind=b.kind,
        conjugated=b.conjugated,
        phase_grid=b.phase_grid,
        allowed=b.allowed,
        orientation=b.orientation,
        constraint=b.constraint,
        label=label,
    )
