"""Bundled demo problems.

Two families of examples ship with the package:

* ``ex3``/``ex6``/``ex7``/``ex9``/``ex11`` - a stable two-pole lowpass
  plant under a published dual-rate controller pair at Ts = 0.4 s, N = 3,
  exercised through stability analysis, robust-margin sweeps and
  intersample tracking redesign (the notch of ``ex11`` removes the
  ripple that ``ex9`` exposes).
* ``rwip_pid``/``rwip_qft`` - a reaction wheel inverted pendulum
  balancing rig (slow angle sampling at 8 ms, fast actuation at 4 ms)
  with gain-only flywheel uncertainty, first under a PID-split
  controller and then under the retuned slow controller.

Controller coefficients carry two reconstructions of their published
4-significant-digit values, chosen inside printed rounding so the loops
reproduce the published analysis exactly: the slow denominator factors
as (z-1)(z^2-1.131z+0.2344), and the fast numerator's z^2 coefficient is
102.06.  The pendulum problems insert a wheel-drive rate-command stage
k_a/s (k_a = 110) between controller output and wheel speed.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

__all__ = ["PROBLEMS", "problem_dict", "write_all"]

_GL_NUM = [1.0, -1.296, 0.5636, -0.1721]
_GL_DEN = list(np.polymul([1.0, -1.0], [1.0, -1.131, 0.2344]))
_GR_NUM = [26.31, -85.24, 102.06, -53.32, 10.21]
_GR_DEN = [1.0, -1.469, -0.2344, 1.225, -0.5089]
_NOTCH_NUM = list(0.75 * np.polymul([1.0, -0.52], [1.0, 0.76]))
_NOTCH_DEN = list(np.polymul([1.0, -0.5], [1.0, 0.5]))

_BENCH_TIMING = {"Ts": 0.4, "N": 3}
_BENCH_PLANT = {
    "kind": "explicit",
    "members": [{"num": [1.5], "den": list(np.polymul([1.0, 0.5], [1.0, 1.5]))}],
    "nominal_index": 0,
}
_BENCH_CONTROLLERS = {
    "g_fast": {"num": _GR_NUM, "den": _GR_DEN},
    "g_slow": {"num": _GL_NUM, "den": _GL_DEN},
}
_PREFILTER = {"f": {"num": [1.0], "den": [0.1, 1.0]}}

_EX9_SPECS = {
    "mu": 0.5,
    "delta1": {"kind": "ramp", "slope": 1.0},
    "delta2": {
        "kind": "ramp_then_level",
        "slope": 1.0,
        "cutoff": math.pi / 0.4,
        "level": 1.0,
    },
    "reference": {"kind": "step", "amplitude": 1.0},
    "dtrack_frequencies": [0.01, 0.03, 0.1, 0.3, 0.5, 0.7, 1.0],
    "ctrack_frequencies": [
        0.01, 0.03, 0.1, 0.3, 0.5, 0.7, 1.0,
        2.5, 2.75, 3.0, 3.8, 5.0, 8.9,
    ],
}

_RWIP_TIMING = {"Ts": 0.008, "N": 2}
_RWIP_PLANT = {
    "kind": "rwip",
    "j_f_values": [290.0 / 3, 145.0, 193.3, 241.7, 290.0],
    "nominal_j_f": 290.0,
    "vary_total_inertia": False,
    "actuator_gain": 110.0,
}
_RWIP_SPECS = {
    "mu": 1.0 / math.sqrt(2.0),
    "delta2": {
        "kind": "second_order_step",
        "wn": 5.0,
        "zeta": 0.5,
        "cutoff": 5.0,
        "level": math.sqrt(2.0),
    },
    "reference": {
        "kind": "sinusoid",
        "amplitude": 10.0 * math.pi / 180.0,
        "frequency": 2.0 * math.pi / 10.0,
    },
    "stability_frequencies": [0.001, 0.003, 0.01, 0.1, 0.5, 1.0],
    "ctrack_frequencies": [0.001, 0.003, 0.01, 0.1, 0.5, 1.0],
}
_RWIP_GR = {"num": [8.817, -7.817], "den": [1.0, 0.0]}


def _bench(name: str, **extra) -> dict:
    out = {
        "name": name,
        "timing": dict(_BENCH_TIMING),
        "plant": json.loads(json.dumps(_BENCH_PLANT)),
        "controllers": json.loads(json.dumps(_BENCH_CONTROLLERS)),
    }
    out.update(json.loads(json.dumps(extra)))
    return out


PROBLEMS: dict[str, dict] = {
    "ex3": _bench("ex3"),
    "ex6": _bench(
        "ex6",
        prefilters=_PREFILTER,
        specs={"reference": {"kind": "step", "amplitude": 1.0}},
    ),
    "ex7": {
        "name": "ex7",
        "timing": dict(_BENCH_TIMING),
        "plant": {
            "kind": "coefficient",
            # a / ((s + 0.5)(s + a)): coefficients are polynomials in a
            "num": [[0.0, 1.0]],
            "den": [[1.0], [0.5, 1.0], [0.0, 0.5]],
            "grid": {"start": 0.5, "stop": 2.5, "step": 0.01},
            "nominal_value": 1.5,
        },
        "controllers": json.loads(json.dumps(_BENCH_CONTROLLERS)),
        "specs": {
            "mu": 0.5,
            "stability_frequencies": [0.01, 0.1, 0.5, 1.0],
        },
    },
    "ex9": _bench("ex9", prefilters=_PREFILTER, specs=_EX9_SPECS),
    "ex11": {
        "name": "ex11",
        "timing": dict(_BENCH_TIMING),
        "plant": json.loads(json.dumps(_BENCH_PLANT)),
        "controllers": {
            "g_fast": {"num": list(_GR_NUM), "den": list(_GR_DEN)},
            "g_slow": {
                "num": list(np.polymul(_NOTCH_NUM, _GL_NUM)),
                "den": list(np.polymul(_NOTCH_DEN, _GL_DEN)),
            },
        },
        "prefilters": json.loads(json.dumps(_PREFILTER)),
        "specs": json.loads(json.dumps(_EX9_SPECS)),
    },
    "rwip_pid": {
        "name": "rwip_pid",
        "timing": dict(_RWIP_TIMING),
        "plant": json.loads(json.dumps(_RWIP_PLANT)),
        "controllers": {
            "g_fast": json.loads(json.dumps(_RWIP_GR)),
            "g_slow": {"num": [42.2, 42.2 * -0.9973], "den": [1.0, -1.0]},
        },
        "specs": json.loads(json.dumps(_RWIP_SPECS)),
    },
    "rwip_qft": {
        "name": "rwip_qft",
        "timing": dict(_RWIP_TIMING),
        "plant": json.loads(json.dumps(_RWIP_PLANT)),
        "controllers": {
            "g_fast": json.loads(json.dumps(_RWIP_GR)),
            "g_slow": {"num": [84.4, 84.4 * -0.9823], "den": [1.0, -1.0]},
        },
        "specs": json.loads(json.dumps(_RWIP_SPECS)),
    },
}


def problem_dict(name: str) -> dict:
    return json.loads(json.dumps(PROBLEMS[name]))


def write_all(directory: str | Path) -> list[Path]:
    """Write every bundled problem to ``directory`` as JSON."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, obj in PROBLEMS.items():
        path = directory / f"{name}.json"
        path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
        written.append(path)
    return written
