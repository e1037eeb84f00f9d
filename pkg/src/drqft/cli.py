"""Command-line workflows: analyze, bounds, simulate, serve."""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .bounds import validate_design
from .lti import compose
from .problems import Problem, ProblemError, compute_boundaries, load_problem
from .sampling import ReferenceSignal
from .simulate import InsufficientSteadyState, ripple_metrics, simulate
from .stability import assess

EXIT_OK = 0
EXIT_SPEC_FAIL = 1
EXIT_BAD_INPUT = 2


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _load(path: str) -> Problem:
    try:
        return load_problem(path)
    except ProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_BAD_INPUT)


def _robust_margin_sweep(problem: Problem, points: int = 1200):
    """Worst |1 + L*Delta_L| over the family and the frequency range."""
    lf = problem.lifted_family()
    L0 = compose(problem.g_slow, lf.nominal_lifted(), "series")
    nyq = math.pi / problem.timing.Ts
    ws = np.linspace(nyq * 1e-3, nyq, points)
    l_vals = np.array([L0.at_frequency(w) for w in ws])
    pl0 = np.array([lf.nominal_lifted().at_frequency(w) for w in ws])
    worst = (math.inf, None, None)
    for i, params in enumerate(lf.family.parameter_grid):
        dl = np.array([lf.lifted[i].at_frequency(w) for w in ws]) / pl0
        dist = np.abs(1.0 + l_vals * dl)
        j = int(np.argmin(dist))
        if dist[j] < worst[0]:
            worst = (float(dist[j]), params, float(ws[j]))
    return worst


def cmd_analyze(args) -> int:
    problem = _load(args.problem)
    loop = problem.nominal_loop()
    verdict = assess(loop, points=args.grid_points)
    report = {
        "problem": problem.name,
        "verdict": verdict.to_json(),
    }
    failed = not verdict.stable
    print(f"{problem.name}: nominal {'STABLE' if verdict.stable else 'UNSTABLE'} "
          f"(net crossings {verdict.net_crossings}, required {verdict.required_crossings}, "
          f"pole oracle {verdict.oracle_verdict})")
    print(f"  margins: GM {verdict.gain_margin_db:.2f} dB, PM {verdict.phase_margin_deg:.1f} deg")

    specs = problem.specs
    if specs.mu and len(problem.family.parameter_grid) > 1:
        margin, params, w = _robust_margin_sweep(problem)
        ok = margin >= specs.mu
        report["robust_margin"] = {
            "worst": margin, "mu": specs.mu, "passed": ok,
            "worst_parameters": list(params), "worst_omega": w,
        }
        failed |= not ok
        print(f"  robust margin: worst |1+L*Delta| = {margin:.3f} vs mu = {specs.mu:.3f} "
              f"-> {'pass' if ok else 'FAIL'} (params {params}, omega {w:.3g} rad/s)")

    boundaries = compute_boundaries(problem)
    if boundaries:
        lf = problem.lifted_family()
        L0 = compose(problem.g_slow, lf.nominal_lifted(), "series")
        # the dense sweep covers the specified band: up to just past the
        # highest tracking source frequency (specs say nothing beyond it)
        sweep_max = problem.grids.get("sweep_max_omega")
        if sweep_max is None and specs.ctrack_frequencies:
            sweep_max = 1.3 * max(specs.ctrack_frequencies)
        design = validate_design(
            L0, boundaries, lf, specs,
            prefilter_c=problem.prefilter_c, prefilter_d=loop.prefilter_d,
            sweep_points=int(problem.grids.get("sweep_points", 400)),
            sweep_max_omega=sweep_max,
        )
        report["design"] = design.to_json()
        failed |= not design.passed
        for r in design.boundary_results:
            mark = "pass" if r.passed else f"FAIL ({r.violation_db:.2f} dB over)"
            print(f"  boundary {r.label:>10} @ {r.omega_design:8.3f} rad/s "
                  f"(source {r.omega_source:8.3f}): {mark}")
        for s in design.sweeps:
            print(f"  sweep {s.name}: worst {s.worst_ratio_db:+.2f} dB at "
                  f"{s.worst_omega:.3g} rad/s -> {'pass' if s.passed else 'FAIL'}")

    if specs.reference is not None and verdict.stable:
        t_end = args.t_end or _default_t_end(problem)
        trace = simulate(loop, specs.reference, t_end, substeps=args.substeps)
        omega0 = specs.reference.frequency if specs.reference.kind in (
            "sinusoid", "damped_sinusoid") else None
        try:
            ripple = ripple_metrics(trace, omega0=omega0)
            report["ripple"] = ripple.to_json()
            print(f"  ripple: dominant {ripple.dominant_ripple_frequency:.2f} rad/s, "
                  f"amplitude {ripple.dominant_ripple_amplitude:.3g}")
        except InsufficientSteadyState as exc:
            print(f"  ripple: skipped ({exc})")

    if args.json:
        Path(args.json).write_text(dumps_canonical(report) + "\n")
    return EXIT_SPEC_FAIL if failed else EXIT_OK


def _default_t_end(problem: Problem) -> float:
    t_end = 60.0 * problem.timing.Ts
    ref = problem.specs.reference
    if ref is not None and ref.kind in ("sinusoid", "damped_sinusoid"):
        t_end = max(t_end, 3.0 * 2.0 * math.pi / ref.frequency)
    return t_end


def cmd_bounds(args) -> int:
    problem = _load(args.problem)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.phase_step:
        problem.grids["phase_step_deg"] = args.phase_step
    boundaries = compute_boundaries(problem)
    written = []
    for b in boundaries:
        stem = f"boundary_{b.label}"
        (out / f"{stem}.json").write_text(dumps_canonical(b.to_json()) + "\n")
        (out / f"{stem}.csv").write_text(b.to_csv())
        written.append(stem)
    print(f"wrote {len(written)} boundaries to {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    problem = _load(args.problem)
    if args.t_end is None or args.t_end <= 0:
        print("error: --t-end must be a positive duration", file=sys.stderr)
        return EXIT_BAD_INPUT
    ref = problem.specs.reference
    if args.ref:
        if args.ref == "step":
            ref = ReferenceSignal("step")
        elif args.ref.startswith("sin:"):
            ref = ReferenceSignal("sinusoid", frequency=float(args.ref[4:]), phase=math.pi / 2)
        else:
            print(f"error: unknown reference {args.ref!r}", file=sys.stderr)
            return EXIT_BAD_INPUT
    if ref is None:
        print("error: no reference given (use --ref or a problem spec)", file=sys.stderr)
        return EXIT_BAD_INPUT

    loop = problem.nominal_loop()
    trace = simulate(loop, ref, args.t_end, substeps=args.substeps)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trace.csv").write_text(trace.to_csv())
    (out / "trace.json").write_text(dumps_canonical(trace.to_json()) + "\n")
    omega0 = ref.frequency if ref.kind in ("sinusoid", "damped_sinusoid") else None
    try:
        ripple = ripple_metrics(trace, omega0=omega0)
        (out / "ripple.json").write_text(dumps_canonical(ripple.to_json()) + "\n")
        print(f"dominant ripple: {ripple.dominant_ripple_frequency:.3f} rad/s, "
              f"amplitude {ripple.dominant_ripple_amplitude:.4g}")
    except InsufficientSteadyState as exc:
        print(f"ripple metrics skipped: {exc}")
    print(f"wrote trace to {out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="drqft",
                                description="dual-rate loop analysis and robust design")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="stability verdict, margins, spec checks")
    a.add_argument("problem")
    a.add_argument("--json", help="write the full report to this path")
    a.add_argument("--t-end", type=float, default=None)
    a.add_argument("--substeps", type=int, default=8)
    a.add_argument("--grid-points", type=int, default=2048,
                   help="frequency samples for the stability curve")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("bounds", help="emit boundary JSON/CSV per design frequency")
    b.add_argument("problem")
    b.add_argument("--out", required=True)
    b.add_argument("--phase-step", type=float, default=None)
    b.set_defaults(func=cmd_bounds)

    s = sub.add_parser("simulate", help="closed-loop time response and ripple report")
    s.add_argument("problem")
    s.add_argument("--ref", help="step or sin:<omega0>")
    s.add_argument("--t-end", type=float, required=True)
    s.add_argument("--substeps", type=int, default=8)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("serve", help="run the JSON-over-HTTP service")
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--port", type=int, default=8008)
    v.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    warnings.filterwarnings("ignore", category=UserWarning, module="drqft")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
