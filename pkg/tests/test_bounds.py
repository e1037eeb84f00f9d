"""Templates, boundary curves, folding, design validation."""
import cmath
import math

import numpy as np
import pytest

from drqft import (
    RationalTF,
    ReferenceSignal,
    compose,
    ctrack_boundary,
    dtrack_boundary,
    fold,
    stability_boundary,
    validate_design,
    worst_case_boundary,
    zoh_discretize,
)
from drqft.bounds import (
    LiftedFamily,
    MarginConstraint,
    PlantFamily,
    RatioConstraint,
    SpecSet,
    StabilityHypothesisUnchecked,
    build_template,
)

from conftest import bench_plant


NYQ = math.pi / 0.4


@pytest.fixture(scope="module")
def ex_family(g_fast_mod, bench_timing_mod):
    fam = PlantFamily(
        lambda p: bench_plant(p[0]),
        [(a,) for a in np.linspace(0.5, 2.5, 21)],
        nominal_index=10,
    )
    return LiftedFamily.build(fam, g_fast_mod, bench_timing_mod)


@pytest.fixture(scope="module")
def bench_timing_mod():
    from drqft import DualRateTiming

    return DualRateTiming(Ts=0.4, N=3)


@pytest.fixture(scope="module")
def g_fast_mod(bench_timing_mod):
    from conftest import GR_DEN, GR_NUM

    return RationalTF(GR_NUM, GR_DEN, bench_timing_mod.Tf)


def test_template_single_member_is_unity(bench_family_single):
    t = build_template(bench_family_single, 2.0)
    assert t.delta_l == (1.0 + 0.0j,)
    # delta is the continuous ratio: P * G_R / P_L0
    lf = bench_family_single
    want = (
        bench_plant().at_frequency(2.0)
        * lf.g_fast(cmath.exp(2.0j * lf.timing.Tf))
        / lf.nominal_lifted().at_frequency(2.0)
    )
    assert t.delta[0] == pytest.approx(want, rel=1e-12)


def test_template_gain_only_family(rwip_family):
    ratios = np.linspace(290.0 / 3, 290.0, 5) / 290.0
    for w in (5.0, 80.0, 250.0):
        dl = rwip_family.delta_l(w)
        assert np.allclose(dl, ratios, atol=1e-9)


def test_template_parameter_spread_breaks_margin(ex_family):
    """The wide-parameter members violate the 0.5 margin circle near Nyquist."""
    L0 = compose(
        RationalTF(
            __import__("conftest").GL_NUM, __import__("conftest").GL_DEN, 0.4
        ),
        ex_family.nominal_lifted(),
        "series",
    )
    t = build_template(ex_family, NYQ)
    x = L0.at_frequency(NYQ)
    dist = [abs(1 + x * d) for d in t.delta_l]
    assert min(dist) < 0.5      # the a = 2.5 end enters the forbidden region
    assert abs(1 + x) > 0.5     # while the nominal member stays out


def test_stability_boundary_forbidden_band_at_180(bench_family_single):
    t = build_template(bench_family_single, 2.0)
    b = stability_boundary(t, 0.5, phase_grid=[-180.0])
    ivs = b.allowed[0]
    # allowed: below 1-mu and above 1+mu
    lo_db = 20 * math.log10(0.5)
    hi_db = 20 * math.log10(1.5)
    assert len(ivs) == 2
    assert ivs[0][1] == pytest.approx(lo_db, abs=1e-9)
    assert ivs[1][0] == pytest.approx(hi_db, abs=1e-9)
    assert not b.allows(-180.0, 0.0)
    assert b.allows(-180.0, lo_db - 0.5)
    assert b.allows(-180.0, hi_db + 0.5)


def test_stability_boundary_identical_across_frequency_for_gain_only(rwip_family):
    mu = 1 / math.sqrt(2)
    grid = np.arange(-360.0, 0.5, 5.0)
    b1 = stability_boundary(build_template(rwip_family, 10.0), mu, grid)
    b2 = stability_boundary(build_template(rwip_family, 200.0), mu, grid)
    # equality at 1e-9 relative to the 160 dB representation span
    tol = 1e-9 * 160.0
    for r1, r2 in zip(b1.allowed, b2.allowed):
        assert len(r1) == len(r2)
        for (a1, z1), (a2, z2) in zip(r1, r2):
            assert a1 == pytest.approx(a2, abs=tol)
            assert z1 == pytest.approx(z2, abs=tol)


def test_dtrack_threshold_one_equals_margin_constraint(bench_family_single, prefilter):
    """delta1 = |F_L| makes the tracking bound a unit margin circle."""
    f_l = zoh_discretize(prefilter, 0.4)
    w = 3.0
    t = build_template(bench_family_single, w)
    b = dtrack_boundary(t, abs(f_l.at_frequency(w)), f_l, w, phase_grid=[-200.0, -180.0, -120.0])
    ref = MarginConstraint(deltas=t.delta_l, threshold=1.0)
    for phase, row in zip(b.phase_grid, b.allowed):
        want = ref.intervals(math.radians(phase))
        got = [(10 ** (a / 20), 10 ** (z / 20)) for a, z in row]
        assert len(got) == len([iv for iv in want if iv[0] < 1e4])


def test_fold_identity_below_nyquist():
    for frac in (0.0, 0.2, 0.77, 1.0):
        w, conj = fold(frac * NYQ, 0.4)
        assert w == pytest.approx(frac * NYQ)
        assert conj is False


def test_fold_published_set():
    source = [2.5, 2.75, 3.0, 3.8, 5.0, 8.9]
    want = [0.5, 0.75, 1.0, 0.2, 1.0, 0.9]
    want_conj = [False, False, False, True, False, False]
    for s, w, c in zip(source, want, want_conj):
        wd, conj = fold(s * NYQ, 0.4)
        assert wd == pytest.approx(w * NYQ, rel=1e-12)
        assert conj is c


def test_fold_band_edges():
    wd, conj = fold(2 * NYQ, 0.4)
    assert wd == pytest.approx(0.0, abs=1e-12)
    assert conj is False
    wd, conj = fold(NYQ, 0.4)
    assert wd == pytest.approx(NYQ)
    assert conj is False


def test_fold_involution_and_alias_classes():
    """fold is idempotent, and every alias k*2pi/Ts +/- w folds to w."""
    rng = np.random.default_rng(31)
    Ts = 0.4
    for _ in range(200):
        w = rng.uniform(0.0, NYQ)
        wd, _ = fold(w, Ts)
        assert wd == pytest.approx(w, abs=1e-12)  # idempotent on the base band
        k = rng.integers(0, 6)
        for alias in (k * 2 * NYQ + w, (k + 1) * 2 * NYQ - w):
            wa, _ = fold(alias, Ts)
            assert wa == pytest.approx(w, abs=1e-9)


def test_ctrack_degenerate_reference_term(bench_family_single, bench_timing_mod):
    """A sine at the Nyquist rate samples to zero: the cross term drops out
    and the bound degenerates to gamma >= 1 (all gains) or infeasible."""
    ref = ReferenceSignal("sinusoid", frequency=NYQ)
    one = RationalTF.constant(1.0)
    one_d = RationalTF.constant(1.0, bench_timing_mod.Ts)
    grid = [-300.0, -180.0, -60.0]
    loose = ctrack_boundary(
        bench_family_single, 1.5, one, one_d, ref, 0.3 * NYQ, grid,
        stability_checked=True,
    )
    tight = ctrack_boundary(
        bench_family_single, 0.6, one, one_d, ref, 0.3 * NYQ, grid,
        stability_checked=True,
    )
    for row in loose.allowed:
        assert row and row[0][0] <= -80.0 + 1e-9 and row[-1][1] >= 80.0 - 1e-9
    for row in tight.allowed:
        assert row == ()


def test_ctrack_huge_delta2_imposes_nothing(bench_family_single, prefilter, bench_timing_mod):
    ref = ReferenceSignal("step")
    f_l = zoh_discretize(prefilter, bench_timing_mod.Ts)
    b = ctrack_boundary(
        bench_family_single, 1e9, prefilter, f_l, ref, 0.4 * NYQ,
        phase_grid=[-340.0, -180.0, -20.0], stability_checked=True,
    )
    for row in b.allowed:
        assert row and row[0][0] <= -80.0 + 1e-9 and row[-1][1] >= 80.0 - 1e-9


def test_ctrack_warns_without_stability_check(bench_family_single, prefilter, bench_timing_mod):
    ref = ReferenceSignal("step")
    f_l = zoh_discretize(prefilter, bench_timing_mod.Ts)
    with pytest.warns(StabilityHypothesisUnchecked):
        ctrack_boundary(
            bench_family_single, 1.0, prefilter, f_l, ref, 0.4 * NYQ,
            phase_grid=[-180.0],
        )


def _ex9_boundaries(lifted, prefilter_c, prefilter_d, grid=None):
    ref = ReferenceSignal("step")

    def delta2(w):
        return w if w <= NYQ * (1 + 1e-12) else 1.0

    fracs = [0.01, 0.03, 0.1, 0.3, 0.5, 0.7, 1.0, 2.5, 2.75, 3.0, 3.8, 5.0, 8.9]
    return [
        ctrack_boundary(
            lifted, delta2(f * NYQ), prefilter_c, prefilter_d, ref, f * NYQ,
            phase_grid=grid, stability_checked=True,
        )
        for f in fracs
    ]


def test_tracking_redesign_regression(
    bench_family_single, g_slow, notched_g_slow, prefilter, bench_timing_mod
):
    """Original design violates exactly the folded ripple-frequency bound;
    the notch redesign satisfies every bound."""
    f_l = zoh_discretize(prefilter, bench_timing_mod.Ts)
    boundaries = _ex9_boundaries(bench_family_single, prefilter, f_l)
    L0 = compose(g_slow, bench_family_single.nominal_lifted(), "series")
    L0n = compose(notched_g_slow, bench_family_single.nominal_lifted(), "series")
    rep = validate_design(L0, boundaries)
    failing = [r.index for r in rep.failing()]
    assert failing == [10]
    assert rep.boundary_results[9].violation_db > 0.5
    rep_n = validate_design(L0n, boundaries)
    assert rep_n.passed
    assert not rep_n.failing()


def test_folded_boundary_matches_direct_error_ratio(
    bench_family_single, g_slow, notched_g_slow, prefilter, bench_timing_mod
):
    """Boundary membership at the folded design point equals the direct
    worst-member error-ratio test at the source frequency, for straight
    and mirrored bands alike."""
    from drqft.bounds import _worst_member_er

    f_l = zoh_discretize(prefilter, bench_timing_mod.Ts)
    ref = ReferenceSignal("step")

    def delta2(w):
        return w if w <= NYQ * (1 + 1e-12) else 1.0

    for g in (g_slow, notched_g_slow):
        L0 = compose(g, bench_family_single.nominal_lifted(), "series")
        for frac in (0.3, 1.0, 2.5, 2.75, 3.0, 3.8, 5.0, 8.9):
            w_src = frac * NYQ
            # membership is evaluated from the constraint, so a single-point
            # phase grid keeps construction cheap
            b = ctrack_boundary(
                bench_family_single, delta2(w_src), prefilter, f_l, ref, w_src,
                phase_grid=[-180.0], stability_checked=True,
            )
            via_boundary = b.allows_value(L0.at_frequency(b.omega_design))
            direct = _worst_member_er(
                L0, bench_family_single, prefilter, f_l, ref, w_src
            ) <= delta2(w_src)
            assert via_boundary == direct, f"mismatch at {frac} * nyquist"


def test_worst_case_boundary_reduces_to_binding_bound(
    bench_family_single, g_slow, prefilter, bench_timing_mod
):
    f_l = zoh_discretize(prefilter, bench_timing_mod.Ts)
    boundaries = _ex9_boundaries(bench_family_single, prefilter, f_l)
    at_nyq = [b for b in boundaries if math.isclose(b.omega_design, NYQ, rel_tol=1e-9)]
    assert len(at_nyq) == 3  # sources at 1, 3 and 5 times the Nyquist rate
    wc = worst_case_boundary(at_nyq)
    L0 = compose(g_slow, bench_family_single.nominal_lifted(), "series")
    val = L0.at_frequency(NYQ)
    # only the ripple-frequency bound is binding at this design point
    verdicts = [b.allows_value(val) for b in at_nyq]
    assert verdicts.count(False) == 1
    assert not wc.allows_value(val)
    # intersection equals the binding bound wherever the others are looser
    binding = at_nyq[[not v for v in verdicts].index(True)]
    for i in range(len(wc.phase_grid)):
        for iv in wc.allowed[i]:
            mid = 0.5 * (iv[0] + iv[1])
            assert binding.allows(wc.phase_grid[i], mid)


def test_worst_case_single_boundary_is_identity(bench_family_single):
    t = build_template(bench_family_single, 1.0)
    b = stability_boundary(t, 0.5)
    assert worst_case_boundary([b]) is b


def test_worst_case_disjoint_allowed_sets(bench_family_single):
    t = build_template(bench_family_single, 1.0)
    grid = [-180.0]
    lo = stability_boundary(t, 0.5, grid)
    # a fabricated companion allowing only inside the other's forbidden band
    from drqft.bounds import Boundary

    mid = Boundary(
        omega_design=lo.omega_design,
        omega_source=lo.omega_source,
        kind="stability",
        conjugated=False,
        phase_grid=lo.phase_grid,
        allowed=(((-5.0, 2.0),),),
        orientation="inside",
        constraint=lo.constraint,
    )
    wc = worst_case_boundary([lo, mid])
    assert wc.allowed[0] == ()


def test_quadratic_membership_equivalence():
    """Interval solutions agree with direct inequality evaluation."""
    rng = np.random.default_rng(99)
    buffer_db = 1e-9
    trials = 0
    disagreements = 0
    while trials < 3_000:
        phase = rng.uniform(-360.0, 0.0)
        gain_db = rng.uniform(-60.0, 60.0)
        g = 10 ** (gain_db / 20)
        x = g * cmath.exp(1j * math.radians(phase))
        if rng.random() < 0.5:
            deltas = tuple(
                complex(rng.normal(), rng.normal()) for _ in range(rng.integers(1, 4))
            )
            con = MarginConstraint(deltas=deltas, threshold=rng.uniform(0.1, 0.95))
        else:
            n = rng.integers(1, 4)
            con = RatioConstraint(
                a_values=tuple(complex(rng.normal(), rng.normal()) for _ in range(n)),
                d_values=tuple(complex(rng.normal(), rng.normal()) for _ in range(n)),
                gamma=rng.uniform(0.2, 3.0),
            )
        direct = con.satisfied(x)
        ivs = con.intervals(math.radians(phase))
        member = any(a - 1e-12 <= g <= b + 1e-12 for a, b in ivs)
        if direct != member:
            # tolerate endpoint grazing within the dB buffer
            near_edge = any(
                abs(gain_db - 20 * math.log10(max(edge, 1e-300))) < buffer_db
                for a, b in ivs
                for edge in (a, b)
                if math.isfinite(edge) and edge > 0
            )
            if not near_edge:
                disagreements += 1
        trials += 1
    assert disagreements == 0


def test_boundary_monotone_in_margin(bench_family_single):
    t = build_template(bench_family_single, 2.0)
    grid = np.arange(-360.0, 0.5, 7.5)
    rows = [stability_boundary(t, mu, grid).allowed for mu in (0.3, 0.5, 0.7)]
    rng = np.random.default_rng(17)
    for i in range(len(grid)):
        for _ in range(20):
            gain = rng.uniform(-75, 75)
            ok = [
                any(a <= gain <= b for a, b in rows_k[i]) for rows_k in rows
            ]
            # allowed set shrinks as mu grows
            assert not (ok[1] and not ok[0])
            assert not (ok[2] and not ok[1])


def test_validate_design_empty_boundaries(g_slow, bench_family_single):
    L0 = compose(g_slow, bench_family_single.nominal_lifted(), "series")
    rep = validate_design(L0, [])
    assert rep.passed


def test_validate_design_sweeps(bench_family_single, g_slow, prefilter, bench_timing_mod):
    f_l = zoh_discretize(prefilter, bench_timing_mod.Ts)
    specs = SpecSet(
        mu=0.5,
        delta1=lambda w: w,
        delta2=lambda w: w if w <= NYQ else 1.0,
        reference=ReferenceSignal("step"),
    )
    L0 = compose(g_slow, bench_family_single.nominal_lifted(), "series")
    rep = validate_design(
        L0, [], bench_family_single, specs,
        prefilter_c=prefilter, prefilter_d=f_l, sweep_points=150,
    )
    names = {s.name for s in rep.sweeps}
    assert names == {"sampled_sensitivity", "continuous_tracking"}
    sl = next(s for s in rep.sweeps if s.name == "sampled_sensitivity")
    assert sl.passed
    ct = next(s for s in rep.sweeps if s.name == "continuous_tracking")
    assert not ct.passed  # the un-notched design violates the tracking bound
    assert ct.worst_omega == pytest.approx(3 * NYQ, rel=0.05)


def test_boundary_json_and_csv(bench_family_single):
    t = build_template(bench_family_single, 2.0)
    b = stability_boundary(t, 0.5, phase_grid=[-200.0, -180.0])
    obj = b.to_json()
    assert obj["kind"] == "stability"
    assert len(obj["phases"]) == 2
    csv = b.to_csv()
    assert csv.splitlines()[0] == "phase_deg,interval,lo_db,hi_db"


def test_family_pole_structure_validation():
    fam = PlantFamily(
        lambda p: RationalTF([1.0], [1.0, -p[0]]),
        [(-1.0,), (1.0,)],  # one stable, one unstable member
        0,
    )
    assert not fam.validate_pole_structure()
