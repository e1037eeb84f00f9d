"""Robust dual-rate control analysis and design in the frequency domain.

Core objects: polynomial/rational-function arithmetic (``lti``),
discretization and lifting (``sampling``), closed-loop spectra
(``spectra``), Nyquist-like stability assessment (``stability``),
robust-design boundary computation (``bounds``), exact time-domain
simulation (``simulate``), and a problem-file/CLI/HTTP service layer
(``problems``, ``cli``, ``service``).
"""
from .lti import (
    ImproperTF,
    LTIError,
    PoleProximity,
    Polynomial,
    RationalTF,
    SampleTimeMismatch,
    StateSpace,
    compose,
    dc_gain,
    to_state_space,
)
from .sampling import (
    DualRateTiming,
    NonConvergence,
    ReferenceSignal,
    StarredTransform,
    UnsupportedMultiplicity,
    hold_response,
    lift_downsample,
    p_l_frequency_sum,
    reference_ratio,
    starred_transform,
    upsampler_response,
    zoh_discretize,
)
from .spectra import (
    DeltaSupport,
    DualRateLoop,
    HarmonicResponse,
    SingularLoop,
    ZeroReferenceSpectrum,
    comp_sensitivity,
    continuous_sensitivity,
    harmonic_response,
    make_loop,
    output_spectrum,
    output_spectrum_sampled,
    s_l,
)
from .stability import (
    AssumptionReport,
    NicholsCurve,
    OnCirclePole,
    StabilityVerdict,
    TangentialCrossing,
    assess,
    check_assumptions,
    closed_loop_poles,
    count_crossings,
    margins,
    nichols_curve,
    worst_case_margins,
)
from .bounds import (
    Boundary,
    DesignReport,
    LiftedFamily,
    PlantFamily,
    SpecSet,
    StabilityHypothesisUnchecked,
    Template,
    build_template,
    ctrack_boundary,
    dtrack_boundary,
    fold,
    stability_boundary,
    validate_design,
    worst_case_boundary,
)
from .simulate import (
    InsufficientSteadyState,
    NonPositiveInertia,
    RippleReport,
    SimTrace,
    ripple_metrics,
    rwip_plant,
    simulate,
)

__version__ = "0.1.0"
