"""torusflux: flux geometry and Hofer-like length experiments on flat tori."""

from .torus import (
    CohomologyClass,
    FlatTorus,
    FluxClass,
    IntegrationError,
    InversionError,
    OneForm,
    PeriodicInterp,
    eval_spectral,
    harmonic_norm,
    hodge_decompose,
    integrate,
    integrate_form_along_path,
    line_integral,
    minimal_geodesic,
    osc,
    poincare_pair,
    sup_norm,
    torus_displacement,
    torus_distance,
    wrap,
)
from .flows import (
    ConservativityReport,
    GeneratorPair,
    GridMap,
    Isotopy,
    TimeField,
    c0_distance,
    compose_pointwise,
    constant_field,
    flow,
    flow_tolerance,
    generator_of,
    generator_residual,
    hamiltonian_field,
    harmonic_field,
    harmonic_isotopy,
    identity_isotopy,
    inverse,
    velocity,
    verify_conservative,
)

__version__ = "0.1.0"
