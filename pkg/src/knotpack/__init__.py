"""knotpack: knot invariants of polygonal space curves and certified
curvature inequalities."""

from .bounds import (
    BoundCertificate,
    assembled_constant,
    check_illumination,
    check_main_theorem,
    check_oscillation,
    check_packing,
    check_thickness_consequences,
)
from .curve import (
    SampledCurve,
    build_arc_table,
    load_curve,
    min_enclosing_ball,
    resample,
    save_curve,
    subdivide,
)
from .estimators import InvariantTransformer, MainTheoremCertifier
from .exceptions import CurveError, PreconditionError, SelfIntersectionError
from .generators import CurveSpec, make_curve
from .invariants import (
    InvariantReport,
    acn,
    compute_invariants,
    illumination,
    mobius_energy,
    near_far_split,
    projection_crossing_oracle,
    ropelength,
    thickness_info,
    thickness_radius,
    total_curvature,
    writhe,
)
from .shells import (
    LabelString,
    construct_extremal_string,
    count_jumps,
    estimate_shell_exponent,
    shell_labels,
    shell_profile,
    string_energy,
)

__version__ = "0.1.0"
