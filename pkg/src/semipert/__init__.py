"""Perturbation estimates for positive matrix semigroups on weighted finite spaces."""

__version__ = "0.1.0"

from .errors import (
    DimensionError,
    EulerStepError,
    InvalidExponentError,
    InvalidKernelError,
    InvalidTimeError,
    PreconditionError,
    ResolventSetError,
    ScenarioError,
    SemipertError,
    UnsupportedError,
    ValidationError,
)
from .space import INF, LpElement, MeasureSpace, dual_exponent, dual_pairing, lp_norm
from .operators import (
    Generator,
    PositivityReport,
    euler_formula,
    growth_bound,
    positivity_check,
    resolvent_apply,
    semigroup_apply,
    semigroup_matrix,
    weighted_adjoint,
)
from .forms import (
    BilinearForm,
    JumpKernel,
    accretivity_check,
    assemble_jump_form,
    associated_generator,
    graph_laplacian_form,
    jump_generator_bound,
    jump_profiles,
    ouhabaz_l1_contractive,
    ouhabaz_linf_contractive,
    ouhabaz_positivity,
    perturbed_form,
)
from .estimates import (
    EstimateInstance,
    Verdict,
    check_generator_condition,
    check_resolvent_condition,
    check_semigroup_condition,
    check_strong_condition,
    minimal_C,
    resolvent_iteration_expansion,
)
