"""widthcert: certified width, content, separator and systole computations
on finite metric spaces."""

__version__ = "0.1.0"

from .spaces import (
    DiscreteSpace,
    SpaceFormatError,
    annulus,
    ball,
    components,
    dump_space,
    from_graph,
    from_point_set,
    load_space,
    radius,
    shell,
    space_document,
    space_from_document,
)
from .content import (
    BudgetExceeded,
    ContentEstimate,
    Covering,
    GapNotCertified,
    content_exact,
    content_greedy,
    content_lower_bound,
    content_upper,
    optimal_covering,
)
from .coarea import CoareaSelection, IntervalTooNarrow, select_shell
from .separators import (
    AmbiguousContent,
    HypothesisViolation,
    LemmaParameters,
    PreconditionFailed,
    SeparatorCertificate,
    StepBudgetExceeded,
    is_separating,
    lemma_parameters,
    minimize_separator,
    replacement_step,
)
from .width import (
    Cover,
    CoverConstructionError,
    NerveComplex,
    WidthCertificate,
    bound_width,
    exact_width_small,
    extend_cover,
    make_cover,
    multiplicity_one_cover,
    nerve,
    urysohn_width_bound,
)
from .topology import (
    CycleWitness,
    InequalityViolation,
    ThresholdReport,
    TreeReport,
    ball_length,
    ball_length_table,
    ball_length_criterion,
    check_systole_vs_width,
    girth,
    homology_systole_z2,
    systole,
    tree_report,
)
from .check import (
    validate_cover,
    validate_separator_certificate,
    validate_width_certificate,
)
from .generators import generate
from .harness import append_report, automatic_radius, space_hash, verify_instance
