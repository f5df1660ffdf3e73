"""torusorbits: spectral search for 1-periodic orbits of Hamiltonian systems
on tori, with count-bound, index, and Morse-homology verification."""

from .action import (
    ActionReport,
    action_gradient,
    action_report,
    action_value,
    hamiltonian_integral,
    ode_residual,
    quadratic_action,
)
from .counting import (
    IntPolynomial,
    Verdict,
    adjudicate,
    cup_length_bound,
    target_polynomial,
    verify_morse_inequalities,
)
from .estimators import MorseHomology, OrbitFinder
from .hamiltonians import (
    ContractionFailure,
    GeneratingFunction,
    HamiltonianSystem,
    TrigTerm,
    builtin,
    certify,
    cosine_generating_function,
    from_trig_polynomial,
    generating_map,
)
from .homology import (
    FlowlineError,
    MorseComplex,
    NotMorseError,
    betti_numbers,
    build_morse_complex,
    count_flowlines,
    invariance_check,
    morse_critical_points,
)
from .indices import (
    DegenerateCriticalPoint,
    IndexRecord,
    autonomous_consistency,
    morse_index,
    positive_mode_dim,
)
from .loops import (
    FourierLoop,
    SplitLoop,
    analyze,
    band_part,
    basis_loop,
    constant_loop,
    evaluate,
    inner,
    l2_adjoint,
    norm,
    split,
    zero_loop,
)
from .reduction import (
    ReducedPoint,
    ReductionContext,
    build_context,
    choose_inner_order,
    reduced,
    solve_fiber,
    trapping_radius,
)
from .search import (
    ForcedOscillation,
    SearchReport,
    monodromy,
    multistart_newton,
    verify_fixed_point,
)

__version__ = "0.1.0"
