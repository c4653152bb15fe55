"""qmeter: resolution and disturbance characterization of quantum measurements.

Characterizes arbitrary generalized measurements {M_m} on finite-dimensional
Hilbert spaces: optimal input-eigenvalue estimates and their errors
(resolution), the back-action damage to other observables (disturbance), the
uncertainty relations connecting both, and worked photon-counting, QND,
classical-teleportation, eavesdropping and cloning scenarios.
"""

__version__ = "0.1.0"

from .backaction import (
    ConditionalDisturbance,
    DecompositionReport,
    DisturbanceRecord,
    DisturbanceReport,
    JointEstimates,
    JointRetrodiction,
    ResolutionDisturbanceCheck,
    SequenceCheck,
    averaged_disturbance,
    conditional_disturbance,
    decomposition_check,
    joint_estimates,
    joint_retrodictions,
    joint_retrodictive_state,
    resolution_disturbance_check,
    sequence_uncertainty_check,
)
from .characterize import (
    CharacterizationReport,
    ObservableRow,
    OutcomeCharacterization,
    PairRow,
    characterize,
)
from .errors import (
    CompletenessUnachievable,
    DecompositionFailure,
    DimensionMismatch,
    IncompleteKrausSet,
    InternalConsistencyError,
    InvalidState,
    InvalidWeights,
    NonUnitState,
    NotHermitian,
    PreconditionViolated,
    QmeterError,
    SchemaError,
    TruncationError,
    UnknownObservable,
    UnknownOutcome,
    UnreachableOutcome,
    UnreachableSequence,
    ZeroProbabilityOutcome,
)
from .measurement import (
    CompletenessReport,
    EstimateReport,
    KrausSet,
    PairCheck,
    RetrodictiveOperator,
    conditional_input_distribution,
    optimal_estimate,
    outcome_probability,
    post_measurement_state,
    quadratic_error,
    resolution_pair_check,
    retrodictive_operator,
    validate_completeness,
)
from .mixture import MixtureCheck, MixtureComponent, mixture_bound_check
from .operators import (
    BosonicOperators,
    BosonicSpace,
    CoherentState,
    HermitianObservable,
    bosonic_operators,
    coherent_state,
    commutator,
    eigendecompose,
    named_observable,
)
from .scenarios import (
    CloningReport,
    EavesdropReport,
    ScenarioConfig,
    ScenarioReport,
    TeleportationCharacterization,
    classical_teleportation_preset,
    cloning_error,
    coherent_grid_completeness,
    eavesdrop_simulation,
    photon_detector_preset,
    qnd_preset,
    run_scenario,
)
from .verify import (
    VerificationReport,
    random_complete_kraus_set,
    random_hermitian,
    random_kraus_operator,
    run_verification_suite,
)
