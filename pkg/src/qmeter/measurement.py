"""Kraus-set statistics, retrodictive operators and measurement resolution.

A generalized measurement is a collection of operators {M_m}; outcome m
occurs with probability tr{rho M_m'M_m} and leaves the state as
M_m rho M_m' / p(m). Everything an outcome reveals about a uniformly
distributed eigenstate input is condensed into the retrodictive operator
R_m = M_m'M_m / tr{M_m'M_m}, a unit-trace positive matrix that behaves like
a density matrix read backwards in time: optimal input estimates are its
expectation values and the squared estimation errors are its variances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterator

import numpy as np

from .errors import (
    DimensionMismatch,
    InternalConsistencyError,
    InvalidState,
    UnknownOutcome,
    UnreachableOutcome,
    ZeroProbabilityOutcome,
)
from .operators import (
    HermitianObservable,
    as_complex_matrix,
    commutator,
    require_same_dim,
    require_square,
)

# Deviation allowed in || sum M'M - 1 ||_max for a set to count as complete.
COMPLETENESS_TOL = 1e-9

# Below this tr{M'M} an outcome never occurs and nothing can be retrodicted.
UNREACHABLE_TRACE_FLOOR = 1e-14

# Variances in [floor, 0) are rounding noise and clamp to zero; anything more
# negative means the computation itself went wrong.
NEGATIVE_VARIANCE_FLOOR = -1e-12

# Tolerances for accepting an input as a density matrix.
STATE_TOL = 1e-9

# Default slack tolerance when checking uncertainty products against bounds.
SLACK_TOL = 1e-10


def clamp_variance(value: float) -> float:
    """Zero out rounding-level negative variances, reject anything worse."""
    if value >= 0.0:
        return value
    if value >= NEGATIVE_VARIANCE_FLOOR:
        return 0.0
    raise InternalConsistencyError(f"variance {value:.3e} below clamp floor")


@dataclass(frozen=True)
class KrausSet:
    """Ordered collection of measurement operators with outcome labels.

    ``complete`` records intent: sets built for a single-outcome
    characterization may deliberately skip completeness (a "partial set").
    """

    operators: tuple[np.ndarray, ...]
    labels: tuple[Hashable, ...] = ()
    complete: bool = True

    def __post_init__(self):
        ops = tuple(
            require_square(as_complex_matrix(op, f"operator {i}"), f"operator {i}")
            for i, op in enumerate(self.operators)
        )
        if not ops:
            raise ValueError("a measurement needs at least one operator")
        dim = ops[0].shape[0]
        for i, op in enumerate(ops):
            if op.shape[0] != dim:
                raise DimensionMismatch(
                    f"operator {i} has dimension {op.shape[0]}, expected {dim}")
        labels = tuple(self.labels) if self.labels else tuple(range(len(ops)))
        if len(labels) != len(ops):
            raise ValueError(
                f"{len(labels)} labels for {len(ops)} operators")
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate outcome labels")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self) -> int:
        return len(self.operators)

    def items(self) -> Iterator[tuple[Hashable, np.ndarray]]:
        return iter(zip(self.labels, self.operators))

    def index(self, label: Hashable) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownOutcome(f"no outcome labeled {label!r}") from None

    def operator(self, label: Hashable) -> np.ndarray:
        return self.operators[self.index(label)]


@dataclass(frozen=True)
class CompletenessReport:
    max_deviation: float
    tolerance: float
    passed: bool


def completeness_deviation(kraus: KrausSet) -> float:
    """|| sum_m M_m'M_m - 1 ||_max."""
    total = np.zeros((kraus.dim, kraus.dim), dtype=np.complex128)
    for op in kraus.operators:
        total += op.conj().T @ op
    return float(np.max(np.abs(total - np.eye(kraus.dim))))


def validate_completeness(kraus: KrausSet, tol: float = COMPLETENESS_TOL) -> CompletenessReport:
    """Check that outcome probabilities sum to one for every input state."""
    deviation = completeness_deviation(kraus)
    return CompletenessReport(max_deviation=deviation, tolerance=tol,
                              passed=deviation <= tol)


def _check_density(rho, dim: int) -> np.ndarray:
    arr = require_square(as_complex_matrix(rho, "rho"), "rho")
    if arr.shape[0] != dim:
        raise DimensionMismatch(
            f"state has dimension {arr.shape[0]}, measurement has {dim}")
    if abs(np.trace(arr).real - 1.0) > STATE_TOL or abs(np.trace(arr).imag) > STATE_TOL:
        raise InvalidState(f"state trace {np.trace(arr):.6g} is not 1")
    if float(np.max(np.abs(arr - arr.conj().T))) > STATE_TOL:
        raise InvalidState("state is not Hermitian")
    min_eig = float(np.linalg.eigvalsh((arr + arr.conj().T) / 2.0)[0])
    if min_eig < -STATE_TOL:
        raise InvalidState(f"state has negative eigenvalue {min_eig:.3e}")
    return arr


def outcome_probability(kraus: KrausSet, rho, label: Hashable) -> float:
    """tr{rho M'M} for the requested outcome."""
    op = kraus.operator(label)
    arr = _check_density(rho, kraus.dim)
    return float(np.trace(arr @ op.conj().T @ op).real)


def post_measurement_state(kraus: KrausSet, rho, label: Hashable) -> np.ndarray:
    """State after outcome ``label``: M rho M' / p."""
    op = kraus.operator(label)
    arr = _check_density(rho, kraus.dim)
    prob = float(np.trace(arr @ op.conj().T @ op).real)
    if prob <= UNREACHABLE_TRACE_FLOOR:
        raise ZeroProbabilityOutcome(
            f"outcome {label!r} has probability {prob:.3e} for this input")
    out = op @ arr @ op.conj().T / prob
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class RetrodictiveOperator:
    """Normalized M'M: what one outcome implies about an unknown eigenstate input.

    ``total_weight`` keeps tr{M'M}; under a uniform eigenstate prior the
    outcome occurs with probability total_weight / dim.
    """

    matrix: np.ndarray
    source_outcome: Hashable = None
    total_weight: float = float("nan")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def expectation(self, observable) -> float:
        op = observable.matrix if isinstance(observable, HermitianObservable) else \
            as_complex_matrix(observable, "observable")
        require_same_dim(self.matrix, op)
        return float(np.trace(op @ self.matrix).real)

    def variance(self, observable) -> float:
        """tr{A^2 R} - tr{A R}^2, evaluated in mean-shifted form for stability."""
        op = observable.matrix if isinstance(observable, HermitianObservable) else \
            as_complex_matrix(observable, "observable")
        require_same_dim(self.matrix, op)
        mean = float(np.trace(op @ self.matrix).real)
        shifted = op - mean * np.eye(self.dim)
        return clamp_variance(float(np.trace(shifted @ self.matrix @ shifted).real))


def norm_trace(operator: np.ndarray) -> float:
    """tr{M'M} as a sum of squares (always >= 0 in floating point)."""
    return float(np.vdot(operator, operator).real)


def retrodictive_operator(operator, source_outcome: Hashable = None,
                          trace_floor: float = UNREACHABLE_TRACE_FLOOR) -> RetrodictiveOperator:
    """R = M'M / tr{M'M}; unit trace and positive by construction."""
    op = require_square(as_complex_matrix(operator, "M"), "M")
    weight = norm_trace(op)
    if weight < trace_floor:
        raise UnreachableOutcome(
            f"tr{{M'M}} = {weight:.3e} is below {trace_floor:.1e}; the outcome "
            "never occurs and there is nothing to retrodict")
    gram = op.conj().T @ op
    matrix = (gram + gram.conj().T) / (2.0 * weight)
    matrix.setflags(write=False)
    return RetrodictiveOperator(matrix=matrix, source_outcome=source_outcome,
                                total_weight=weight)


def conditional_input_distribution(operator, observable: HermitianObservable) -> dict[float, float]:
    """Probability of each eigenvalue of the observable given the outcome.

    Degenerate eigenvalues aggregate the probability of their whole
    eigenspace, which keeps the result independent of the arbitrary basis
    chosen inside it. Keys ascend; values sum to one.
    """
    retro = retrodictive_operator(operator)
    require_same_dim(retro.matrix, observable.matrix)
    dist: dict[float, float] = {}
    for value, indices in observable.eigenvalue_groups():
        vecs = observable.eigenvectors[:, indices]
        prob = float(np.einsum("ij,ik,kj->", vecs.conj(), retro.matrix, vecs).real)
        dist[value] = max(0.0, prob)
    return dist


@dataclass(frozen=True)
class EstimateReport:
    """Best eigenvalue estimate for one outcome and its mean squared error."""

    observable: str
    estimate: float
    error: float


def optimal_estimate(operator, observable: HermitianObservable) -> EstimateReport:
    """Error-minimizing estimate of the observable's input eigenvalue.

    The estimate is tr{A R}; its mean squared error over the uniform
    eigenstate ensemble is the variance of A under R.
    """
    retro = retrodictive_operator(operator)
    require_same_dim(retro.matrix, observable.matrix)
    return EstimateReport(
        observable=observable.name or "A",
        estimate=retro.expectation(observable),
        error=retro.variance(observable),
    )


def quadratic_error(operator, observable: HermitianObservable, assigned_value: float) -> float:
    """Mean squared error of announcing ``assigned_value`` for this outcome.

    Equals the optimal error plus the squared offset from the optimal
    estimate, so it is minimized exactly at tr{A R}.
    """
    retro = retrodictive_operator(operator)
    require_same_dim(retro.matrix, observable.matrix)
    shifted = observable.matrix - float(assigned_value) * np.eye(retro.dim)
    return clamp_variance(float(np.trace(shifted @ retro.matrix @ shifted).real))


@dataclass(frozen=True)
class PairCheck:
    """Joint-resolution uncertainty product for two observables on one outcome."""

    observable_a: str
    observable_b: str
    var_a: float
    var_b: float
    product: float
    bound: float
    slack: float
    satisfied: bool


def resolution_pair_check(operator, observable_a: HermitianObservable,
                          observable_b: HermitianObservable,
                          slack_tol: float = SLACK_TOL) -> PairCheck:
    """Check delta_A^2 * delta_B^2 >= |tr{R [A, B]}|^2 / 4 for one outcome."""
    retro = retrodictive_operator(operator)
    require_same_dim(retro.matrix, observable_a.matrix, observable_b.matrix)
    var_a = retro.variance(observable_a)
    var_b = retro.variance(observable_b)
    comm = commutator(observable_a.matrix, observable_b.matrix)
    bound = 0.25 * abs(np.trace(retro.matrix @ comm)) ** 2
    product = var_a * var_b
    slack = product - bound
    return PairCheck(
        observable_a=observable_a.name or "A",
        observable_b=observable_b.name or "B",
        var_a=var_a, var_b=var_b, product=product, bound=float(bound),
        slack=float(slack), satisfied=bool(slack >= -slack_tol),
    )
