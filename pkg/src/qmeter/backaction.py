"""Back action of a measurement on a subsequently measured observable.

The sequence "outcome m, then a projective measurement of B with result B_f"
retrodicts the input as the unit vector r_mf proportional to M'|B_f>. Its
statistics split the damage done to B into a random part (the variance of B
in r_mf) and a systematic shift (B_f minus the best estimate of the input
value). Averaging over final results with the weights w_m(B_f) reproduces the
single-outcome retrodictive operator and yields the averaged disturbance,
which obeys the same commutator-type uncertainty bound as the resolutions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InternalConsistencyError,
    UnreachableOutcome,
    UnreachableSequence,
)
from .measurement import (
    SLACK_TOL,
    UNREACHABLE_TRACE_FLOOR,
    clamp_variance,
    norm_trace,
    retrodictive_operator,
)
from .operators import (
    HermitianObservable,
    as_complex_matrix,
    commutator,
    require_same_dim,
    require_square,
)

# Final outcomes whose weight w_m(B_f) falls below this floor are dropped from
# averages (their exact weight is a rounding-level zero) and rejected when
# queried directly.
WEIGHT_FLOOR = 1e-14

# Absolute tolerance on redundant evaluations of the same quantity.
IDENTITY_TOL = 1e-10


@dataclass(frozen=True)
class JointRetrodiction:
    """Best inference about the input after outcome m and final result B_f."""

    final_value: float
    state: np.ndarray
    weight: float
    eigen_index: int


def _prepare(operator, observable: HermitianObservable) -> tuple[np.ndarray, float]:
    op = require_square(as_complex_matrix(operator, "M"), "M")
    require_same_dim(op, observable.matrix)
    weight = norm_trace(op)
    if weight < UNREACHABLE_TRACE_FLOOR:
        raise UnreachableOutcome(
            f"tr{{M'M}} = {weight:.3e}; the outcome never occurs")
    return op, weight


def joint_retrodictions(operator, observable: HermitianObservable) -> list[JointRetrodiction]:
    """All reachable joint retrodictions, ascending in eigen-index.

    Final outcomes with rounding-level weight are omitted; the remaining
    weights sum to one up to the dropped mass.
    """
    op, total = _prepare(operator, observable)
    adj = op.conj().T
    out = []
    for f in range(observable.dim):
        u = adj @ observable.eigenvectors[:, f]
        q = float(np.vdot(u, u).real)
        weight = q / total
        if weight < WEIGHT_FLOOR:
            continue
        state = u / np.sqrt(q)
        state.setflags(write=False)
        out.append(JointRetrodiction(
            final_value=float(observable.eigenvalues[f]),
            state=state, weight=weight, eigen_index=f))
    return out


def joint_retrodictive_state(operator, observable: HermitianObservable,
                             eigen_index: int) -> JointRetrodiction:
    """Joint retrodiction for one final eigenvector of the observable."""
    op, total = _prepare(operator, observable)
    f = int(eigen_index)
    if not 0 <= f < observable.dim:
        raise IndexError(f"eigen-index {f} out of range for dim {observable.dim}")
    u = op.conj().T @ observable.eigenvectors[:, f]
    q = float(np.vdot(u, u).real)
    weight = q / total
    if weight < WEIGHT_FLOOR:
        raise UnreachableSequence(
            f"final result {observable.eigenvalues[f]:.6g} never follows this "
            f"outcome (weight {weight:.3e})")
    state = u / np.sqrt(q)
    state.setflags(write=False)
    return JointRetrodiction(final_value=float(observable.eigenvalues[f]),
                             state=state, weight=weight, eigen_index=f)


def _mean_and_var(state: np.ndarray, matrix: np.ndarray) -> tuple[float, float]:
    """First moment and central variance of a Hermitian matrix in a pure state."""
    mean = float(np.vdot(state, matrix @ state).real)
    shifted = matrix @ state - mean * state
    return mean, float(np.vdot(shifted, shifted).real)


@dataclass(frozen=True)
class JointEstimates:
    """Optimal estimates of both observables given outcome m and final result B_f."""

    estimate_a: float
    estimate_b: float
    var_a: float
    var_b: float


def joint_estimates(retro: JointRetrodiction, observable_a: HermitianObservable,
                    observable_b: HermitianObservable) -> JointEstimates:
    require_same_dim(observable_a.matrix, observable_b.matrix)
    if observable_a.dim != retro.state.shape[0]:
        raise DimensionMismatch(
            f"observables have dimension {observable_a.dim}, "
            f"retrodicted state has {retro.state.shape[0]}")
    mean_a, var_a = _mean_and_var(retro.state, observable_a.matrix)
    mean_b, var_b = _mean_and_var(retro.state, observable_b.matrix)
    return JointEstimates(estimate_a=mean_a, estimate_b=mean_b,
                          var_a=var_a, var_b=var_b)


@dataclass(frozen=True)
class ConditionalDisturbance:
    """Damage to the observable for one (outcome, final result) sequence.

    total = random + systematic: the variance of B in the retrodicted state
    plus the squared shift between the final value and the best input estimate.
    """

    final_value: float
    estimate: float
    total: float
    random: float
    systematic: float


def _disturbance_parts(retro: JointRetrodiction,
                       matrix: np.ndarray) -> ConditionalDisturbance:
    mean, var = _mean_and_var(retro.state, matrix)
    shifted = matrix @ retro.state - retro.final_value * retro.state
    total = float(np.vdot(shifted, shifted).real)
    systematic = (retro.final_value - mean) ** 2
    if abs(total - (var + systematic)) > IDENTITY_TOL * max(1.0, abs(total)):
        raise InternalConsistencyError(
            f"disturbance split {var + systematic:.12e} != total {total:.12e}")
    return ConditionalDisturbance(final_value=retro.final_value, estimate=mean,
                                  total=total, random=var, systematic=systematic)


def conditional_disturbance(operator, observable: HermitianObservable,
                            eigen_index: int) -> ConditionalDisturbance:
    """<r_mf|(B_f - B)^2|r_mf> split into random and systematic parts."""
    retro = joint_retrodictive_state(operator, observable, eigen_index)
    return _disturbance_parts(retro, observable.matrix)


@dataclass(frozen=True)
class DisturbanceRecord:
    """Per-final-eigenvalue disturbance entry (degenerate values merged)."""

    final_value: float
    weight: float
    total: float
    random: float
    systematic: float


@dataclass(frozen=True)
class DisturbanceReport:
    """Averaged disturbance of one observable caused by one outcome.

    ``value`` is the double eigenbasis sum of |<B_f|M|B_i>|^2 (B_f - B_i)^2
    over tr{M'M}; ``trace_form`` is the equivalent closed form
    (tr{M'B^2M} + tr{B^2M'M} - 2 tr{M'BMB}) / tr{M'M}, kept as a cross-check.
    """

    observable: str
    value: float
    trace_form: float
    records: tuple[DisturbanceRecord, ...]

    @property
    def consistency_error(self) -> float:
        return abs(self.value - self.trace_form)


def averaged_disturbance(operator, observable: HermitianObservable,
                         identity_tol: float = IDENTITY_TOL) -> DisturbanceReport:
    """Average squared change of the observable over all inputs and final results."""
    op, total = _prepare(operator, observable)
    vals = observable.eigenvalues
    vecs = observable.eigenvectors

    sandwich = vecs.conj().T @ op @ vecs          # <B_f|M|B_i>
    weights2 = np.abs(sandwich) ** 2
    gaps2 = (vals[:, None] - vals[None, :]) ** 2  # (B_f - B_i)^2
    eigensum = float(np.sum(weights2 * gaps2)) / total

    b = observable.matrix
    b2 = b @ b
    adj = op.conj().T
    trace_form = float((np.trace(adj @ b2 @ op) + np.trace(b2 @ adj @ op)
                        - 2.0 * np.trace(adj @ b @ op @ b)).real) / total
    trace_form = max(0.0, trace_form)
    # absolute below unit scale, relative above (double precision cannot hold
    # an absolute 1e-10 on quantities of order 1e6)
    if abs(eigensum - trace_form) > identity_tol * max(1.0, eigensum):
        raise InternalConsistencyError(
            f"disturbance eigenbasis sum {eigensum:.12e} and trace form "
            f"{trace_form:.12e} disagree")

    joints = joint_retrodictions(operator, observable)
    by_index = {j.eigen_index: j for j in joints}
    records = []
    for value, indices in observable.eigenvalue_groups():
        members = [by_index[i] for i in indices if i in by_index]
        group_w = sum(j.weight for j in members)
        if group_w <= 0.0:
            continue
        mu1 = 0.0
        mu2 = 0.0
        for j in members:
            mean, var = _mean_and_var(j.state, b)
            mu1 += j.weight / group_w * mean
            mu2 += j.weight / group_w * (var + mean ** 2)
        random_part = clamp_variance(mu2 - mu1 ** 2)
        systematic = (value - mu1) ** 2
        records.append(DisturbanceRecord(
            final_value=value, weight=group_w,
            total=random_part + systematic,
            random=random_part, systematic=systematic))
    return DisturbanceReport(observable=observable.name or "B",
                             value=eigensum, trace_form=trace_form,
                             records=tuple(records))


@dataclass(frozen=True)
class DecompositionReport:
    """Consistency of the final-result decomposition of one outcome.

    The weighted joint retrodictions must reassemble the retrodictive
    operator, and the resolution must exceed the weighted average of the
    sequence resolutions by exactly the spread of the sequence estimates.
    """

    reconstruction_error: float
    resolution: float
    averaged_resolution: float
    gap: float
    estimate_spread: float

    @property
    def gap_error(self) -> float:
        return abs(self.gap - self.estimate_spread)


def decomposition_check(operator, observable_a: HermitianObservable,
                        observable_b: HermitianObservable) -> DecompositionReport:
    """Verify R_m = sum_f w_m(B_f) |r_mf><r_mf| and the resolution averaging."""
    retro = retrodictive_operator(operator)
    require_same_dim(retro.matrix, observable_a.matrix, observable_b.matrix)
    joints = joint_retrodictions(operator, observable_b)

    recon = np.zeros_like(retro.matrix)
    for j in joints:
        recon = recon + j.weight * np.outer(j.state, j.state.conj())
    reconstruction_error = float(np.max(np.abs(recon - retro.matrix)))

    estimate = retro.expectation(observable_a)
    resolution = retro.variance(observable_a)
    averaged = 0.0
    spread = 0.0
    for j in joints:
        mean, var = _mean_and_var(j.state, observable_a.matrix)
        averaged += j.weight * var
        spread += j.weight * (mean - estimate) ** 2
    return DecompositionReport(
        reconstruction_error=reconstruction_error,
        resolution=resolution,
        averaged_resolution=averaged,
        gap=resolution - averaged,
        estimate_spread=spread,
    )


@dataclass(frozen=True)
class SequenceCheck:
    """Uncertainty products for one (outcome, final result) sequence.

    Both the product of the two sequence resolutions and the product of the
    A-resolution with the B-disturbance must stay above the commutator bound
    evaluated in the retrodicted state.
    """

    final_value: float
    var_a: float
    var_b: float
    disturbance: float
    bound: float
    resolution_product: float
    disturbance_product: float
    resolution_slack: float
    disturbance_slack: float
    satisfied: bool


def sequence_uncertainty_check(operator, observable_a: HermitianObservable,
                               observable_b: HermitianObservable, eigen_index: int,
                               slack_tol: float = SLACK_TOL) -> SequenceCheck:
    require_same_dim(observable_a.matrix, observable_b.matrix)
    retro = joint_retrodictive_state(operator, observable_b, eigen_index)
    est = joint_estimates(retro, observable_a, observable_b)
    dist = _disturbance_parts(retro, observable_b.matrix)
    comm = commutator(observable_a.matrix, observable_b.matrix)
    bound = 0.25 * abs(np.vdot(retro.state, comm @ retro.state)) ** 2
    res_product = est.var_a * est.var_b
    dist_product = est.var_a * dist.total
    res_slack = res_product - bound
    dist_slack = dist_product - bound
    return SequenceCheck(
        final_value=retro.final_value,
        var_a=est.var_a, var_b=est.var_b, disturbance=dist.total,
        bound=float(bound),
        resolution_product=res_product, disturbance_product=dist_product,
        resolution_slack=float(res_slack), disturbance_slack=float(dist_slack),
        satisfied=bool(res_slack >= -slack_tol and dist_slack >= -slack_tol),
    )


@dataclass(frozen=True)
class ResolutionDisturbanceCheck:
    """Resolution-disturbance uncertainty for one outcome.

    ``averaged_bound`` is the tighter intermediate bound obtained by averaging
    |<r_mf|[A,B]|r_mf>| over final results before squaring; by the triangle
    inequality it always dominates ``bound`` = |tr{R_m [A,B]}|^2 / 4.
    """

    observable_a: str
    observable_b: str
    resolution: float
    disturbance: float
    product: float
    bound: float
    slack: float
    satisfied: bool
    averaged_bound: float
    chain_slack: float
    chain_ok: bool


def resolution_disturbance_check(operator, observable_a: HermitianObservable,
                                 observable_b: HermitianObservable,
                                 slack_tol: float = SLACK_TOL) -> ResolutionDisturbanceCheck:
    """Check delta_A^2 * Delta_B^2 >= |tr{R_m [A, B]}|^2 / 4 for one outcome."""
    retro = retrodictive_operator(operator)
    require_same_dim(retro.matrix, observable_a.matrix, observable_b.matrix)
    resolution = retro.variance(observable_a)
    disturbance = averaged_disturbance(operator, observable_b)
    comm = commutator(observable_a.matrix, observable_b.matrix)
    bound = 0.25 * abs(np.trace(retro.matrix @ comm)) ** 2

    averaged_abs = 0.0
    for j in joint_retrodictions(operator, observable_b):
        averaged_abs += j.weight * abs(np.vdot(j.state, comm @ j.state))
    averaged_bound = 0.25 * averaged_abs ** 2

    product = resolution * disturbance.value
    slack = product - bound
    chain_slack = averaged_bound - bound
    return ResolutionDisturbanceCheck(
        observable_a=observable_a.name or "A",
        observable_b=observable_b.name or "B",
        resolution=resolution, disturbance=disturbance.value,
        product=product, bound=float(bound), slack=float(slack),
        satisfied=bool(slack >= -slack_tol),
        averaged_bound=float(averaged_bound), chain_slack=float(chain_slack),
        chain_ok=bool(chain_slack >= -slack_tol),
    )
