"""Worked measurement scenarios: presets and Monte Carlo experiments.

Presets build Kraus sets (single-photon detection, Gaussian-pointer QND,
coherent-state projection, measure-and-prepare cloning); the eavesdropping
scenario runs a seeded intercept-resend Monte Carlo against the analytic
disturbances. All analytic numbers come from the measurement and back-action
modules, never from scenario-local formulas, so every preset doubles as an
integration test of the core.

Randomness is counter-based (numpy Philox keyed by the seed). Trials are laid
out in fixed blocks of 4096, each block drawing from its own substream at
counter ``block_index << 64``, so reports are bit-identical for a given seed
regardless of how blocks are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .backaction import averaged_disturbance
from .characterize import CharacterizationReport, characterize
from .errors import (
    CompletenessUnachievable,
    DimensionMismatch,
    IncompleteKrausSet,
    NonUnitState,
)
from .measurement import (
    COMPLETENESS_TOL,
    KrausSet,
    norm_trace,
    optimal_estimate,
    validate_completeness,
)
from .operators import (
    BosonicSpace,
    COHERENT_TAIL_TOL,
    HermitianObservable,
    bosonic_operators,
    coherent_state,
    eigendecompose,
)

TRIAL_BLOCK = 4096


def photon_detector_preset(space: BosonicSpace) -> KrausSet:
    """Absorbing single-photon detection: the lone operator |0><1|.

    Deliberately partial: only the one-photon outcome is modeled, so the set
    is flagged incomplete.
    """
    op = np.zeros((space.levels, space.levels), dtype=np.complex128)
    op[0, 1] = 1.0
    return KrausSet(operators=(op,), labels=("n=1",), complete=False)


def qnd_preset(space: BosonicSpace, pointer_sigma: float,
               outcome_grid: Sequence[float]) -> KrausSet:
    """Nondemolition photon-number measurement with a Gaussian pointer.

    Each outcome m carries M_m = sum_n g(m - n)/sqrt(S_n) |n><n| with
    g(u) = exp(-u^2 / (4 sigma^2)) and S_n the discrete sum of g^2 over the
    grid, so sum_m M_m'M_m is the identity exactly whatever the grid. Every
    operator is diagonal in photon number, hence disturbs it not at all.
    """
    if pointer_sigma <= 0.0:
        raise ValueError("pointer_sigma must be positive")
    grid = [float(g) for g in outcome_grid]
    if not grid:
        raise ValueError("outcome_grid must not be empty")
    n = np.arange(space.levels, dtype=np.float64)
    weights = np.array([np.exp(-((m - n) ** 2) / (2.0 * pointer_sigma ** 2))
                        for m in grid])           # g^2, shape (grid, levels)
    per_level = weights.sum(axis=0)
    if np.any(per_level <= 0.0):
        missing = int(np.argmin(per_level))
        raise CompletenessUnachievable(
            f"grid gives photon number {missing} zero total weight; widen or "
            "densify the outcome grid")
    coeffs = np.sqrt(weights / per_level)
    ops = tuple(np.diag(coeffs[i].astype(np.complex128)) for i in range(len(grid)))
    labels = tuple(f"m={g:g}" for g in grid)
    return KrausSet(operators=ops, labels=labels, complete=True)


@dataclass(frozen=True)
class TeleportationCharacterization:
    """Quadrature characterization of one coherent-state projection operator."""

    alpha: complex
    estimate: complex          # x + iy estimate of the input amplitude
    resolution_x: float
    resolution_y: float
    disturbance_x: float
    disturbance_y: float
    tail_mass: float


def classical_teleportation_preset(alpha: complex, space: BosonicSpace,
                                   tail_tol: float = COHERENT_TAIL_TOL,
                                   ) -> TeleportationCharacterization:
    """Characterize the measure-and-prepare operator |alpha><alpha| / sqrt(pi).

    Reports the quadrature estimates and their resolutions and disturbances.
    The prefactor drops out of every reported quantity; it only sets the
    outcome density over the alpha plane.
    """
    state = coherent_state(alpha, space, tail_tol)
    op = np.outer(state.vector, state.vector.conj()) / math.sqrt(math.pi)
    ops = bosonic_operators(space)
    quad_x = eigendecompose(ops.x, name="x")
    quad_y = eigendecompose(ops.y, name="y")
    est_x = optimal_estimate(op, quad_x)
    est_y = optimal_estimate(op, quad_y)
    dist_x = averaged_disturbance(op, quad_x)
    dist_y = averaged_disturbance(op, quad_y)
    return TeleportationCharacterization(
        alpha=complex(alpha),
        estimate=complex(est_x.estimate, est_y.estimate),
        resolution_x=est_x.error, resolution_y=est_y.error,
        disturbance_x=dist_x.value, disturbance_y=dist_y.value,
        tail_mass=state.tail_mass,
    )


def coherent_grid_completeness(space: BosonicSpace, half_width: float,
                               spacing: float, check_levels: int | None = None) -> dict:
    """Approximate completeness of a square grid of coherent projections.

    Sums spacing^2/pi |alpha><alpha| over the grid (raw truncated amplitudes,
    no renormalization) and reports the max deviation from the identity over
    the lowest ``check_levels`` Fock levels. The continuum family resolves the
    identity exactly; a finite grid on a truncated space only approximates it.
    """
    if spacing <= 0.0 or half_width <= 0.0:
        raise ValueError("spacing and half_width must be positive")
    n = space.levels
    levels = min(n, check_levels if check_levels is not None else n // 2)
    axis = np.arange(-half_width, half_width + spacing / 2.0, spacing)
    total = np.zeros((n, n), dtype=np.complex128)
    log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, n)))))
    for re in axis:
        for im in axis:
            alpha = complex(re, im)
            if alpha == 0.0:
                amps = np.zeros(n, dtype=np.complex128)
                amps[0] = 1.0
            else:
                mag = abs(alpha)
                phase = alpha / mag
                amps = np.exp(-mag ** 2 / 2.0 + np.arange(n) * np.log(mag)
                              - 0.5 * log_fact) * phase ** np.arange(n)
            total += spacing ** 2 / math.pi * np.outer(amps, amps.conj())
    block = total[:levels, :levels] - np.eye(levels)
    return {
        "grid_points": int(len(axis) ** 2),
        "checked_levels": int(levels),
        "max_deviation": float(np.max(np.abs(block))),
    }


@dataclass(frozen=True)
class ScenarioConfig:
    """Configuration shared by every scenario runner.

    Only the fields a given scenario needs have to be set; the JSON loader in
    the CLI fills this in from a config file.
    """

    scenario: str
    dim: int
    trials: int = 1
    seed: int = 0
    observable_a: HermitianObservable | None = None
    observable_b: HermitianObservable | None = None
    kraus: KrausSet | None = None
    pointer_sigma: float | None = None
    outcome_grid: tuple[float, ...] = ()
    alpha: complex = 0j
    states: tuple = ()
    forwarding: str = "resend"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.forwarding not in ("resend", "reprepare"):
            raise ValueError(f"unknown forwarding strategy {self.forwarding!r}")
        for obs in (self.observable_a, self.observable_b):
            if obs is not None and obs.dim != self.dim:
                raise DimensionMismatch(
                    f"observable has dimension {obs.dim}, scenario has {self.dim}")
        if self.kraus is not None and self.kraus.dim != self.dim:
            raise DimensionMismatch(
                f"Kraus set has dimension {self.kraus.dim}, scenario has {self.dim}")


@dataclass(frozen=True)
class EmpiricalValue:
    """Sample mean with its standard error and sample count."""

    mean: float
    std_error: float
    count: int


@dataclass(frozen=True)
class OutcomeDisturbanceStat:
    outcome: str
    analytic: float
    empirical: EmpiricalValue
    within_three_se: bool


@dataclass(frozen=True)
class BasisBlock:
    """Disturbance bookkeeping for one of the two transmission bases."""

    observable: str
    analytic: float
    empirical: EmpiricalValue
    within_three_se: bool
    outcomes: tuple[OutcomeDisturbanceStat, ...]


@dataclass(frozen=True)
class EavesdropReport:
    trials: int
    seed: int
    forwarding: str
    bases: tuple[BasisBlock, BasisBlock]
    passed: bool


def _empirical(count: int, s1: float, s2: float) -> EmpiricalValue:
    if count == 0:
        return EmpiricalValue(mean=0.0, std_error=0.0, count=0)
    mean = s1 / count
    if count > 1:
        var = max(0.0, (s2 - count * mean * mean) / (count - 1))
        se = math.sqrt(var / count)
    else:
        se = 0.0
    return EmpiricalValue(mean=mean, std_error=se, count=count)


def _within(analytic: float, emp: EmpiricalValue) -> bool:
    return abs(emp.mean - analytic) <= 3.0 * emp.std_error + 1e-12


def _cumulative(table: np.ndarray) -> np.ndarray:
    """Row-normalized cumulative distributions; final entry forced to 1."""
    cum = np.cumsum(table, axis=-1)
    total = cum[..., -1:]
    safe = np.where(total > 0.0, total, 1.0)
    cum = cum / safe
    cum[..., -1] = 1.0
    return cum


def eavesdrop_simulation(config: ScenarioConfig) -> EavesdropReport:
    """Intercept-resend Monte Carlo for a two-basis transmission.

    Per trial: a basis (first or second observable) and one of its eigenstates
    are drawn uniformly, the eavesdropper applies the Kraus set (outcome
    sampled, state collapsed), the receiver measures projectively in the sent
    basis, and the squared eigenvalue change accumulates per eavesdropper
    outcome. Analytic references are the averaged disturbances weighted by the
    uniform-prior outcome probabilities tr{M'M}/d.

    With ``forwarding="reprepare"`` the eavesdropper sends the retrodicted
    input mixture for its outcome instead of the collapsed state.
    """
    if config.kraus is None or config.observable_a is None or config.observable_b is None:
        raise ValueError("eavesdropping needs a Kraus set and two observables")
    report = validate_completeness(config.kraus, COMPLETENESS_TOL)
    if not config.kraus.complete or not report.passed:
        raise IncompleteKrausSet(
            f"eavesdropping requires a complete set (deviation {report.max_deviation:.3e})")

    kraus = config.kraus
    d = kraus.dim
    n_out = len(kraus)
    bases = (config.observable_a, config.observable_b)

    # Conditional tables. eve_p[c, i, m]: outcome probability for eigenstate i
    # of basis c. bob_p[c, i, m, f]: receiver result f given collapse by m.
    eve_p = np.zeros((2, d, n_out))
    bob_p = np.zeros((2, d, n_out, d))
    for c, obs in enumerate(bases):
        vecs = obs.eigenvectors
        for m, op in enumerate(kraus.operators):
            amp = vecs.conj().T @ op @ vecs   # <f|M|i>
            prob = np.abs(amp) ** 2
            eve_p[c, :, m] = prob.sum(axis=0)
            if config.forwarding == "resend":
                bob_p[c, :, m, :] = prob.T
            else:
                weight = norm_trace(op)
                gram = op.conj().T @ op / (weight if weight > 0 else 1.0)
                retro = np.einsum("if,ij,jf->f", vecs.conj(), gram, vecs).real
                bob_p[c, :, m, :] = np.maximum(retro, 0.0)[None, :]
    eve_cum = _cumulative(eve_p)
    bob_cum = _cumulative(bob_p)
    values = np.stack([obs.eigenvalues for obs in bases])

    counts = np.zeros((2, n_out), dtype=np.int64)
    s1 = np.zeros((2, n_out))
    s2 = np.zeros((2, n_out))
    trials = config.trials
    for block in range((trials + TRIAL_BLOCK - 1) // TRIAL_BLOCK):
        size = min(TRIAL_BLOCK, trials - block * TRIAL_BLOCK)
        gen = np.random.Generator(np.random.Philox(key=config.seed,
                                                   counter=block << 64))
        basis = gen.integers(0, 2, size=size)
        sent = gen.integers(0, d, size=size)
        u_eve = gen.random(size=size)
        u_bob = gen.random(size=size)

        outcome = (eve_cum[basis, sent] < u_eve[:, None]).sum(axis=1)
        received = (bob_cum[basis, sent, outcome] < u_bob[:, None]).sum(axis=1)
        diff2 = (values[basis, received] - values[basis, sent]) ** 2

        flat = basis * n_out + outcome
        counts += np.bincount(flat, minlength=2 * n_out).reshape(2, n_out)
        s1 += np.bincount(flat, weights=diff2, minlength=2 * n_out).reshape(2, n_out)
        s2 += np.bincount(flat, weights=diff2 ** 2, minlength=2 * n_out).reshape(2, n_out)

    blocks = []
    for c, obs in enumerate(bases):
        outcome_stats = []
        analytic_total = 0.0
        gaps2 = (obs.eigenvalues[:, None] - obs.eigenvalues[None, :]) ** 2
        for m, (label, op) in enumerate(kraus.items()):
            if config.forwarding == "resend":
                analytic = averaged_disturbance(op, obs).value
            else:
                # input retrodiction p(i|m) against the re-prepared mixture
                input_probs = eve_p[c, :, m] / eve_p[c, :, m].sum()
                analytic = float(input_probs @ gaps2 @ bob_p[c, 0, m, :])
            analytic_total += norm_trace(op) / d * analytic
            emp = _empirical(int(counts[c, m]), float(s1[c, m]), float(s2[c, m]))
            outcome_stats.append(OutcomeDisturbanceStat(
                outcome=str(label), analytic=analytic, empirical=emp,
                within_three_se=_within(analytic, emp) if emp.count else True))
        overall = _empirical(int(counts[c].sum()), float(s1[c].sum()), float(s2[c].sum()))
        blocks.append(BasisBlock(
            observable=obs.name or f"basis{c}",
            analytic=analytic_total, empirical=overall,
            within_three_se=_within(analytic_total, overall),
            outcomes=tuple(outcome_stats)))
    passed = all(b.within_three_se and all(o.within_three_se for o in b.outcomes)
                 for b in blocks)
    return EavesdropReport(trials=trials, seed=config.seed,
                           forwarding=config.forwarding,
                           bases=(blocks[0], blocks[1]), passed=passed)


@dataclass(frozen=True)
class CloneOutcomeRow:
    outcome: str
    estimate: float
    resolution: float
    disturbance: float


@dataclass(frozen=True)
class CloningReport:
    """Per-outcome cloning errors for one observable.

    Every clone is prepared in the outcome's preparation state, so each copy
    inherits the disturbance of the projective cloning operator regardless of
    how many copies are made.
    """

    observable: str
    rows: tuple[CloneOutcomeRow, ...]
    completeness_deviation: float | None


def cloning_error(states: Sequence, observable: HermitianObservable,
                  check_completeness: bool = False) -> CloningReport:
    """Errors of a measure-and-prepare cloner built from projection states."""
    prepared = []
    for i, raw in enumerate(states):
        vec = np.asarray(raw, dtype=np.complex128).reshape(-1)
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > 1e-9:
            raise NonUnitState(f"state {i} has norm {norm!r}")
        if vec.shape[0] != observable.dim:
            raise DimensionMismatch(
                f"state {i} has dimension {vec.shape[0]}, observable has {observable.dim}")
        prepared.append(vec)
    ops = tuple(np.outer(v, v.conj()) for v in prepared)
    kraus = KrausSet(operators=ops,
                     labels=tuple(f"psi{i}" for i in range(len(ops))),
                     complete=check_completeness)
    deviation = None
    if check_completeness:
        deviation = validate_completeness(kraus).max_deviation
    rows = []
    for label, op in kraus.items():
        est = optimal_estimate(op, observable)
        dist = averaged_disturbance(op, observable)
        rows.append(CloneOutcomeRow(outcome=str(label), estimate=est.estimate,
                                    resolution=est.error, disturbance=dist.value))
    return CloningReport(observable=observable.name or "A", rows=tuple(rows),
                         completeness_deviation=deviation)


@dataclass(frozen=True)
class ScenarioReport:
    """Uniform envelope for scenario results: payload plus a pass flag."""

    scenario: str
    dim: int
    trials: int
    seed: int
    body: object
    passed: bool


def run_scenario(config: ScenarioConfig) -> ScenarioReport:
    """Dispatch a scenario config to its runner."""
    body: object
    if config.scenario == "photon":
        space = BosonicSpace(config.dim)
        kraus = photon_detector_preset(space)
        body = _characterize_with_defaults(kraus, config, space)
        passed = all(o.status == "ok" for o in body.outcomes)
    elif config.scenario == "qnd":
        if config.pointer_sigma is None or not config.outcome_grid:
            raise ValueError("qnd scenario needs pointer_sigma and outcome_grid")
        space = BosonicSpace(config.dim)
        kraus = qnd_preset(space, config.pointer_sigma, config.outcome_grid)
        body = _characterize_with_defaults(kraus, config, space)
        passed = body.completeness.passed
    elif config.scenario == "classical_teleport":
        body = classical_teleportation_preset(config.alpha, BosonicSpace(config.dim))
        passed = True
    elif config.scenario == "eavesdrop":
        body = eavesdrop_simulation(config)
        passed = body.passed
    elif config.scenario == "cloning":
        if config.observable_a is None:
            raise ValueError("cloning scenario needs an observable")
        body = cloning_error(config.states, config.observable_a)
        passed = True
    else:
        raise ValueError(f"unknown scenario {config.scenario!r}")
    return ScenarioReport(scenario=config.scenario, dim=config.dim,
                          trials=config.trials, seed=config.seed,
                          body=body, passed=passed)


def _characterize_with_defaults(kraus: KrausSet, config: ScenarioConfig,
                                space: BosonicSpace) -> CharacterizationReport:
    observables = {}
    for obs in (config.observable_a, config.observable_b):
        if obs is not None:
            observables[obs.name or f"obs{len(observables)}"] = obs
    if not observables:
        number = eigendecompose(bosonic_operators(space).number, name="n")
        observables = {"n": number}
    return characterize(kraus, observables)
