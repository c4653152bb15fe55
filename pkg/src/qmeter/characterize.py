"""Bundle the per-outcome characterization of a whole measurement set.

For every outcome and every requested observable this collects the optimal
estimate, its squared error (resolution) and the averaged disturbance; for
requested observable pairs it adds the two uncertainty checks (resolution
pair, and resolution against disturbance). Unreachable outcomes become status
rows instead of aborting the run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .backaction import (
    DisturbanceReport,
    ResolutionDisturbanceCheck,
    averaged_disturbance,
    resolution_disturbance_check,
)
from .errors import UnknownObservable, UnreachableOutcome
from .measurement import (
    COMPLETENESS_TOL,
    CompletenessReport,
    KrausSet,
    PairCheck,
    optimal_estimate,
    resolution_pair_check,
    validate_completeness,
)
from .operators import HermitianObservable


@dataclass(frozen=True)
class ObservableRow:
    """Estimate / resolution / disturbance of one observable for one outcome."""

    observable: str
    estimate: float
    resolution: float
    disturbance: float
    disturbance_report: DisturbanceReport


@dataclass(frozen=True)
class PairRow:
    """Both uncertainty checks for one ordered observable pair on one outcome."""

    observable_a: str
    observable_b: str
    resolution_check: PairCheck
    disturbance_check: ResolutionDisturbanceCheck

    @property
    def satisfied(self) -> bool:
        return self.resolution_check.satisfied and self.disturbance_check.satisfied


@dataclass(frozen=True)
class OutcomeCharacterization:
    outcome: str
    status: str  # "ok" or "unreachable"
    rows: tuple[ObservableRow, ...]
    pairs: tuple[PairRow, ...]


@dataclass(frozen=True)
class CharacterizationReport:
    completeness: CompletenessReport
    declared_complete: bool
    outcomes: tuple[OutcomeCharacterization, ...]

    @property
    def all_satisfied(self) -> bool:
        return all(p.satisfied for o in self.outcomes for p in o.pairs)


def characterize(kraus: KrausSet, observables: Mapping[str, HermitianObservable],
                 pairs: Sequence[tuple[str, str]] = (),
                 completeness_tol: float = COMPLETENESS_TOL) -> CharacterizationReport:
    """Characterize every outcome of a measurement against named observables."""
    for a, b in pairs:
        for name in (a, b):
            if name not in observables:
                raise UnknownObservable(f"pair references unknown observable {name!r}")
    completeness = validate_completeness(kraus, completeness_tol)
    outcomes = []
    for label, op in kraus.items():
        try:
            rows = []
            for name, obs in observables.items():
                est = optimal_estimate(op, obs)
                dist = averaged_disturbance(op, obs)
                rows.append(ObservableRow(
                    observable=name, estimate=est.estimate, resolution=est.error,
                    disturbance=dist.value, disturbance_report=dist))
            pair_rows = [
                PairRow(
                    observable_a=a, observable_b=b,
                    resolution_check=resolution_pair_check(op, observables[a], observables[b]),
                    disturbance_check=resolution_disturbance_check(op, observables[a], observables[b]),
                )
                for a, b in pairs
            ]
            status = "ok"
        except UnreachableOutcome:
            rows, pair_rows, status = [], [], "unreachable"
        outcomes.append(OutcomeCharacterization(
            outcome=str(label), status=status, rows=tuple(rows), pairs=tuple(pair_rows)))
    return CharacterizationReport(
        completeness=completeness,
        declared_complete=kraus.complete,
        outcomes=tuple(outcomes),
    )
