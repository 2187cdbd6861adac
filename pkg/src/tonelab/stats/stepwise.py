"""Bidirectional stepwise model selection under BIC.

Starts from the full model and repeatedly applies whichever single-term
deletion or re-addition lowers BIC the most, stopping at a local minimum.
Categorical terms move as whole blocks of indicator columns. Additions are
limited to terms of the starting model, so the search space is the power
set of the full term list.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .design import DesignSpec
from .linear import ModelFit, ols_fit

_BIC_EPS = 1e-10  # require a real improvement before moving


@dataclass(frozen=True)
class StepRecord:
    action: str  # "start" | "drop" | "add"
    term: str | None
    bic: float


@dataclass
class StepwiseResult:
    spec: DesignSpec
    fit: ModelFit
    trace: list[StepRecord]

    @property
    def selected_terms(self) -> tuple[str, ...]:
        return self.spec.term_names


def stepwise_bic(
    full: DesignSpec, fitter: Callable[[DesignSpec], ModelFit] = ols_fit
) -> StepwiseResult:
    """Select the BIC-optimal submodel of ``full`` by bidirectional steps.

    ``fitter`` fits a DesignSpec and must return a ModelFit with a ``bic``
    field, so the same search drives linear and logistic models.
    """
    all_terms = list(full.term_names)
    current = list(all_terms)
    fit = fitter(full)
    trace = [StepRecord("start", None, fit.bic)]

    while True:
        candidates: list[tuple[float, str, str, list[str]]] = []
        for term in current:
            reduced = [t for t in current if t != term]
            candidate_fit = fitter(full.with_terms(reduced))
            candidates.append((candidate_fit.bic, "drop", term, reduced))
        for term in all_terms:
            if term in current:
                continue
            extended = [t for t in all_terms if t in current or t == term]
            candidate_fit = fitter(full.with_terms(extended))
            candidates.append((candidate_fit.bic, "add", term, extended))
        if not candidates:
            break
        best_bic, action, term, terms = min(candidates, key=lambda c: c[0])
        if best_bic >= fit.bic - _BIC_EPS:
            break
        current = terms
        fit = fitter(full.with_terms(current))
        trace.append(StepRecord(action, term, fit.bic))

    return StepwiseResult(full.with_terms(current), fit, trace)
