"""Model specification and design matrix construction.

A DesignSpec names a response column and a list of terms over an
observation table (a mapping of column name to equal-length sequences).
Continuous terms are mean centered by default; categorical terms expand to
reference-coded indicator columns, one per non-reference level, named
"term: level". The intercept column is always present and is not a term.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

INTERCEPT = "(Intercept)"


@dataclass(frozen=True)
class ContinuousTerm:
    name: str
    center: bool = True


@dataclass(frozen=True)
class CategoricalTerm:
    name: str
    reference: str | None = None  # None picks the first level in sorted order


Term = ContinuousTerm | CategoricalTerm


@dataclass(frozen=True)
class DesignSpec:
    response: str
    terms: tuple[Term, ...]
    table: Mapping[str, Sequence]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        names = [t.name for t in self.terms]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate terms in {names}")

    @property
    def term_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.terms)

    def term(self, name: str) -> Term:
        for t in self.terms:
            if t.name == name:
                return t
        raise KeyError(name)

    def without(self, name: str) -> "DesignSpec":
        return replace(self, terms=tuple(t for t in self.terms if t.name != name))

    def with_terms(self, names: Sequence[str]) -> "DesignSpec":
        by_name = {t.name: t for t in self.terms}
        return replace(self, terms=tuple(by_name[n] for n in names))

    @property
    def n(self) -> int:
        return len(self.table[self.response])


@dataclass
class DesignMatrix:
    """Numeric design: X with leading intercept column, response y."""

    X: np.ndarray
    y: np.ndarray
    columns: tuple[str, ...]
    term_of_column: tuple[str, ...]  # owning term per column, INTERCEPT for column 0
    centers: dict[str, float] = field(default_factory=dict)
    levels: dict[str, tuple[str, ...]] = field(default_factory=dict)  # term -> all levels
    references: dict[str, str] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def n_columns(self) -> int:
        return self.X.shape[1]


def _column(table: Mapping[str, Sequence], name: str, n: int) -> Sequence:
    if name not in table:
        raise KeyError(f"column {name!r} missing from the observation table")
    col = table[name]
    if len(col) != n:
        raise ValueError(f"column {name!r} has {len(col)} rows, expected {n}")
    return col


def build_design(spec: DesignSpec) -> DesignMatrix:
    """Expand a DesignSpec into a numeric design matrix.

    Centered continuous terms end up with mean 0 (to floating point). The
    reference level of each categorical term gets no column.
    """
    n = spec.n
    y = np.asarray(_column(spec.table, spec.response, n), dtype=float)
    cols: list[np.ndarray] = [np.ones(n)]
    names: list[str] = [INTERCEPT]
    owners: list[str] = [INTERCEPT]
    centers: dict[str, float] = {}
    levels: dict[str, tuple[str, ...]] = {}
    references: dict[str, str] = {}

    for term in spec.terms:
        raw = _column(spec.table, term.name, n)
        if isinstance(term, ContinuousTerm):
            v = np.asarray(raw, dtype=float)
            if term.center:
                center = float(v.mean()) if n else 0.0
                centers[term.name] = center
                v = v - center
            cols.append(v)
            names.append(term.name)
            owners.append(term.name)
        else:
            values = [str(v) for v in raw]
            found = tuple(sorted(set(values)))
            reference = term.reference if term.reference is not None else (found[0] if found else "")
            if found and reference not in found:
                raise ValueError(
                    f"reference level {reference!r} absent from {term.name} levels {found}"
                )
            levels[term.name] = found
            references[term.name] = reference
            for level in found:
                if level == reference:
                    continue
                cols.append(np.array([1.0 if v == level else 0.0 for v in values]))
                names.append(f"{term.name}: {level}")
                owners.append(term.name)

    X = np.column_stack(cols) if n else np.zeros((0, len(cols)))
    return DesignMatrix(X, y, tuple(names), tuple(owners), centers, levels, references)
