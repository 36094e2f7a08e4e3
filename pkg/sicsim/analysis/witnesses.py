"""
Expectation values of the Yu-Oh observables and the two SIC witnesses.

Pair and triple correlators pool every measurement order of the same
observables. Errors are Bernoulli shot noise per correlator, added in
quadrature across witness terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from sicsim.analysis.tables import MINUS, CountTables, RecordStream
from sicsim.core.yuoh import (
    CLASSICAL_BOUND_OPT3,
    CLASSICAL_BOUND_YO,
    build_rays,
    get_ray,
    ideal_predictions,
    witness_sets,
)
from sicsim.utils.errors import InsufficientDataError


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    samples: int


@dataclass(frozen=True)
class WitnessResult:
    name: str
    value: float
    std_error: float
    bound: float
    samples: int

    @property
    def sigma_violation(self) -> float:
        if self.std_error == 0.0:
            return math.copysign(math.inf, self.value - self.bound) if self.value != self.bound else 0.0
        return (self.value - self.bound) / self.std_error

    def as_dict(self) -> Dict:
        return {
            "name": self.name,
            "value": self.value,
            "std_error": self.std_error,
            "bound": self.bound,
            "sigma_violation": self.sigma_violation,
            "samples": self.samples,
        }


def _label(*rays: int) -> str:
    labels = [build_rays()[r].label for r in rays]
    return "<" + " ".join(f"A_{lab}" for lab in labels) + ">"


def _from_parity(n_total: int, n_odd: int, what: str) -> Estimate:
    """Mean of a +-1 product given how many samples had product -1."""
    if n_total == 0:
        raise InsufficientDataError(f"No samples for {what}", [what])
    p = n_odd / n_total
    value = (n_total - 2 * n_odd) / n_total
    return Estimate(value, 2.0 * math.sqrt(p * (1.0 - p) / n_total), n_total)


def expval_single(tables: CountTables, v) -> Estimate:
    v = get_ray(v).id
    n_plus, n_minus = (int(x) for x in tables.n1[v])
    return _from_parity(n_plus + n_minus, n_minus, _label(v))


def expval_pair(tables: CountTables, u, v) -> Estimate:
    u, v = get_ray(u).id, get_ray(v).id
    if u == v:
        raise ValueError("expval_pair needs two different rays")
    cells = tables.n2[u, v] + tables.n2[v, u]
    n_odd = int(cells[0, 1] + cells[1, 0])
    return _from_parity(int(cells.sum()), n_odd, _label(u, v))


# Slots (a, b, c) whose product of outcomes is -1: an odd number of MINUS slots.
_ODD3 = np.array([[[(a + b + c) % 2 == 1 for c in (0, 1)] for b in (0, 1)] for a in (0, 1)])


def expval_triple(tables: CountTables, u, v, w) -> Estimate:
    u, v, w = get_ray(u).id, get_ray(v).id, get_ray(w).id
    if len({u, v, w}) != 3:
        raise ValueError("expval_triple needs three different rays")
    cells = sum(tables.n3[x, y, z] for x, y, z in permutations((u, v, w)))
    return _from_parity(int(cells.sum()), int(cells[_ODD3].sum()), _label(u, v, w))


def _combine(
    name: str,
    bound: float,
    terms: Sequence[Tuple[float, str, Callable[[], Estimate]]],
    tables: CountTables,
) -> WitnessResult:
    value = 0.0
    variance = 0.0
    missing: List[str] = []
    for coefficient, label, estimator in terms:
        try:
            est = estimator()
        except InsufficientDataError:
            missing.append(label)
            continue
        value += coefficient * est.value
        variance += (coefficient * est.std_error) ** 2
    if missing:
        raise InsufficientDataError(f"Cannot evaluate {name}", missing)
    return WitnessResult(name, value, math.sqrt(variance), float(bound), tables.total)


def _single_terms(tables, rays, coefficient):
    return [(coefficient, _label(v), lambda v=v: expval_single(tables, v)) for v in rays]


def _pair_terms(tables, pairs, coefficient):
    return [(coefficient, _label(u, v), lambda u=u, v=v: expval_pair(tables, u, v)) for u, v in pairs]


def witness_yo(tables: CountTables) -> WitnessResult:
    """chi_YO = sum_V <A_v> - 1/2 sum_E <A_u A_v>."""
    sets = witness_sets()
    terms = _single_terms(tables, sets.V, 1.0) + _pair_terms(tables, sets.E, -0.5)
    return _combine("chi_yo", CLASSICAL_BOUND_YO, terms, tables)


def witness_opt3(tables: CountTables) -> WitnessResult:
    sets = witness_sets()
    terms = (
        _single_terms(tables, sets.V_h, 2.0)
        + _single_terms(tables, sets.V_not_h, 1.0)
        + _pair_terms(tables, sets.E_not_C2, -2.0)
        + _pair_terms(tables, sets.C2, -1.0)
        + [(-3.0, _label(*t), lambda t=t: expval_triple(tables, *t)) for t in sets.C3]
    )
    return _combine("chi_opt3", CLASSICAL_BOUND_OPT3, terms, tables)


def correlator_table(tables: CountTables) -> List[Dict]:
    """One row per single, edge pair and C3 triple; empty cells give NaN values."""
    sets = witness_sets()
    ideal = ideal_predictions()
    rows: List[Dict] = []

    def add(kind: str, rays: Tuple[int, ...], ideal_value, estimator):
        try:
            est = estimator()
            value, std, n = est.value, est.std_error, est.samples
        except InsufficientDataError:
            value, std, n = float("nan"), float("nan"), 0
        rows.append(
            {
                "kind": kind,
                "observables": " ".join(build_rays()[r].label for r in rays),
                "value": value,
                "std_error": std,
                "samples": n,
                "ideal": float(ideal_value),
            }
        )

    for v in sets.V:
        add("single", (v,), ideal.single, lambda v=v: expval_single(tables, v))
    for u, v in sets.E:
        add("pair", (u, v), ideal.pair, lambda u=u, v=v: expval_pair(tables, u, v))
    for t in sets.C3:
        add("triple", t, ideal.triple, lambda t=t: expval_triple(tables, *t))
    return rows


@dataclass(frozen=True)
class ConditionedWitness:
    ray: str
    chi_yo: Optional[WitnessResult]
    chi_opt3: Optional[WitnessResult]
    missing: Tuple[str, ...] = ()


def conditioned_witnesses(stream: RecordStream) -> List[ConditionedWitness]:
    """Both witnesses evaluated on the windows following each bright ray i."""
    out: List[ConditionedWitness] = []
    for ray in build_rays():
        tables = stream.conditioned(ray.id)
        results: Dict[str, Optional[WitnessResult]] = {}
        missing: List[str] = []
        for name, fn in (("chi_yo", witness_yo), ("chi_opt3", witness_opt3)):
            try:
                results[name] = fn(tables)
            except InsufficientDataError as e:
                results[name] = None
                missing.extend(e.missing)
        out.append(ConditionedWitness(ray.label, results["chi_yo"], results["chi_opt3"], tuple(dict.fromkeys(missing))))
    return out


def bright_fraction(tables: CountTables) -> Estimate:
    n = int(tables.n1.sum())
    if n == 0:
        raise InsufficientDataError("Empty tables", ["n1"])
    p = int(tables.n1[:, MINUS].sum()) / n
    return Estimate(p, math.sqrt(p * (1.0 - p) / n), n)
