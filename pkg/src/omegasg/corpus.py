"""Built-in operator corpus: generation verdicts and closed-form semigroups.

Every entry is a small operator with a known global verdict, and, where the
closed submatrices are nilpotent, an exact closed form for exp(tA).  The
backward shift pairs with the odd-row operator B: identical per-row support
shape on odd rows, opposite verdicts, which is the point — generation is not
readable off the sparsity shape row by row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .errors import DomainError
from .operators import RowFiniteOperator, SequenceVector, build_operator, power_row, project
from .reachability import decide_generation
from .exponential import exp_apply

ClosedForm = Callable[[Fraction, SequenceVector, int], list[Fraction]]
FloatForm = Callable[[Fraction, SequenceVector, int], list[float]]


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    description: str
    operator: Optional[RowFiniteOperator]
    expected_generates: Optional[bool]
    closed_form: Optional[ClosedForm] = None
    float_form: Optional[FloatForm] = None

    @property
    def is_analytic_demo(self) -> bool:
        return self.operator is None


def _backward_shift() -> RowFiniteOperator:
    return build_operator(n0=1, period=1, pattern=[[(1, 1)]])


def _operator_b() -> RowFiniteOperator:
    return build_operator(n0=1, period=2, pattern=[[], [(1, 1)]])


def _a_minus_b() -> RowFiniteOperator:
    return build_operator(n0=1, period=2, pattern=[[(1, 1)], []])


def _forward_shift() -> RowFiniteOperator:
    return build_operator(n0=2, period=1, pattern=[[(-1, 1)]], exceptional_rows={1: []})


def _identity() -> RowFiniteOperator:
    return build_operator(n0=1, period=1, pattern=[[(0, 1)]])


def _zero() -> RowFiniteOperator:
    return build_operator(n0=1, period=1, pattern=[[]])


def _form_b(t: Fraction, x: SequenceVector, n: int) -> list[Fraction]:
    # exp(tB) = I + tB since B squares to zero
    out = []
    for i in range(1, n + 1):
        bump = x.coordinate(i + 1) if i % 2 == 1 else Fraction(0)
        out.append(x.coordinate(i) + t * bump)
    return out


def _form_a_minus_b(t: Fraction, x: SequenceVector, n: int) -> list[Fraction]:
    out = []
    for i in range(1, n + 1):
        bump = x.coordinate(i + 1) if i % 2 == 0 else Fraction(0)
        out.append(x.coordinate(i) + t * bump)
    return out


def _form_forward_shift(t: Fraction, x: SequenceVector, n: int) -> list[Fraction]:
    # coordinate i collects x_{i-k} t^k / k! down the nilpotent chain
    out = []
    for i in range(1, n + 1):
        acc = Fraction(0)
        coeff = Fraction(1)
        for k in range(i):
            acc += coeff * x.coordinate(i - k)
            coeff = coeff * t / (k + 1)
        out.append(acc)
    return out


def _form_zero(t: Fraction, x: SequenceVector, n: int) -> list[Fraction]:
    return project(x, n)


def _form_identity_float(t: Fraction, x: SequenceVector, n: int) -> list[float]:
    scale = math.exp(float(t))
    return [scale * float(x.coordinate(i)) for i in range(1, n + 1)]


def list_examples() -> tuple[CorpusEntry, ...]:
    """Deterministic list of corpus entries."""
    return (
        CorpusEntry(
            id="backward_shift",
            description=(
                "shift x -> (x_2, x_3, ...): every coordinate eventually depends on "
                "arbitrarily distant ones, so no strongly continuous semigroup"
            ),
            operator=_backward_shift(),
            expected_generates=False,
        ),
        CorpusEntry(
            id="nilpotent_B",
            description=(
                "x -> (x_2, 0, x_4, 0, ...): squares to zero, generates exp(tB) = id + tB"
            ),
            operator=_operator_b(),
            expected_generates=True,
            closed_form=_form_b,
        ),
        CorpusEntry(
            id="A_minus_B",
            description=(
                "backward shift minus B (even rows keep the superdiagonal): squares "
                "to zero, generates id + t(A-B)"
            ),
            operator=_a_minus_b(),
            expected_generates=True,
            closed_form=_form_a_minus_b,
        ),
        CorpusEntry(
            id="forward_shift",
            description="x -> (0, x_1, x_2, ...): descending dependencies, generates",
            operator=_forward_shift(),
            expected_generates=True,
            closed_form=_form_forward_shift,
        ),
        CorpusEntry(
            id="identity",
            description="diagonal of ones: generates the scalar semigroup e^t id",
            operator=_identity(),
            expected_generates=True,
            float_form=_form_identity_float,
        ),
        CorpusEntry(
            id="zero",
            description="zero operator: generates the constant semigroup id",
            operator=_zero(),
            expected_generates=True,
            closed_form=_form_zero,
        ),
        CorpusEntry(
            id="smooth_flat_shift",
            description=(
                "translation orbit of a flat bump on the line: all derivatives vanish "
                "at the origin, so every exponential partial sum is 0 there while the "
                "orbit value is e^(-1/t) > 0"
            ),
            operator=None,
            expected_generates=None,
        ),
    )


def get_example(entry_id: str) -> CorpusEntry:
    for e in list_examples():
        if e.id == entry_id:
            return e
    raise KeyError(f"no corpus entry named {entry_id!r}")


def _flat_derivative_at_zero(k: int) -> Fraction:
    # every derivative of exp(-1/s) (extended by 0 for s <= 0) vanishes at 0;
    # encoded symbolically, because numerically differentiating a flat
    # function cannot exhibit the exact zero
    return Fraction(0)


def smooth_shift_divergence(t: Fraction, K: int) -> tuple[Fraction, float]:
    """Partial exponential sum at the origin vs. the true shifted value.

    For the flat bump f(s) = exp(-1/s) (s > 0), the order-K Taylor partial
    sum of the translation orbit at the origin is exactly 0 for every K,
    while the orbit reaches f(t) = e^(-1/t) > 0: the exponential series
    cannot converge to the semigroup's value on this space.
    """
    t = Fraction(t)
    if t <= 0:
        raise DomainError(f"divergence demo requires t > 0, got {t}")
    if K < 0:
        raise DomainError(f"order K must be >= 0, got {K}")
    partial = Fraction(0)
    coeff = Fraction(1)
    for k in range(K + 1):
        partial += coeff * _flat_derivative_at_zero(k)
        coeff = coeff * t / (k + 1)
    true_value = math.exp(-1.0 / float(t))
    return partial, true_value


# deterministic evaluation points for the regression gate
_REGRESSION_TIMES = (Fraction(0), Fraction(1), Fraction(1, 2), Fraction(2), Fraction(7, 3))
_REGRESSION_VECTORS = (
    SequenceVector(prefix=(), tail=Fraction(1)),
    SequenceVector(prefix=(Fraction(1),)),
    SequenceVector(prefix=(Fraction(3), Fraction(-1, 2), Fraction(2), Fraction(0), Fraction(5)), tail=Fraction(1)),
)
_REGRESSION_EPS = Fraction(1, 10**12)


def run_entry(entry: CorpusEntry, *, n: int = 6) -> dict:
    """Re-derive an entry's expectations; returns a pass/fail record."""
    details: list[str] = []
    ok = True

    if entry.is_analytic_demo:
        partial, true_value = smooth_shift_divergence(Fraction(1), 50)
        if partial != 0:
            ok = False
            details.append(f"partial sum expected 0, got {partial}")
        if abs(true_value - math.exp(-1.0)) > 1e-15:
            ok = False
            details.append(f"true value expected e^-1, got {true_value}")
        details.append(f"partial_sum=0, orbit_value={true_value:.12f}")
        return {"id": entry.id, "ok": ok, "details": details}

    verdict = decide_generation(entry.operator)
    if verdict.generates != entry.expected_generates:
        ok = False
        details.append(
            f"verdict mismatch: expected generates={entry.expected_generates}, "
            f"got {verdict.generates}"
        )
    details.append("verdict=" + ("generates" if verdict.generates else "fails"))

    if not verdict.generates:
        cert = verdict.certificate
        for j in range(1, 6):
            col = cert.base() + j * cert.weight
            steps = len(cert.stem) + j * len(cert.cycle)
            if col not in power_row(entry.operator, verdict.row, steps).support():
                ok = False
                details.append(f"certificate pump round {j} missing from power support")
                break
        details.append(f"certificate pumps +{cert.weight} per round")
        return {"id": entry.id, "ok": ok, "details": details}

    for t in _REGRESSION_TIMES:
        for x in _REGRESSION_VECTORS:
            rep = exp_apply(entry.operator, t, x, n, _REGRESSION_EPS)
            if entry.closed_form is not None:
                expected = entry.closed_form(t, x, n)
                if list(rep.values) != expected:
                    ok = False
                    details.append(f"closed form mismatch at t={t}")
                if rep.certified_error != 0:
                    ok = False
                    details.append(f"expected exact evaluation at t={t}")
            elif entry.float_form is not None:
                approx = entry.float_form(t, x, n)
                slack = float(rep.certified_error) + 1e-9
                if any(abs(float(v) - a) > slack for v, a in zip(rep.values, approx)):
                    ok = False
                    details.append(f"float form mismatch at t={t}")
    details.append("semigroup values checked at 15 (t, x) points")
    return {"id": entry.id, "ok": ok, "details": details}


def run_regression() -> list[dict]:
    """The corpus gate: every entry re-checked; returns one record per entry."""
    return [run_entry(e) for e in list_examples()]
