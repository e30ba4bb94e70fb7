"""Property checks tying the evaluator back to semigroup identities.

Each check evaluates both sides of an identity with internal truncation
budgets chosen so that the certified total stays below the requested
tolerance; the measured deviation is then a genuine implementation check,
not a tolerance gamble.  All reports echo their inputs and are reproducible
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .errors import DomainError
from .operators import (
    DEFAULT_SUPPORT_CAP,
    RowFiniteOperator,
    SequenceVector,
    apply,
    format_rational,
    power_row,
)
from .exponential import (
    FiniteMatrix,
    closed_submatrix,
    exp_lower,
    exp_upper,
    norm_bound,
    series_on_matrix,
)


def _jsonify(value):
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonify(v) for k, v in value.items()}
    return value


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one identity check.

    failure is None on pass; otherwise it pins down a violating coordinate
    with the two values, the deviation, and the tolerance.
    """

    name: str
    passed: bool
    measured: dict
    bounds: dict
    inputs: dict
    failure: Optional[dict] = field(default=None)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "measured": _jsonify(self.measured),
            "bounds": _jsonify(self.bounds),
            "inputs": _jsonify(self.inputs),
            "failure": _jsonify(self.failure),
        }


def _max_deviation(lhs: Sequence[Fraction], rhs: Sequence[Fraction], first_coord: int = 1):
    """(max |lhs-rhs|, coordinate, lhs value, rhs value) over aligned slots."""
    dev = Fraction(0)
    where = first_coord
    lv = rv = Fraction(0)
    for i, (a, b) in enumerate(zip(lhs, rhs)):
        d = abs(a - b)
        if d > dev:
            dev, where, lv, rv = d, first_coord + i, a, b
    return dev, where, lv, rv


def _coerce(q) -> Fraction:
    return q if isinstance(q, Fraction) else Fraction(q)


def _build_report(name, passed, measured, bounds, inputs, dev_info, tol):
    failure = None
    if not passed:
        dev, coord, lv, rv = dev_info
        failure = {
            "coordinate": coord,
            "lhs": lv,
            "rhs": rv,
            "deviation": dev,
            "tolerance": tol,
        }
    return CheckReport(
        name=name, passed=passed, measured=measured, bounds=bounds,
        inputs=inputs, failure=failure,
    )


def check_semigroup_law(
    op: RowFiniteOperator,
    s: Union[Fraction, int],
    t: Union[Fraction, int],
    x: SequenceVector,
    n: int,
    tol: Union[Fraction, int],
    *,
    cap: int = DEFAULT_SUPPORT_CAP,
) -> CheckReport:
    """Compare exp((s+t)A)x against exp(sA) exp(tA) x on coordinates 1..n.

    Internal budgets: tol/4 for the direct evaluation, tol/4 for the outer
    stage, and tol/(4 e^(s*lambda)) for the inner stage (the outer semigroup
    amplifies inner truncation error by at most its norm), each divided by
    the relevant input sup-norm, so the certified total deviation is below
    tol by construction; the measured deviation then checks the arithmetic.
    Exactly zero for nilpotent closed submatrices.
    """
    s, t, tol = _coerce(s), _coerce(t), _coerce(tol)
    if s < 0 or t < 0:
        raise DomainError("semigroup parameters require s >= 0 and t >= 0")
    if tol <= 0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    matrix = closed_submatrix(op, n, cap=cap)
    xs = [x.coordinate(j) for j in matrix.index_set]
    lam = norm_bound(matrix)
    xnorm = max(max((abs(c) for c in xs), default=Fraction(0)), Fraction(1))

    eps_direct = tol / (4 * xnorm)
    eps_inner = tol / (4 * exp_upper(s * lam) * xnorm)
    direct = series_on_matrix(matrix, s + t, xs, eps_direct)
    inner = series_on_matrix(matrix, t, xs, eps_inner)
    ynorm = max(max((abs(c) for c in inner.values), default=Fraction(0)), Fraction(1))
    eps_outer = tol / (4 * ynorm)
    outer = series_on_matrix(matrix, s, list(inner.values), eps_outer)

    pos = {j: p for p, j in enumerate(matrix.index_set)}
    lhs = [direct.values[pos[j]] for j in range(1, n + 1)]
    rhs = [outer.values[pos[j]] for j in range(1, n + 1)]
    dev_info = _max_deviation(lhs, rhs)
    certified_total = (
        direct.certified_error
        + exp_upper(s * lam) * inner.certified_error
        + outer.certified_error
    )
    passed = dev_info[0] <= tol
    return _build_report(
        "semigroup_law",
        passed,
        measured={"deviation": dev_info[0], "nilpotent": direct.nilpotent and outer.nilpotent},
        bounds={"tolerance": tol, "certified_total": certified_total, "lambda": lam},
        inputs={
            "operator": op.to_dict(), "x": x.to_dict(),
            "s": s, "t": t, "n": n, "tol": tol,
        },
        dev_info=dev_info,
        tol=tol,
    )


DEFAULT_H_SCHEDULE = tuple(Fraction(1, 2**i) for i in range(0, 11))


def check_generator_fd(
    op: RowFiniteOperator,
    x: SequenceVector,
    n: int,
    h_schedule: Sequence[Union[Fraction, int]] = DEFAULT_H_SCHEDULE,
    *,
    cap: int = DEFAULT_SUPPORT_CAP,
) -> CheckReport:
    """Difference quotients (exp(hA)x - x)/h converge to Ax at first order.

    For each h the measured error e(h) (sup over coordinates 1..n) must stay
    under h * lambda^2 * e^(h*lambda) * ||x_S|| / 2, the remainder of the
    series after its linear part; that bound also keeps e(h)/h bounded
    across the schedule.  Evaluations run with a 1e-30-scale internal
    epsilon so measurement noise is far below the bound's slack.
    """
    hs = [_coerce(h) for h in h_schedule]
    if any(h <= 0 for h in hs):
        raise DomainError("step sizes must be positive")
    matrix = closed_submatrix(op, n, cap=cap)
    xs = [x.coordinate(j) for j in matrix.index_set]
    lam = norm_bound(matrix)
    xnorm = max((abs(c) for c in xs), default=Fraction(0))
    ax = apply(op, x, n)
    pos = {j: p for p, j in enumerate(matrix.index_set)}

    eps_internal = Fraction(1, 10**30) * max(xnorm, Fraction(1))
    errors: list[Fraction] = []
    bounds: list[Fraction] = []
    worst = None
    for h in hs:
        rep = series_on_matrix(matrix, h, xs, eps_internal)
        quot = [(rep.values[pos[j]] - x.coordinate(j)) / h for j in range(1, n + 1)]
        dev_info = _max_deviation(quot, ax)
        errors.append(dev_info[0])
        # lower bracket of e^(h*lambda) keeps the asserted bound conservative
        bound = h * lam * lam * exp_lower(h * lam) * xnorm / 2
        bounds.append(bound)
        if dev_info[0] > bound and worst is None:
            worst = (dev_info, bound, h)

    ratios = [
        errors[i + 1] / errors[i] for i in range(len(errors) - 1) if errors[i] != 0
    ]
    passed = worst is None
    dev_info = worst[0] if worst else (Fraction(0), 1, Fraction(0), Fraction(0))
    return _build_report(
        "generator_finite_difference",
        passed,
        measured={
            "h": hs,
            "e_of_h": errors,
            "ratios": ratios,
        },
        bounds={"per_h": bounds, "lambda": lam},
        inputs={"operator": op.to_dict(), "x": x.to_dict(), "n": n,
                "h_schedule": hs},
        dev_info=dev_info,
        tol=worst[1] if worst else Fraction(0),
    )


def _simpson_mean(
    matrix: FiniteMatrix,
    t: Fraction,
    xs: list[Fraction],
    panels: int,
    eps_sample: Fraction,
) -> list[Fraction]:
    """(1/t) * integral over [0, t] of exp(sA)x ds by composite Simpson.

    One panel = one Simpson application over two subintervals; exact
    rational weights, each orbit sample truncated at eps_sample.
    """
    m = 2 * panels
    h = t / m
    total = [Fraction(0)] * matrix.size()
    for i in range(m + 1):
        rep = series_on_matrix(matrix, h * i, xs, eps_sample)
        w = 1 if i in (0, m) else (4 if i % 2 == 1 else 2)
        for p, v in enumerate(rep.values):
            total[p] += w * v
    scale = h / (3 * t)
    return [v * scale for v in total]


def check_cesaro_identity(
    op: RowFiniteOperator,
    t: Union[Fraction, int],
    x: SequenceVector,
    n: int,
    tol: Union[Fraction, int],
    *,
    quad_tol: Union[Fraction, int] = Fraction(1, 10**8),
    panels: int = 64,
    cap: int = DEFAULT_SUPPORT_CAP,
) -> CheckReport:
    """A applied to the Cesàro mean equals (exp(tA)x - x)/t, within tol.

    Budgets: the Cesàro series runs at tol/(2 max(1,lambda)), the exponential
    at tol*t/2 (norm-scaled), so the certified deviation of the identity is
    below tol by construction.  The mean is additionally cross-checked
    against composite Simpson quadrature of the orbit with >= 64 panels,
    within quad_tol.
    """
    t, tol, quad_tol = _coerce(t), _coerce(tol), _coerce(quad_tol)
    if t <= 0:
        raise DomainError(f"the Cesàro identity requires t > 0, got {t}")
    if tol <= 0 or quad_tol <= 0:
        raise DomainError("tolerances must be positive")
    if panels < 64:
        raise DomainError("at least 64 Simpson panels are required")
    matrix = closed_submatrix(op, n, cap=cap)
    xs = [x.coordinate(j) for j in matrix.index_set]
    lam = norm_bound(matrix)
    xnorm = max(max((abs(c) for c in xs), default=Fraction(0)), Fraction(1))

    eps_c = tol / (2 * max(lam, Fraction(1)) * xnorm)
    eps_t = tol * t / (2 * xnorm)
    cesaro = series_on_matrix(matrix, t, xs, eps_c, cesaro=True)
    expo = series_on_matrix(matrix, t, xs, eps_t)

    pos = {j: p for p, j in enumerate(matrix.index_set)}
    a_cesaro = matrix.apply_vec(list(cesaro.values))
    lhs = [a_cesaro[pos[j]] for j in range(1, n + 1)]
    rhs = [(expo.values[pos[j]] - x.coordinate(j)) / t for j in range(1, n + 1)]
    dev_info = _max_deviation(lhs, rhs)
    identity_ok = dev_info[0] <= tol

    eps_sample = quad_tol / (100 * xnorm)
    quad = _simpson_mean(matrix, t, xs, panels, eps_sample)
    q_lhs = [cesaro.values[pos[j]] for j in range(1, n + 1)]
    q_rhs = [quad[pos[j]] for j in range(1, n + 1)]
    quad_info = _max_deviation(q_lhs, q_rhs)
    quad_ok = quad_info[0] <= quad_tol

    passed = identity_ok and quad_ok
    bad = dev_info if not identity_ok else quad_info
    bad_tol = tol if not identity_ok else quad_tol
    return _build_report(
        "cesaro_identity",
        passed,
        measured={
            "identity_deviation": dev_info[0],
            "quadrature_deviation": quad_info[0],
            "nilpotent": cesaro.nilpotent,
        },
        bounds={
            "tolerance": tol,
            "quadrature_tolerance": quad_tol,
            "panels": panels,
            "lambda": lam,
        },
        inputs={"operator": op.to_dict(), "x": x.to_dict(), "t": t, "n": n,
                "tol": tol},
        dev_info=bad,
        tol=bad_tol,
    )


@dataclass(frozen=True)
class ProbeWitness:
    """Power k whose row n carries mass at a column beyond m."""

    k: int
    column: int
    value: Fraction

    def to_dict(self) -> dict:
        return {"k": self.k, "column": self.column, "value": format_rational(self.value)}


def probe_exact_failure(
    op: RowFiniteOperator,
    n: int,
    m: int,
    K_max: int,
    *,
    cap: int = DEFAULT_SUPPORT_CAP,
) -> Optional[ProbeWitness]:
    """Search powers 0..K_max of row n for an exact entry beyond column m.

    A witness proves that zeroing coordinates 1..m does not force coordinate
    n of every power to vanish.  Absence up to K_max is inconclusive (a
    semidecision): higher powers might still reach past m.
    """
    if n < 1 or m < 1:
        raise DomainError("probe requires n >= 1 and m >= 1")
    if K_max < 0:
        raise DomainError("K_max must be >= 0")
    for k in range(K_max + 1):
        for j, v in power_row(op, n, k, max_entries=cap).entries:
            if j > m:
                return ProbeWitness(k=k, column=j, value=v)
    return None
