"""Coordinatewise evaluation of exp(tA) and its Cesàro mean, with certified tails.

Coordinates 1..n of exp(tA)x depend only on the finite closed index set S
spanned by rows 1..n, so the evaluation reduces to a finite matrix.  The
series is summed exactly over the rationals up to an order K chosen so that
the remainder is below a requested epsilon; with lambda the max-row-sum norm
of the closed submatrix, the tail after K is at most
(t*lambda)^(K+1)/(K+1)! * e^(t*lambda) times the sup-norm of the input
coordinates.  Nilpotent submatrices terminate the series exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .errors import DomainError
from .operators import (
    DEFAULT_SUPPORT_CAP,
    RowFiniteOperator,
    SequenceVector,
    format_rational,
    parse_rational,
    row,
)
from .reachability import (
    FiniteClosure,
    InfiniteCertificate,
    StructuralFailureError,
    closure_of_rows,
)


def exp_upper(z: Fraction) -> Fraction:
    """A rational upper bound for e^z, z >= 0 (tight to ~1e-30 relative)."""
    z = Fraction(z)
    if z < 0:
        raise DomainError(f"exp_upper requires z >= 0, got {z}")
    s = Fraction(1)
    term = Fraction(1)
    i = 0
    tiny = Fraction(1, 10**30)
    while True:
        i += 1
        term = term * z / i
        s += term
        r = z / (i + 1)
        if r < Fraction(1, 2):
            # remaining tail is dominated by the geometric series with ratio r
            bound = term * r / (1 - r)
            if bound <= s * tiny:
                return s + bound


def exp_lower(z: Fraction, terms: int = 48) -> Fraction:
    """A rational lower bound for e^z, z >= 0 (a plain partial sum)."""
    z = Fraction(z)
    if z < 0:
        raise DomainError(f"exp_lower requires z >= 0, got {z}")
    s = Fraction(1)
    term = Fraction(1)
    for i in range(1, terms):
        term = term * z / i
        s += term
    return s


def tail_remainder(lam: Fraction, t: Fraction, K: int) -> Fraction:
    """Outward-rounded bound for sum_{k>K} (t*lam)^k / k!."""
    z = Fraction(t) * Fraction(lam)
    if z < 0:
        raise DomainError("tail_remainder requires t*lam >= 0")
    term = Fraction(1)
    for i in range(1, K + 2):
        term = term * z / i
    return term * exp_upper(z)


def truncation_order(lam: Fraction, t: Fraction, epsilon: Fraction) -> int:
    """Smallest K with (t*lam)^(K+1)/(K+1)! * e^(t*lam) <= epsilon."""
    lam, t, epsilon = Fraction(lam), Fraction(t), Fraction(epsilon)
    if lam < 0 or t < 0:
        raise DomainError("truncation_order requires lam >= 0 and t >= 0")
    if epsilon <= 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    z = t * lam
    if z == 0:
        return 0
    eu = exp_upper(z)
    K = 0
    term = z  # z^(K+1)/(K+1)! at K = 0
    while term * eu > epsilon:
        K += 1
        term = term * z / (K + 1)
    return K


@dataclass(frozen=True)
class TailBound:
    """Certificate that truncating after order K leaves a remainder <= epsilon."""

    lam: Fraction
    t: Fraction
    K: int
    epsilon: Fraction
    remainder: Fraction

    def __post_init__(self):
        if self.remainder > self.epsilon:
            raise DomainError(
                f"remainder bound {self.remainder} exceeds epsilon {self.epsilon}"
            )

    @classmethod
    def certify(cls, lam: Fraction, t: Fraction, epsilon: Fraction) -> "TailBound":
        K = truncation_order(lam, t, epsilon)
        return cls(
            lam=Fraction(lam),
            t=Fraction(t),
            K=K,
            epsilon=Fraction(epsilon),
            remainder=tail_remainder(lam, t, K),
        )


@dataclass(frozen=True)
class FiniteMatrix:
    """Restriction of the operator to a finite closed index set.

    index_set is sorted; rows[i] holds (position, coefficient) pairs over
    positions into index_set, so all arithmetic stays inside the set.
    """

    index_set: tuple[int, ...]
    rows: tuple[tuple[tuple[int, Fraction], ...], ...]

    @classmethod
    def from_entries(cls, index_set: Sequence[int], dense: Sequence[Sequence]) -> "FiniteMatrix":
        idx = tuple(sorted(int(i) for i in index_set))
        if len(dense) != len(idx) or any(len(r) != len(idx) for r in dense):
            raise DomainError("dense entries must form a square array over index_set")
        rows = tuple(
            tuple((j, Fraction(v)) for j, v in enumerate(r) if Fraction(v) != 0)
            for r in dense
        )
        return cls(index_set=idx, rows=rows)

    def size(self) -> int:
        return len(self.index_set)

    def entry(self, i: int, j: int) -> Fraction:
        pos_i = self.index_set.index(i)
        pos_j = self.index_set.index(j)
        for p, c in self.rows[pos_i]:
            if p == pos_j:
                return c
        return Fraction(0)

    def as_dense(self) -> list[list[Fraction]]:
        n = self.size()
        out = [[Fraction(0)] * n for _ in range(n)]
        for i, r in enumerate(self.rows):
            for p, c in r:
                out[i][p] = c
        return out

    def apply_vec(self, v: Sequence[Fraction]) -> list[Fraction]:
        return [sum((c * v[p] for p, c in r), Fraction(0)) for r in self.rows]

    def is_acyclic(self) -> bool:
        """True when the support digraph has no cycle (hence nilpotent)."""
        n = self.size()
        color = [0] * n  # 0 unseen, 1 on stack, 2 done
        for start in range(n):
            if color[start]:
                continue
            stack = [(start, iter([p for p, _ in self.rows[start]]))]
            color[start] = 1
            while stack:
                node, it = stack[-1]
                advanced = False
                for nxt in it:
                    if color[nxt] == 1:
                        return False
                    if color[nxt] == 0:
                        color[nxt] = 1
                        stack.append((nxt, iter([p for p, _ in self.rows[nxt]])))
                        advanced = True
                        break
                if not advanced:
                    color[node] = 2
                    stack.pop()
        return True


def closed_submatrix(
    op: RowFiniteOperator, n: int, *, cap: int = DEFAULT_SUPPORT_CAP
) -> FiniteMatrix:
    """Restrict the operator to the closure of rows 1..n.

    Raises StructuralFailureError (carrying the pump certificate) when that
    closure is infinite.
    """
    result = closure_of_rows(op, list(range(1, n + 1)), cap=cap)
    if isinstance(result, InfiniteCertificate):
        raise StructuralFailureError(starting_row=n, certificate=result)
    assert isinstance(result, FiniteClosure)
    idx = tuple(sorted(result.S))
    pos = {j: p for p, j in enumerate(idx)}
    rows = []
    for i in idx:
        entries = []
        for j, c in row(op, i).entries:
            assert j in pos, "closure invariant violated"
            entries.append((pos[j], c))
        rows.append(tuple(entries))
    return FiniteMatrix(index_set=idx, rows=tuple(rows))


def norm_bound(matrix: FiniteMatrix) -> Fraction:
    """Max-row-sum norm of the closed submatrix (the contraction constant lambda)."""
    return max((sum(abs(c) for _p, c in r) for r in matrix.rows), default=Fraction(0))


@dataclass(frozen=True)
class EvaluationReport:
    """Exact partial-sum values with a certified per-coordinate tail bound.

    nilpotent means the series terminated exactly (a zero term was reached),
    in which case certified_error is 0.
    """

    values: tuple[Fraction, ...]
    certified_error: Fraction
    K_used: int
    lambda_used: Fraction
    nilpotent: bool

    def to_dict(self, float_view: bool = False) -> dict:
        if float_view:
            digits = _float_digits(self.certified_error)
            values = [_render_float(v, digits) for v in self.values]
            err = float(self.certified_error)
        else:
            values = [format_rational(v) for v in self.values]
            err = format_rational(self.certified_error)
        return {
            "values": values,
            "certified_error": err,
            "K_used": self.K_used,
            "lambda": format_rational(self.lambda_used),
            "nilpotent": self.nilpotent,
        }


def _float_digits(err: Fraction) -> int | None:
    """Decimal places justified by the certified error (None = full precision)."""
    if err == 0:
        return None
    d = 0
    while d < 16 and Fraction(1, 2 * 10 ** (d + 1)) >= err:
        d += 1
    return d


def _render_float(v: Fraction, digits: int | None) -> str:
    if digits is None:
        return repr(float(v))
    return f"{float(v):.{digits}f}"


def _phi_series(
    matrix: FiniteMatrix,
    t: Fraction,
    xs: list[Fraction],
    order: int,
    *,
    cesaro: bool,
    run_to_termination: bool,
) -> tuple[list[Fraction], int, bool]:
    """Sum terms u_k = t^k A^k x / k!, weighted by 1/(k+1) in Cesàro mode.

    Returns (partial sums, highest term index used, terminated-exactly flag).
    With run_to_termination the order cap is ignored; callers enable it only
    when the support digraph is acyclic, which forces a zero term within
    size(matrix) steps.
    """
    acc = list(xs)
    u = list(xs)
    k = 0
    if all(c == 0 for c in u):
        return acc, 0, True
    while True:
        if k >= order and not run_to_termination:
            return acc, k, False
        u = matrix.apply_vec(u)
        k += 1
        u = [c * t / k for c in u]
        if all(c == 0 for c in u):
            return acc, k - 1, True
        if cesaro:
            w = Fraction(1, k + 1)
            for i, c in enumerate(u):
                acc[i] += c * w
        else:
            for i, c in enumerate(u):
                acc[i] += c
        if run_to_termination and k > matrix.size() + order + 1:  # pragma: no cover
            raise AssertionError("acyclic submatrix failed to terminate the series")


def series_on_matrix(
    matrix: FiniteMatrix,
    t: Fraction,
    xs: Sequence[Fraction],
    epsilon: Fraction,
    *,
    cesaro: bool = False,
) -> EvaluationReport:
    """Series evaluation over the whole index set of a closed submatrix.

    Values cover every index of the matrix (callers slice); the certified
    error is absolute: tail-remainder times the sup-norm of xs.
    """
    if epsilon <= 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    lam = norm_bound(matrix)
    t_abs = abs(Fraction(t))
    K = truncation_order(lam, t_abs, epsilon)
    values, K_used, terminated = _phi_series(
        matrix, Fraction(t), list(xs), K, cesaro=cesaro,
        run_to_termination=matrix.is_acyclic(),
    )
    xnorm = max((abs(c) for c in xs), default=Fraction(0))
    certified = Fraction(0) if terminated else tail_remainder(lam, t_abs, K) * xnorm
    return EvaluationReport(
        values=tuple(values),
        certified_error=certified,
        K_used=K_used,
        lambda_used=lam,
        nilpotent=terminated,
    )


def _prepare(op, t, x, n, epsilon, cap):
    t = parse_rational(t) if isinstance(t, str) else Fraction(t)
    epsilon = parse_rational(epsilon) if isinstance(epsilon, str) else Fraction(epsilon)
    if epsilon <= 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    matrix = closed_submatrix(op, n, cap=cap)
    xs = [x.coordinate(j) for j in matrix.index_set]
    return t, epsilon, matrix, xs


def _slice_coords(matrix: FiniteMatrix, report: EvaluationReport, n: int) -> EvaluationReport:
    pos = {j: p for p, j in enumerate(matrix.index_set)}
    values = tuple(report.values[pos[j]] for j in range(1, n + 1))
    return EvaluationReport(
        values=values,
        certified_error=report.certified_error,
        K_used=report.K_used,
        lambda_used=report.lambda_used,
        nilpotent=report.nilpotent,
    )


def exp_apply(
    op: RowFiniteOperator,
    t: Union[Fraction, int, str],
    x: SequenceVector,
    n: int,
    epsilon: Union[Fraction, int, str],
    *,
    allow_negative_t: bool = False,
    cap: int = DEFAULT_SUPPORT_CAP,
) -> EvaluationReport:
    """Coordinates 1..n of exp(tA)x as exact rationals with a certified tail.

    The per-coordinate error is at most epsilon * max(1, sup-norm of x over
    the closed index set); it is exactly 0 when the series terminates.
    Negative t is rejected unless allow_negative_t (the finite submatrix
    exponential is defined for all t, the semigroup only for t >= 0).
    """
    t, epsilon, matrix, xs = _prepare(op, t, x, n, epsilon, cap)
    if t < 0 and not allow_negative_t:
        raise DomainError(f"t must be >= 0 (got {t}); pass allow_negative_t=True to override")
    report = series_on_matrix(matrix, t, xs, epsilon, cesaro=False)
    return _slice_coords(matrix, report, n)


def cesaro_apply(
    op: RowFiniteOperator,
    t: Union[Fraction, int, str],
    x: SequenceVector,
    n: int,
    epsilon: Union[Fraction, int, str],
    *,
    cap: int = DEFAULT_SUPPORT_CAP,
) -> EvaluationReport:
    """Coordinates 1..n of the Cesàro mean (1/t) * integral of exp(sA)x over [0, t].

    Evaluated as the series sum_k t^k A^k x / (k+1)!, whose terms are
    dominated by the exponential's, so the same truncation certificate
    applies.  Requires t > 0.
    """
    t, epsilon, matrix, xs = _prepare(op, t, x, n, epsilon, cap)
    if t <= 0:
        raise DomainError(f"the Cesàro mean requires t > 0, got {t}")
    report = series_on_matrix(matrix, t, xs, epsilon, cesaro=True)
    return _slice_coords(matrix, report, n)
