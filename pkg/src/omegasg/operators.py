"""Row-finite infinite matrices with a finite description, and sequence vectors.

A continuous linear operator on the space of all scalar sequences is a
row-finite infinite matrix.  The finitely-describable class implemented here
consists of finitely many explicit ("exceptional") rows followed by an
eventually-periodic banded part: row n (for n >= n0) carries an entry at
column n+d for every (offset d, coefficient) pair attached to the residue
n mod p.  All arithmetic is exact over the rationals; indices are 1-based.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import InvalidOperatorError, InvalidVectorError, ResourceLimitError

Rational = Fraction

# Cap on intermediate support size in power_row and on visited indices in
# reachability scans.  Overridable per call and via OMEGA_SG_CAP in the CLI.
DEFAULT_SUPPORT_CAP = 10**6


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """Parse "p/q", integer, or decimal/scientific strings exactly.

    Decimal strings become rationals with a power-of-ten denominator; floats
    are rejected (binary rounding would silently break exactness).
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise InvalidVectorError(
            f"refusing float literal {text!r}; pass a string like '1/3' or '0.25'"
        )
    s = str(text).strip()
    try:
        if "/" in s:
            return Fraction(s)
        return Fraction(Decimal(s))
    except (ValueError, ZeroDivisionError, InvalidOperation) as exc:
        raise InvalidVectorError(f"not a rational literal: {s!r}") from exc


def format_rational(q: Fraction) -> str:
    """Render a rational as "p" or "p/q" (the JSON wire encoding)."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class SparseRow:
    """One finite row: (column, coefficient) pairs, sorted, distinct, nonzero."""

    entries: tuple[tuple[int, Fraction], ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, Fraction]], *, what: str = "row") -> "SparseRow":
        ent = sorted((int(c), Fraction(v)) for c, v in pairs)
        for col, val in ent:
            if col < 1:
                raise InvalidOperatorError(f"{what}: column {col} < 1")
            if val == 0:
                raise InvalidOperatorError(f"{what}: zero coefficient stored at column {col}")
        for (c1, _), (c2, _) in zip(ent, ent[1:]):
            if c1 == c2:
                raise InvalidOperatorError(f"{what}: duplicate column {c1}")
        return cls(tuple(ent))

    def support(self) -> tuple[int, ...]:
        return tuple(c for c, _ in self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


EMPTY_ROW = SparseRow(())


@dataclass(frozen=True)
class SequenceVector:
    """A scalar sequence given by a finite prefix and a constant tail.

    coordinate(j) = prefix[j-1] for j <= len(prefix), else the tail value;
    tail 0 encodes the eventually-zero vectors.
    """

    prefix: tuple[Fraction, ...] = ()
    tail: Fraction = Fraction(0)

    def coordinate(self, j: int) -> Fraction:
        if j < 1:
            raise InvalidVectorError(f"coordinate index {j} < 1")
        if j <= len(self.prefix):
            return self.prefix[j - 1]
        return self.tail

    @classmethod
    def from_coords(cls, coords: Iterable, tail: Union[Fraction, int, str] = 0) -> "SequenceVector":
        return cls(tuple(parse_rational(c) for c in coords), parse_rational(tail))

    @classmethod
    def from_dict(cls, d: Mapping) -> "SequenceVector":
        if not isinstance(d, Mapping):
            raise InvalidVectorError("vector description must be a JSON object")
        try:
            prefix = tuple(parse_rational(c) for c in d["prefix"])
        except KeyError as exc:
            raise InvalidVectorError("vector description missing field 'prefix'") from exc
        tail_spec = d.get("tail", "zeros")
        if tail_spec == "zeros":
            tail = Fraction(0)
        elif isinstance(tail_spec, Mapping) and "constant" in tail_spec:
            tail = parse_rational(tail_spec["constant"])
        else:
            raise InvalidVectorError(
                f"field 'tail' must be \"zeros\" or {{\"constant\": ...}}, got {tail_spec!r}"
            )
        return cls(prefix, tail)

    def to_dict(self) -> dict:
        tail = "zeros" if self.tail == 0 else {"constant": format_rational(self.tail)}
        return {"prefix": [format_rational(c) for c in self.prefix], "tail": tail}


def load_vector(path: str) -> SequenceVector:
    with open(path, "r", encoding="utf-8") as fh:
        return SequenceVector.from_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class RowFiniteOperator:
    """Validated immutable operator; use build_operator / from_dict to construct.

    exceptional_rows maps row indices < n0 to their rows (absent = empty row);
    periodic_pattern[r] lists (offset, coeff) pairs for rows n >= n0 with
    n mod period == r; the entry sits at column n+offset and is dropped when
    n+offset < 1.
    """

    exceptional_rows: Mapping[int, SparseRow]
    n0: int
    period: int
    periodic_pattern: tuple[tuple[tuple[int, Fraction], ...], ...]

    # -- derived geometry -------------------------------------------------

    def max_positive_offset(self) -> int:
        """Largest upward step of the periodic part (0 if none)."""
        return max((d for pat in self.periodic_pattern for d, _ in pat if d > 0), default=0)

    def max_descent(self) -> int:
        """Largest downward step of the periodic part (0 if none)."""
        return max((-d for pat in self.periodic_pattern for d, _ in pat if d < 0), default=0)

    def max_exceptional_column(self) -> int:
        """Largest column referenced by any exceptional row (0 if none)."""
        cols = [c for r in self.exceptional_rows.values() for c, _ in r.entries]
        return max(cols, default=0)

    # -- serialization -----------------------------------------------------

    @classmethod
    def from_dict(cls, d: Mapping) -> "RowFiniteOperator":
        if not isinstance(d, Mapping):
            raise InvalidOperatorError("operator description must be a JSON object")
        missing = [k for k in ("n0", "period", "pattern") if k not in d]
        if missing:
            raise InvalidOperatorError(f"operator description missing fields: {', '.join(missing)}")
        pattern = [
            [(int(e["offset"]), parse_rational(e["coeff"])) for e in residue_entries]
            for residue_entries in d["pattern"]
        ]
        exceptional = {
            int(row): [(int(e["col"]), parse_rational(e["coeff"])) for e in entries]
            for row, entries in d.get("exceptional_rows", {}).items()
        }
        return build_operator(
            n0=int(d["n0"]),
            period=int(d["period"]),
            pattern=pattern,
            exceptional_rows=exceptional,
        )

    def to_dict(self) -> dict:
        return {
            "n0": self.n0,
            "period": self.period,
            "pattern": [
                [{"offset": d, "coeff": format_rational(c)} for d, c in pat]
                for pat in self.periodic_pattern
            ],
            "exceptional_rows": {
                str(r): [{"col": c, "coeff": format_rational(v)} for c, v in sr.entries]
                for r, sr in sorted(self.exceptional_rows.items())
            },
        }


def build_operator(
    *,
    n0: int,
    period: int,
    pattern: Sequence[Sequence[tuple[int, Union[Fraction, int, str]]]],
    exceptional_rows: Mapping[int, Sequence[tuple[int, Union[Fraction, int, str]]]] | None = None,
) -> RowFiniteOperator:
    """Validate a description and return the operator.

    Raises InvalidOperatorError for: n0 < 1, period < 1, a pattern whose
    length differs from the period, zero coefficients, duplicate columns or
    offsets within one row, or an exceptional row index outside [1, n0).
    """
    if n0 < 1:
        raise InvalidOperatorError(f"n0 must be >= 1, got {n0}")
    if period < 1:
        raise InvalidOperatorError(f"period must be >= 1, got {period}")
    if len(pattern) != period:
        raise InvalidOperatorError(
            f"pattern has {len(pattern)} residue lists but period is {period}"
        )

    canon_pattern = []
    for r, entries in enumerate(pattern):
        ent = sorted((int(d), parse_rational(c)) for d, c in entries)
        for d, c in ent:
            if c == 0:
                raise InvalidOperatorError(f"pattern residue {r}: zero coefficient at offset {d}")
        for (d1, _), (d2, _) in zip(ent, ent[1:]):
            if d1 == d2:
                raise InvalidOperatorError(f"pattern residue {r}: duplicate column offset {d1}")
        canon_pattern.append(tuple(ent))

    canon_exceptional: dict[int, SparseRow] = {}
    for row_idx, entries in (exceptional_rows or {}).items():
        row_idx = int(row_idx)
        if row_idx < 1:
            raise InvalidOperatorError(f"exceptional row index {row_idx} < 1")
        if row_idx >= n0:
            raise InvalidOperatorError(
                f"exceptional row index {row_idx} >= n0 ({n0}); it belongs to the periodic part"
            )
        sr = SparseRow.from_pairs(
            ((int(c), parse_rational(v)) for c, v in entries), what=f"row {row_idx}"
        )
        if sr.entries:
            canon_exceptional[row_idx] = sr

    return RowFiniteOperator(
        exceptional_rows=canon_exceptional,
        n0=n0,
        period=period,
        periodic_pattern=tuple(canon_pattern),
    )


def load_operator(path: str) -> RowFiniteOperator:
    with open(path, "r", encoding="utf-8") as fh:
        return RowFiniteOperator.from_dict(json.load(fh))


def row(op: RowFiniteOperator, n: int) -> SparseRow:
    """Materialize row n: finite, sorted, deterministic."""
    if n < 1:
        raise InvalidOperatorError(f"row index {n} < 1")
    if n < op.n0:
        return op.exceptional_rows.get(n, EMPTY_ROW)
    pat = op.periodic_pattern[n % op.period]
    entries = tuple((n + d, c) for d, c in pat if n + d >= 1)
    return SparseRow(entries) if entries else EMPTY_ROW


def power_row(
    op: RowFiniteOperator, n: int, k: int, *, max_entries: int = DEFAULT_SUPPORT_CAP
) -> SparseRow:
    """Row n of the k-th power, by exact sparse row-times-matrix products.

    power_row(op, n, 0) is the identity row [(n, 1)].  Raises
    ResourceLimitError when an intermediate support exceeds max_entries.
    """
    if n < 1:
        raise InvalidOperatorError(f"row index {n} < 1")
    if k < 0:
        raise InvalidOperatorError(f"power {k} < 0")
    current: dict[int, Fraction] = {n: Fraction(1)}
    for step in range(k):
        nxt: dict[int, Fraction] = {}
        for col, coeff in current.items():
            for j, a in row(op, col).entries:
                v = nxt.get(j, Fraction(0)) + coeff * a
                if v == 0:
                    nxt.pop(j, None)
                else:
                    nxt[j] = v
        if len(nxt) > max_entries:
            raise ResourceLimitError(
                f"power_row(n={n}, k={k}): support grew past {max_entries} entries "
                f"at step {step + 1} ({len(nxt)} columns)",
                count=len(nxt),
            )
        current = nxt
        if not current:
            break
    return SparseRow(tuple(sorted(current.items())))


def apply(op: RowFiniteOperator, x: SequenceVector, n_out: int) -> list[Fraction]:
    """Exact coordinates 1..n_out of the image of x."""
    if n_out < 1:
        raise InvalidOperatorError(f"n_out {n_out} < 1")
    out = []
    for i in range(1, n_out + 1):
        acc = Fraction(0)
        for j, c in row(op, i).entries:
            acc += c * x.coordinate(j)
        out.append(acc)
    return out


def project(x: Union[SequenceVector, Sequence[Fraction]], n: int) -> list[Fraction]:
    """Coordinates 1..n of a vector or of an already-materialized coordinate list."""
    if n < 1:
        raise InvalidVectorError(f"projection length {n} < 1")
    if isinstance(x, SequenceVector):
        return [x.coordinate(j) for j in range(1, n + 1)]
    if n > len(x):
        raise InvalidVectorError(f"projection length {n} exceeds the {len(x)} given coordinates")
    return list(x[:n])
