"""Domain types, validation, and JSON config parsing.

A problem instance is a horizon ``n``, a query budget ``K`` and a response
model for the expert: when queried at a record time the expert answers with a
level in 1..M, drawn from ``p`` if the current sample is the best overall and
from ``q`` otherwise.  All types are immutable after construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Rational
from pathlib import Path
from typing import Sequence, Union

Number = Union[int, float, Fraction]

# Solver comparisons are threshold-sensitive, so sloppy float inputs are
# rejected early rather than normalized.
FLOAT_SUM_TOL = 1e-12


class ValidationError(ValueError):
    """Base class for invalid instance or config input."""


class LengthMismatch(ValidationError):
    pass


class ProbabilityOutOfRange(ValidationError):
    pass


class SumNotOne(ValidationError):
    """A response distribution does not sum to one; carries the deviation."""

    def __init__(self, which: str, total: Number) -> None:
        self.which = which
        self.deviation = float(total) - 1.0
        super().__init__(f"{which} sums to {total} (deviation {self.deviation:+.3e})")


class NumericMode(Enum):
    """Arithmetic used for value tables: IEEE doubles or exact rationals."""

    FLOAT64 = "float"
    EXACT_RATIONAL = "rational"


def _is_exact(x: Number) -> bool:
    return isinstance(x, Rational)


@dataclass(frozen=True)
class ResponseModel:
    """Expert response distributions over levels 1..M.

    ``p[m-1]`` is the probability of level m given the current sample is the
    best; ``q[m-1]`` the probability given it is not.  Entries may be ints,
    Fractions (exact) or floats.  A level with p(m)=q(m)=0 is legal but inert:
    it is never emitted.
    """

    M: int
    p: tuple[Number, ...]
    q: tuple[Number, ...]

    def __post_init__(self) -> None:
        if self.M < 1:
            raise ValidationError(f"M must be >= 1, got {self.M}")
        object.__setattr__(self, "p", tuple(self.p))
        object.__setattr__(self, "q", tuple(self.q))
        for name, vec in (("p", self.p), ("q", self.q)):
            if len(vec) != self.M:
                raise LengthMismatch(f"{name} has length {len(vec)}, expected M={self.M}")
            for m, x in enumerate(vec, start=1):
                if not (0 <= x <= 1):
                    raise ProbabilityOutOfRange(f"{name}({m}) = {x} not in [0,1]")
            total = sum(vec)
            if all(_is_exact(x) for x in vec):
                if total != 1:
                    raise SumNotOne(name, total)
            elif abs(total - 1.0) > FLOAT_SUM_TOL:
                raise SumNotOne(name, total)

    @property
    def exact(self) -> bool:
        """True when every entry is an int or Fraction."""
        return all(_is_exact(x) for x in self.p + self.q)


def validate_model(M: int, p: Sequence[Number], q: Sequence[Number]) -> ResponseModel:
    """Validate and freeze a response model; no silent normalization."""
    return ResponseModel(M, tuple(p), tuple(q))


def symmetric_binary_model(p: Number) -> ResponseModel:
    """Two-level model parametrized by a single reliability p.

    Level 1 means "best", level 2 means "not the best"; the expert is right
    with probability p in both states.  p=1 is the infallible expert, p=1/2
    the uninformative one.
    """
    if not (0 <= p <= 1):
        raise ProbabilityOutOfRange(f"p = {p} not in [0,1]")
    one: Number = Fraction(1) if _is_exact(p) else 1.0
    return ResponseModel(2, (p, one - p), (one - p, p))


@dataclass(frozen=True)
class ProblemSpec:
    """Instance definition: horizon n, query budget K, response model."""

    n: int
    K: int
    model: ResponseModel

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError(f"n must be >= 1, got {self.n}")
        if not (0 <= self.K <= self.n):
            raise ValidationError(f"K must satisfy 0 <= K <= n={self.n}, got {self.K}")


# -- JSON config -------------------------------------------------------------
#
# Schema: {"n": int, "K": int, "M": int, "p": [num...], "q": [num...]}
# plus optional "labels": [str...] of length M (display only, not kept on the
# core types).  Numbers may be "a/b" strings, which are exact in rational mode.


def _parse_prob(x: object, mode: NumericMode) -> Number:
    if isinstance(x, str):
        value = Fraction(x)
        return value if mode is NumericMode.EXACT_RATIONAL else float(value)
    if isinstance(x, (int, Fraction)):
        return x
    if isinstance(x, float):
        return x
    raise ValidationError(f"probability entry {x!r} is not a number or 'a/b' string")


def parse_config(text: str, mode: NumericMode = NumericMode.FLOAT64) -> ProblemSpec:
    """Parse a JSON config into a validated ProblemSpec.

    In rational mode decimal literals are read exactly (0.9 becomes 9/10).
    """
    try:
        if mode is NumericMode.EXACT_RATIONAL:
            raw = json.loads(text, parse_float=Fraction)
        else:
            raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValidationError("config must be a JSON object")
    for key in ("n", "K", "M", "p", "q"):
        if key not in raw:
            raise ValidationError(f"config missing required key {key!r}")
    n, K, M = raw["n"], raw["K"], raw["M"]
    if not isinstance(n, int) or not isinstance(K, int) or not isinstance(M, int):
        raise ValidationError("n, K and M must be integers")
    if not isinstance(raw["p"], list) or not isinstance(raw["q"], list):
        raise ValidationError("p and q must be arrays")
    p = tuple(_parse_prob(x, mode) for x in raw["p"])
    q = tuple(_parse_prob(x, mode) for x in raw["q"])
    labels = raw.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
            raise ValidationError("labels must be an array of strings")
        if len(labels) != M:
            raise LengthMismatch(f"labels has length {len(labels)}, expected M={M}")
    model = validate_model(M, p, q)
    return ProblemSpec(n=n, K=K, model=model)


def read_config(path: str | Path, mode: NumericMode = NumericMode.FLOAT64) -> ProblemSpec:
    return parse_config(Path(path).read_text(), mode)


def _dump_prob(x: Number) -> object:
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    return x


def dump_config(spec: ProblemSpec, labels: Sequence[str] | None = None) -> str:
    """Serialize a ProblemSpec to the JSON config format (lossless round trip)."""
    doc: dict[str, object] = {
        "n": spec.n,
        "K": spec.K,
        "M": spec.model.M,
        "p": [_dump_prob(x) for x in spec.model.p],
        "q": [_dump_prob(x) for x in spec.model.q],
    }
    if labels is not None:
        doc["labels"] = list(labels)
    return json.dumps(doc, indent=2)
