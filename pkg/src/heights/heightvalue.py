"""Exact log-linear numbers q0 + sum_p q_p*log(p) + r.

The exact parts (q0 and the log coefficients) are Fractions; r is an
ordinary float remainder for archimedean contributions.  real_exact
marks values whose remainder is exactly zero, so that purely
non-archimedean identities can be tested with exact equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import NonPrimeLabel

RationalLike = int | str | Fraction


def _frac(x: RationalLike) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def is_prime(k: int) -> bool:
    if k < 2:
        return False
    if k < 4:
        return True
    if k % 2 == 0:
        return False
    f = 3
    while f * f <= k:
        if k % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class HeightValue:
    """Immutable exact height value in canonical form."""

    const_part: Fraction = Fraction(0)
    log_terms: Mapping[int, Fraction] = field(default_factory=dict)
    real_part: float = 0.0
    real_exact: bool = True

    def __post_init__(self):
        object.__setattr__(self, "const_part", _frac(self.const_part))
        terms = {}
        for p, c in self.log_terms.items():
            p = int(p)
            if not is_prime(p):
                raise NonPrimeLabel(f"log label {p} is not prime")
            c = _frac(c)
            if c != 0:
                terms[p] = terms.get(p, Fraction(0)) + c
        terms = {p: c for p, c in sorted(terms.items()) if c != 0}
        object.__setattr__(self, "log_terms", terms)
        object.__setattr__(self, "real_part", float(self.real_part))
        if self.real_part != 0.0:
            object.__setattr__(self, "real_exact", False)

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other: "HeightValue") -> "HeightValue":
        other = as_height(other)
        logs = dict(self.log_terms)
        for p, c in other.log_terms.items():
            logs[p] = logs.get(p, Fraction(0)) + c
        return HeightValue(
            self.const_part + other.const_part,
            logs,
            self.real_part + other.real_part,
            self.real_exact and other.real_exact,
        )

    def __radd__(self, other):
        if other == 0:
            return self
        return as_height(other) + self

    def __neg__(self) -> "HeightValue":
        return HeightValue(
            -self.const_part,
            {p: -c for p, c in self.log_terms.items()},
            -self.real_part,
            self.real_exact,
        )

    def __sub__(self, other: "HeightValue") -> "HeightValue":
        return self + (-as_height(other))

    def scale(self, q: RationalLike) -> "HeightValue":
        q = _frac(q)
        return HeightValue(
            q * self.const_part,
            {p: q * c for p, c in self.log_terms.items()},
            float(q) * self.real_part,
            self.real_exact,
        )

    def __mul__(self, q):
        return self.scale(q)

    __rmul__ = __mul__

    def shift_real(self, r: float) -> "HeightValue":
        return HeightValue(self.const_part, self.log_terms,
                           self.real_part + r, self.real_exact and r == 0.0)

    # -- queries ------------------------------------------------------

    def evaluate(self) -> float:
        total = float(self.const_part)
        for p, c in self.log_terms.items():
            total += float(c) * math.log(p)
        return total + self.real_part

    def is_zero(self, real_tol: float = 1e-12) -> bool:
        return (self.const_part == 0 and not self.log_terms
                and abs(self.real_part) <= real_tol)

    def exact_eq(self, other: "HeightValue") -> bool:
        """Exact equality of the exact parts; requires both remainders exact."""
        other = as_height(other)
        return (self.real_exact and other.real_exact
                and self.const_part == other.const_part
                and self.log_terms == other.log_terms)

    def close_to(self, other: "HeightValue", real_tol: float = 1e-12) -> bool:
        other = as_height(other)
        return (self.const_part == other.const_part
                and self.log_terms == other.log_terms
                and abs(self.real_part - other.real_part) <= real_tol)

    def __str__(self) -> str:
        parts = []
        if self.const_part != 0 or (not self.log_terms and self.real_part == 0):
            parts.append(str(self.const_part))
        for p, c in self.log_terms.items():
            parts.append(f"{c}*log {p}")
        if self.real_part != 0.0:
            parts.append(repr(self.real_part))
        return " + ".join(parts)

    # -- serialization ------------------------------------------------

    def to_json(self) -> dict:
        return {
            "const": str(self.const_part),
            "logs": {str(p): str(c) for p, c in self.log_terms.items()},
            "real": self.real_part,
            "real_exact": self.real_exact,
        }

    @staticmethod
    def from_json(obj: dict) -> "HeightValue":
        logs = {}
        for k, v in obj.get("logs", {}).items():
            kk = int(k)
            if not is_prime(kk):
                raise NonPrimeLabel(f"log label {k} is not prime")
            logs[kk] = Fraction(v)
        return HeightValue(
            Fraction(obj.get("const", 0)),
            logs,
            float(obj.get("real", 0.0)),
            bool(obj.get("real_exact", obj.get("real", 0.0) == 0.0)),
        )


ZERO = HeightValue()


def as_height(x) -> HeightValue:
    if isinstance(x, HeightValue):
        return x
    if isinstance(x, (int, Fraction)):
        return HeightValue(const_part=Fraction(x))
    if isinstance(x, float):
        return HeightValue(real_part=x)
    raise TypeError(f"cannot interpret {x!r} as HeightValue")


def canonicalize(v) -> HeightValue:
    """Return the canonical form of raw (const, logs, real) data.

    The constructor already enforces canonical form; this entry point
    additionally accepts plain dicts so that callers can validate raw
    data before building models.
    """
    if isinstance(v, HeightValue):
        return HeightValue(v.const_part, v.log_terms, v.real_part, v.real_exact)
    if isinstance(v, dict):
        return HeightValue.from_json(v)
    return as_height(v)


def evaluate(v: HeightValue) -> float:
    return as_height(v).evaluate()
