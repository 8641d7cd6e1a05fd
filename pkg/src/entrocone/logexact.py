"""Exact arithmetic on rational linear combinations of logarithms of primes.

Every Shannon entropy of a finite distribution with rational probabilities
can be written as ``sum_p q_p * log p`` with finitely many primes ``p`` and
rational coefficients ``q_p``.  Logarithms of distinct primes are linearly
independent over the rationals, so the coefficient map is a faithful
canonical form: two values are equal as real numbers iff their maps are
identical.  That makes equality, and hence zero-testing, purely structural.

Questions the canonical form cannot answer by inspection (the sign of a
nonzero value, a ceiling, a rounded decimal) are settled by interval
arithmetic at increasing working precision.  Refinement always terminates:
zero has been excluded exactly beforehand, so a small enough enclosure must
separate from the critical point.

A :class:`LogLinear` value is unit-free.  It stands for ``log x`` of the
positive real ``x = prod_p p**q_p`` in whatever base the caller prefers;
ordering, integrality tests and ceilings depend only on ``x``.  The base
matters for decimal display only, hence the three renderers
:meth:`LogLinear.approx_bits`, :meth:`LogLinear.approx_ln` and
:meth:`LogLinear.approx_exp`.
"""

from __future__ import annotations

import math
import threading
from enum import IntEnum, unique
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from mpmath.ctx_iv import MPIntervalContext

__all__ = [
    "LogLinear",
    "PrecisionExhausted",
    "Sign",
    "from_log_int",
    "from_log_rational",
]

_PREC_START = 64
_PREC_CAP = 1 << 16


class PrecisionExhausted(ArithmeticError):
    """Interval refinement hit the precision cap without resolving.

    Cannot happen for the sign of a nonzero value; guards against misuse of
    the ceiling/rounding helpers on values they were not meant for.
    """


@unique
class Sign(IntEnum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _factorize(m: int) -> dict[int, int]:
    """Prime factorization by trial division (inputs are desk-scale)."""
    factors: dict[int, int] = {}
    d = 2
    while d * d <= m:
        while m % d == 0:
            factors[d] = factors.get(d, 0) + 1
            m //= d
        d += 1 if d == 2 else 2
    if m > 1:
        factors[m] = factors.get(m, 0) + 1
    return factors


# Interval contexts are reused across calls; they are never mutated after
# creation, so sharing them between threads is safe.
_CTX_LOCK = threading.Lock()
_CTX_CACHE: dict[int, MPIntervalContext] = {}


def _ctx(prec: int) -> MPIntervalContext:
    with _CTX_LOCK:
        ctx = _CTX_CACHE.get(prec)
        if ctx is None:
            ctx = MPIntervalContext()
            ctx.prec = prec
            _CTX_CACHE[prec] = ctx
    return ctx


def _raw_to_fraction(raw) -> Fraction:
    # raw is an mpf backing tuple (sign, mantissa, exponent, bitcount)
    sign, man, exp, _ = raw
    f = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -f if sign else f


class LogLinear:
    """An exact real of the form ``sum_p q_p * log p`` over primes.

    Instances are immutable and hashable.  Arithmetic (`+`, `-`, scaling by
    a rational) stays inside the class; comparisons are exact and decidable.
    """

    __slots__ = ("_terms", "_key")

    def __init__(self, terms: Mapping[int, Fraction | int | str] = ()):
        canonical: dict[int, Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for p, q in items:
            p = int(p)
            q = Fraction(q)
            if q == 0:
                continue
            if not _is_prime(p):
                raise ValueError(f"key {p} is not prime")
            canonical[p] = canonical.get(p, 0) + q
        object.__setattr__(self, "_terms", {p: q for p, q in sorted(canonical.items()) if q != 0})
        object.__setattr__(self, "_key", tuple(self._terms.items()))

    def __setattr__(self, name, value):  # immutability
        raise AttributeError("LogLinear values are immutable")

    # -- construction --------------------------------------------------

    @classmethod
    def zero(cls) -> "LogLinear":
        return cls()

    @classmethod
    def from_log_int(cls, m: int) -> "LogLinear":
        """The value ``log m`` for a positive integer ``m`` (``log 1 = 0``)."""
        if m <= 0:
            raise ValueError(f"log of nonpositive integer {m}")
        return cls(_factorize(m)) if m > 1 else cls()

    @classmethod
    def from_log_rational(cls, a: int, b: int) -> "LogLinear":
        """The value ``log(a/b)`` for positive integers ``a`` and ``b``."""
        return cls.from_log_int(a) - cls.from_log_int(b)

    # -- structure ------------------------------------------------------

    @property
    def terms(self) -> Mapping[int, Fraction]:
        """Prime-to-coefficient map, nonzero entries only (read-only copy)."""
        return dict(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LogLinear):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        if not self._terms:
            return "LogLinear(0)"
        parts = [f"{q}*log({p})" for p, q in self._terms.items()]
        return "LogLinear(" + " + ".join(parts) + ")"

    # -- linear structure -------------------------------------------------

    def __add__(self, other: "LogLinear") -> "LogLinear":
        if not isinstance(other, LogLinear):
            return NotImplemented
        merged = dict(self._terms)
        for p, q in other._terms.items():
            merged[p] = merged.get(p, 0) + q
        return LogLinear(merged)

    def __sub__(self, other: "LogLinear") -> "LogLinear":
        if not isinstance(other, LogLinear):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> "LogLinear":
        return LogLinear({p: -q for p, q in self._terms.items()})

    def scale(self, q) -> "LogLinear":
        """Multiply by an exact rational scalar."""
        q = Fraction(q)
        return LogLinear({p: q * c for p, c in self._terms.items()})

    def __mul__(self, q) -> "LogLinear":
        if isinstance(q, (int, Fraction)):
            return self.scale(q)
        return NotImplemented

    __rmul__ = __mul__

    # -- exact decision procedures ---------------------------------------

    def _log_enclosure(self, prec: int) -> tuple[Fraction, Fraction]:
        """Rational interval containing ``sum q_p * ln p`` at given precision."""
        ctx = _ctx(prec)
        acc = ctx.mpf(0)
        for p, q in self._terms.items():
            acc += ctx.log(ctx.mpf(p)) * (ctx.mpf(q.numerator) / ctx.mpf(q.denominator))
        lo, hi = acc._mpi_
        return _raw_to_fraction(lo), _raw_to_fraction(hi)

    def _exp_enclosure(self, prec: int) -> tuple[Fraction, Fraction]:
        """Rational interval containing the antilog ``prod p**q_p``."""
        ctx = _ctx(prec)
        acc = ctx.mpf(0)
        for p, q in self._terms.items():
            acc += ctx.log(ctx.mpf(p)) * (ctx.mpf(q.numerator) / ctx.mpf(q.denominator))
        lo, hi = ctx.exp(acc)._mpi_
        return _raw_to_fraction(lo), _raw_to_fraction(hi)

    def sign(self) -> Sign:
        """Exact sign; decidable because the zero test is structural."""
        if not self._terms:
            return Sign.ZERO
        prec = _PREC_START
        while prec <= _PREC_CAP:
            lo, hi = self._log_enclosure(prec)
            if lo > 0:
                return Sign.POSITIVE
            if hi < 0:
                return Sign.NEGATIVE
            prec *= 2
        raise PrecisionExhausted(f"sign of {self!r} unresolved at {_PREC_CAP} bits")

    def is_nonnegative(self) -> bool:
        return self.sign() != Sign.NEGATIVE

    def __lt__(self, other: "LogLinear") -> bool:
        return (self - other).sign() == Sign.NEGATIVE

    def __le__(self, other: "LogLinear") -> bool:
        return (self - other).sign() != Sign.POSITIVE

    def __gt__(self, other: "LogLinear") -> bool:
        return (self - other).sign() == Sign.POSITIVE

    def __ge__(self, other: "LogLinear") -> bool:
        return (self - other).sign() != Sign.NEGATIVE

    def as_log_natural(self) -> Optional[int]:
        """Return ``m`` iff the value is ``log m`` for a natural ``m``.

        Holds exactly when every coefficient is a nonnegative integer; the
        zero value is ``log 1``.
        """
        m = 1
        for p, q in self._terms.items():
            if q.denominator != 1 or q < 0:
                return None
            m *= p ** q.numerator
        return m

    def as_log_fraction(self) -> Optional[Fraction]:
        """Return ``x`` as an exact fraction iff the value is ``log x`` with
        ``x`` rational, i.e. iff every coefficient is an integer."""
        x = Fraction(1)
        for p, q in self._terms.items():
            if q.denominator != 1:
                return None
            x *= Fraction(p) ** q.numerator
        return x

    def pow2_ceil(self) -> int:
        """Ceiling of the antilog ``prod p**q_p`` of a nonnegative value.

        With integer coefficients the antilog is an exact rational and the
        ceiling is computed exactly.  Otherwise the antilog is irrational
        (unique factorization forbids rational values with fractional
        exponents), so no integer boundary can be hit and interval
        refinement terminates.
        """
        if self.sign() == Sign.NEGATIVE:
            raise ValueError("ceiling of an antilog below 1 requested on a negative value")
        exact = self.as_log_fraction()
        if exact is not None:
            return math.ceil(exact)
        prec = _PREC_START
        while prec <= _PREC_CAP:
            lo, hi = self._exp_enclosure(prec)
            if math.ceil(lo) == math.ceil(hi):
                return math.ceil(lo)
            prec *= 2
        raise PrecisionExhausted(f"ceiling of antilog of {self!r} unresolved at {_PREC_CAP} bits")

    # -- decimal display --------------------------------------------------

    def _approx(self, digits: int, kind: str) -> str:
        if digits < 1:
            raise ValueError("digits must be >= 1")
        scalepow = Fraction(10) ** digits

        exact: Optional[Fraction] = None
        if kind == "ln":
            if not self._terms:
                exact = Fraction(0)
        elif kind == "bits":
            if all(p == 2 for p in self._terms):
                exact = self._terms.get(2, Fraction(0))
        elif kind == "exp":
            exact = self.as_log_fraction()
        else:
            raise ValueError(f"unknown display kind {kind!r}")

        if exact is not None:
            scaled = round(exact * scalepow)  # ties to even
            return _format_scaled(scaled, digits)

        ln2 = LogLinear.from_log_int(2)
        prec = _PREC_START
        while prec <= _PREC_CAP:
            if kind == "exp":
                lo, hi = self._exp_enclosure(prec)
            elif kind == "ln":
                lo, hi = self._log_enclosure(prec)
            else:  # bits: divide the natural-log enclosure by an ln 2 enclosure
                lo, hi = self._log_enclosure(prec)
                dlo, dhi = ln2._log_enclosure(prec)
                bounds = [lo / dlo, lo / dhi, hi / dlo, hi / dhi]
                lo, hi = min(bounds), max(bounds)
            nlo = math.floor(lo * scalepow + Fraction(1, 2))
            nhi = math.floor(hi * scalepow + Fraction(1, 2))
            if nlo == nhi:
                return _format_scaled(nlo, digits)
            prec *= 2
        raise PrecisionExhausted(f"display of {self!r} unresolved at {_PREC_CAP} bits")

    def approx_ln(self, digits: int = 4) -> str:
        """Correctly rounded decimal of the natural-log value."""
        return self._approx(digits, "ln")

    def approx_bits(self, digits: int = 4) -> str:
        """Correctly rounded decimal of the value in bits (base-2 logs)."""
        return self._approx(digits, "bits")

    def approx_exp(self, digits: int = 4) -> str:
        """Correctly rounded decimal of the antilog ``prod p**q_p``."""
        return self._approx(digits, "exp")

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        """JSON object with exact terms plus an advisory bits rendering."""
        return {
            "log_terms": {str(p): f"{q.numerator}/{q.denominator}" for p, q in self._terms.items()},
            "bits_approx": self.approx_bits(4),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "LogLinear":
        if not isinstance(obj, Mapping) or "log_terms" not in obj:
            raise ValueError("expected an object with a 'log_terms' field")
        terms = {}
        for key, val in obj["log_terms"].items():
            try:
                p = int(key)
            except ValueError:
                raise ValueError(f"prime key {key!r} is not an integer") from None
            terms[p] = Fraction(val)
        return cls(terms)


def _format_scaled(scaled: int, digits: int) -> str:
    sign = "-" if scaled < 0 else ""
    body = str(abs(scaled)).rjust(digits + 1, "0")
    return f"{sign}{body[:-digits]}.{body[-digits:]}"


def from_log_int(m: int) -> LogLinear:
    """Module-level alias for :meth:`LogLinear.from_log_int`."""
    return LogLinear.from_log_int(m)


def from_log_rational(a: int, b: int) -> LogLinear:
    """Module-level alias for :meth:`LogLinear.from_log_rational`."""
    return LogLinear.from_log_rational(a, b)


def dot(coeffs: Iterable[int], values: Iterable[LogLinear]) -> LogLinear:
    """Integer linear combination of exact values."""
    acc = LogLinear.zero()
    for c, v in zip(coeffs, values):
        if c:
            acc = acc + v.scale(c)
    return acc
