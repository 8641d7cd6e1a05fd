"""Rational joint PMFs, exact entropy vectors, quasi-uniformity checks.

A joint PMF over n finite variables is stored support-only with exact
rational masses.  Writing the masses as a_x / N over a common denominator
N, the Shannon entropy is

    H = log N - (1/N) * sum_x a_x * log a_x,

which is an exact :class:`~entrocone.logexact.LogLinear` value.  The
entropy vector collects the entropies of all nonempty-subset marginals in
canonical subset order.

A random vector is quasi-uniform when every marginal puts a single
probability value on its support; the check reports either all support
sizes, or a concrete offending subset with two support points of different
mass.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

from .logexact import LogLinear
from .subsets import Subset, canonical_order, subset_index_map, subset_name

__all__ = [
    "EntropyVector",
    "JointPMF",
    "PMFFormatError",
    "QUVerdict",
    "QUWitness",
    "entropy",
    "entropy_vector",
    "independent_product",
    "is_quasi_uniform",
    "marginalize",
    "parse_pmf",
    "serialize_pmf",
]


class PMFFormatError(ValueError):
    """A PMF file or PMF construction violates the format contract."""


class JointPMF:
    """Support-only joint distribution with exact rational masses.

    `names` optionally maps each variable to display symbols for the file
    format; it is presentation only and excluded from equality.
    """

    __slots__ = ("n", "alphabet_sizes", "mass", "names", "__dict__")

    def __init__(
        self,
        alphabet_sizes: Sequence[int],
        mass: Mapping[tuple[int, ...], Fraction],
        names: Optional[Sequence[Optional[Sequence[str]]]] = None,
    ):
        sizes = tuple(int(s) for s in alphabet_sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise PMFFormatError("alphabet sizes must be positive")
        clean: dict[tuple[int, ...], Fraction] = {}
        total = Fraction(0)
        for point, p in mass.items():
            point = tuple(int(x) for x in point)
            p = Fraction(p)
            if len(point) != len(sizes):
                raise PMFFormatError(f"support point {point} has wrong arity")
            if any(not 0 <= x < s for x, s in zip(point, sizes)):
                raise PMFFormatError(f"support point {point} outside alphabets {sizes}")
            if p <= 0:
                raise PMFFormatError(f"mass of {point} must be strictly positive")
            if point in clean:
                raise PMFFormatError(f"duplicate support point {point}")
            clean[point] = p
            total += p
        if total != 1:
            raise PMFFormatError(f"mass sum != 1 (got {total})")
        self.n = len(sizes)
        self.alphabet_sizes = sizes
        self.mass = dict(sorted(clean.items()))
        if names is not None:
            names = tuple(tuple(v) if v is not None else None for v in names)
            if len(names) != self.n:
                raise PMFFormatError("names must cover every variable or be omitted")
            for i, (group, s) in enumerate(zip(names, sizes)):
                if group is not None and len(group) != s:
                    raise PMFFormatError(f"names for variable {i + 1} do not match alphabet size")
        self.names = names

    def __eq__(self, other) -> bool:
        if not isinstance(other, JointPMF):
            return NotImplemented
        return (
            self.alphabet_sizes == other.alphabet_sizes and self.mass == other.mass
        )

    def __hash__(self):
        return hash((self.alphabet_sizes, tuple(self.mass.items())))

    def __repr__(self) -> str:
        return f"JointPMF(n={self.n}, sizes={self.alphabet_sizes}, support={len(self.mass)})"

    @cached_property
    def common_denominator(self) -> int:
        return math.lcm(*(p.denominator for p in self.mass.values()))

    @cached_property
    def integer_counts(self) -> dict[tuple[int, ...], int]:
        """Masses as integers a_x over the common denominator."""
        N = self.common_denominator
        return {x: int(p * N) for x, p in self.mass.items()}

    def support(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.mass)


def marginalize(pmf: JointPMF, alpha: Iterable[int]) -> JointPMF:
    """Marginal PMF over the variables in `alpha` (1-based), in index order."""
    alpha = sorted(set(alpha))
    if not alpha:
        raise PMFFormatError("cannot marginalize onto the empty set")
    if not all(1 <= i <= pmf.n for i in alpha):
        raise PMFFormatError(f"subset {alpha} not within 1..{pmf.n}")
    idx = [i - 1 for i in alpha]
    out: dict[tuple[int, ...], Fraction] = {}
    for point, p in pmf.mass.items():
        key = tuple(point[i] for i in idx)
        out[key] = out.get(key, Fraction(0)) + p
    names = None
    if pmf.names is not None:
        names = [pmf.names[i] for i in idx]
    return JointPMF([pmf.alphabet_sizes[i] for i in idx], out, names)


def entropy(pmf: JointPMF) -> LogLinear:
    """Exact Shannon entropy, unit-free (render in bits via approx_bits)."""
    N = pmf.common_denominator
    multiplicities: dict[int, int] = {}
    for a in pmf.integer_counts.values():
        multiplicities[a] = multiplicities.get(a, 0) + 1
    acc = LogLinear.from_log_int(N)
    for a, times in multiplicities.items():
        if a > 1:
            acc = acc - LogLinear.from_log_int(a).scale(Fraction(times * a, N))
    return acc


class EntropyVector:
    """Exact entries ``h_alpha`` for all nonempty subsets, canonical order."""

    __slots__ = ("n", "coords")

    def __init__(self, n: int, coords: Sequence[LogLinear]):
        order = canonical_order(n)
        coords = tuple(coords)
        if len(coords) != len(order):
            raise ValueError(f"need {len(order)} coordinates for n={n}, got {len(coords)}")
        if not all(isinstance(c, LogLinear) for c in coords):
            raise TypeError("coordinates must be LogLinear values")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "coords", coords)

    def __setattr__(self, name, value):
        raise AttributeError("EntropyVector is immutable")

    def coord(self, alpha: Iterable[int]) -> LogLinear:
        return self.coords[subset_index_map(self.n)[frozenset(alpha)]]

    def __eq__(self, other) -> bool:
        if not isinstance(other, EntropyVector):
            return NotImplemented
        return self.n == other.n and self.coords == other.coords

    def __hash__(self):
        return hash((self.n, self.coords))

    def __add__(self, other: "EntropyVector") -> "EntropyVector":
        if not isinstance(other, EntropyVector) or other.n != self.n:
            return NotImplemented
        return EntropyVector(self.n, [a + b for a, b in zip(self.coords, other.coords)])

    def __repr__(self) -> str:
        pairs = ", ".join(
            f"{subset_name(a)}:{c.approx_bits(3)}" for a, c in zip(canonical_order(self.n), self.coords)
        )
        return f"EntropyVector(bits {pairs})"

    def permute(self, perm: Mapping[int, int]) -> "EntropyVector":
        """Coordinate action induced by relabeling the variables."""
        order = canonical_order(self.n)
        index = subset_index_map(self.n)
        out: list[LogLinear] = [None] * len(order)  # type: ignore[list-item]
        for alpha, c in zip(order, self.coords):
            out[index[frozenset(perm[i] for i in alpha)]] = c
        return EntropyVector(self.n, out)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "order": [subset_name(a) for a in canonical_order(self.n)],
            "coords": [c.to_json() for c in self.coords],
        }


def entropy_vector(pmf: JointPMF) -> EntropyVector:
    coords = [entropy(marginalize(pmf, alpha)) for alpha in canonical_order(pmf.n)]
    return EntropyVector(pmf.n, coords)


@dataclass(frozen=True)
class QUWitness:
    """Two support points of one marginal carrying different probabilities."""

    alpha: Subset
    point_a: tuple[int, ...]
    mass_a: Fraction
    point_b: tuple[int, ...]
    mass_b: Fraction


@dataclass(frozen=True)
class QUVerdict:
    is_qu: bool
    support_sizes: Optional[dict[Subset, int]] = None
    witness: Optional[QUWitness] = None


def is_quasi_uniform(pmf: JointPMF) -> QUVerdict:
    """Check that every nonempty marginal is constant on its support."""
    sizes: dict[Subset, int] = {}
    for alpha in canonical_order(pmf.n):
        marg = marginalize(pmf, alpha)
        items = iter(marg.mass.items())
        first_point, first_mass = next(items)
        for point, p in items:
            if p != first_mass:
                return QUVerdict(False, witness=QUWitness(alpha, first_point, first_mass, point, p))
        sizes[alpha] = len(marg.mass)
    return QUVerdict(True, support_sizes=sizes)


def independent_product(p: JointPMF, q: JointPMF) -> JointPMF:
    """Variable-wise independent pairing of two PMFs over the same n.

    Variable i of the result ranges over the product alphabet of the two
    i-th variables (encoded as a*size_q + b); entropy vectors add.
    """
    if p.n != q.n:
        raise PMFFormatError("independent product needs matching variable counts")
    sizes = tuple(a * b for a, b in zip(p.alphabet_sizes, q.alphabet_sizes))
    mass: dict[tuple[int, ...], Fraction] = {}
    for xp, mp_ in p.mass.items():
        for xq, mq in q.mass.items():
            key = tuple(a * sq + b for a, b, sq in zip(xp, xq, q.alphabet_sizes))
            mass[key] = mp_ * mq
    return JointPMF(sizes, mass)


def permute_variables(pmf: JointPMF, perm: Mapping[int, int]) -> JointPMF:
    """Relabel variable roles: new variable perm[i] plays old variable i."""
    slot: list[int] = [0] * pmf.n
    for i in range(1, pmf.n + 1):
        slot[perm[i] - 1] = i - 1
    sizes = [pmf.alphabet_sizes[slot[j]] for j in range(pmf.n)]
    mass = {tuple(x[slot[j]] for j in range(pmf.n)): p for x, p in pmf.mass.items()}
    names = None
    if pmf.names is not None:
        names = [pmf.names[slot[j]] for j in range(pmf.n)]
    return JointPMF(sizes, mass, names)


# ---------------------------------------------------------------------------
# PMF file format
#
#   # comment
#   pmf n=3 sizes=4,4,4
#   names 1=a,b,c,d
#   0 1 2 : 1/48        (or named symbols where a names line was given)
# ---------------------------------------------------------------------------

_HEADER_RE = re.compile(r"^pmf\s+n=(\d+)\s+sizes=([0-9,]+)\s*$")
_NAMES_RE = re.compile(r"^names\s+(\d+)=(\S+)\s*$")
_MASS_RE = re.compile(r"^([+-]?\d+)(?:/(\d+))?$")


def parse_pmf(text: str) -> JointPMF:
    """Parse the PMF text format; raises PMFFormatError with a line number."""
    n = None
    sizes: tuple[int, ...] = ()
    names: list[Optional[tuple[str, ...]]] = []
    symbol_maps: list[Optional[dict[str, int]]] = []
    mass: dict[tuple[int, ...], Fraction] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            m = _HEADER_RE.match(line)
            if not m:
                raise PMFFormatError(f"line {lineno}: malformed header (expected 'pmf n=.. sizes=..')")
            n = int(m.group(1))
            sizes = tuple(int(s) for s in m.group(2).split(",") if s)
            if n < 1 or len(sizes) != n or any(s < 1 for s in sizes):
                raise PMFFormatError(f"line {lineno}: header sizes do not match n={n}")
            names = [None] * n
            symbol_maps = [None] * n
            continue
        m = _NAMES_RE.match(line)
        if m:
            i = int(m.group(1))
            if not 1 <= i <= n:
                raise PMFFormatError(f"line {lineno}: names for unknown variable {i}")
            group = tuple(m.group(2).split(","))
            if len(group) != sizes[i - 1] or len(set(group)) != len(group):
                raise PMFFormatError(f"line {lineno}: names for variable {i} must be {sizes[i-1]} distinct symbols")
            names[i - 1] = group
            symbol_maps[i - 1] = {s: k for k, s in enumerate(group)}
            continue
        if ":" not in line:
            raise PMFFormatError(f"line {lineno}: expected 'x1 .. xn : mass'")
        left, _, right = line.partition(":")
        tokens = left.split()
        if len(tokens) != n:
            raise PMFFormatError(f"line {lineno}: expected {n} symbols before ':'")
        point = []
        for i, tok in enumerate(tokens):
            table = symbol_maps[i]
            if table is not None and tok in table:
                point.append(table[tok])
            elif tok.lstrip("+-").isdigit():
                point.append(int(tok))
            else:
                raise PMFFormatError(f"line {lineno}: unknown symbol {tok!r} for variable {i + 1}")
            if not 0 <= point[-1] < sizes[i]:
                raise PMFFormatError(f"line {lineno}: symbol {tok!r} out of range for variable {i + 1}")
        key = tuple(point)
        if key in mass:
            raise PMFFormatError(f"line {lineno}: duplicate tuple {key}")
        mtok = right.strip()
        fm = _MASS_RE.match(mtok)
        if not fm:
            hint = " (decimal masses are rejected; use an exact num/den rational)" if "." in mtok else ""
            raise PMFFormatError(f"line {lineno}: malformed mass {mtok!r}{hint}")
        mass[key] = Fraction(int(fm.group(1)), int(fm.group(2) or 1))
        if mass[key] <= 0:
            raise PMFFormatError(f"line {lineno}: mass must be strictly positive")

    if n is None:
        raise PMFFormatError("empty input: missing 'pmf' header")
    if not mass:
        raise PMFFormatError("no support points given")
    try:
        return JointPMF(sizes, mass, names if any(g is not None for g in names) else None)
    except PMFFormatError as exc:
        raise PMFFormatError(str(exc)) from None


def serialize_pmf(pmf: JointPMF) -> str:
    """Emit the PMF text format; parse(serialize(p)) == p."""
    lines = [f"pmf n={pmf.n} sizes={','.join(str(s) for s in pmf.alphabet_sizes)}"]
    if pmf.names is not None:
        for i, group in enumerate(pmf.names, start=1):
            if group is not None:
                lines.append(f"names {i}={','.join(group)}")
    for point in sorted(pmf.mass):
        p = pmf.mass[point]
        symbols = []
        for i, x in enumerate(point):
            group = pmf.names[i] if pmf.names is not None else None
            symbols.append(group[x] if group is not None else str(x))
        lines.append(f"{' '.join(symbols)} : {p.numerator}/{p.denominator}")
    return "\n".join(lines) + "\n"
