"""The polymatroid cone, its extreme rays for n = 3, and face geometry.

The cone is cut out by the elemental information inequalities: for each
variable i, ``h_[n] >= h_[n]\\i`` (monotonicity), and for each pair i < j
and each subset beta disjoint from {i, j},
``h_{i beta} + h_{j beta} >= h_beta + h_{ij beta}`` (submodularity), with
the convention ``h_empty = 0``.

For three variables the cone is also the conic hull of eight integer
extreme rays; conic membership questions are decided exactly.  Because
every entropy coordinate is a rational combination of logarithms of
primes, and the generators have integer entries, a decomposition
``h = sum_j lambda_j e_j`` splits into one rational linear system per
prime.  By Caratheodory it suffices to examine maximal linearly
independent subsets of the generators, whose square systems have unique
solutions, so feasibility is decided by exhaustive exact solves over a
fixed subset order - no LP machinery, and certificates are exact.

Strictness (relative interior) is decided through tight sets: the minimal
face of the cone containing h is determined by exactly which elemental
inequalities hold with equality at h, and h is strictly inside a face iff
its tight set coincides with the face's.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, unique
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from typing import Iterable, Mapping, Optional, Sequence

from .distributions import EntropyVector
from .logexact import LogLinear, Sign
from .subsets import Subset, canonical_order, subset_index_map, subset_name

__all__ = [
    "ConicCertificate",
    "FaceLocation",
    "FacePosition",
    "FaceSpec",
    "GammaVerdict",
    "LinearFunctional",
    "RAY_ORDER",
    "Ray",
    "combination",
    "cone_membership",
    "elemental_inequalities",
    "face_catalogue",
    "face_for_generators",
    "in_gamma_n",
    "permute_ray",
    "ray_by_label",
    "sorted_rays",
    "strict_in_face",
    "variable_permutations",
]

_MAX_VARS = 6  # desk-scale cap for elemental inequality generation


@unique
class Ray(Enum):
    """The eight extreme rays of the three-variable cone."""

    R1 = "1"
    R2 = "2"
    R3 = "3"
    R12 = "12"
    R13 = "13"
    R23 = "23"
    R123 = "123"
    R123P = "123p"

    @property
    def label(self) -> str:
        return self.value

    @property
    def vector(self) -> tuple[int, ...]:
        return _RAY_VECTORS[self]

    def __repr__(self) -> str:
        return f"Ray({self.value})"


RAY_ORDER: tuple[Ray, ...] = (
    Ray.R1, Ray.R2, Ray.R3, Ray.R12, Ray.R13, Ray.R23, Ray.R123, Ray.R123P,
)

# Coordinates in canonical subset order h1,h2,h3,h12,h13,h23,h123.
_RAY_VECTORS: dict[Ray, tuple[int, ...]] = {
    Ray.R1: (1, 0, 0, 1, 1, 0, 1),
    Ray.R2: (0, 1, 0, 1, 0, 1, 1),
    Ray.R3: (0, 0, 1, 0, 1, 1, 1),
    Ray.R12: (1, 1, 0, 1, 1, 1, 1),
    Ray.R13: (1, 0, 1, 1, 1, 1, 1),
    Ray.R23: (0, 1, 1, 1, 1, 1, 1),
    Ray.R123: (1, 1, 1, 1, 1, 1, 1),
    Ray.R123P: (1, 1, 1, 2, 2, 2, 2),
}

_RAY_BY_LABEL = {r.value: r for r in Ray}
_RAY_RANK = {r: i for i, r in enumerate(RAY_ORDER)}


def ray_by_label(label: str) -> Ray:
    try:
        return _RAY_BY_LABEL[label]
    except KeyError:
        raise ValueError(f"unknown ray label {label!r}") from None


def sorted_rays(rays: Iterable[Ray]) -> tuple[Ray, ...]:
    return tuple(sorted(set(rays), key=_RAY_RANK.__getitem__))


def variable_permutations() -> tuple[dict[int, int], ...]:
    """All relabelings of the three variable indices."""
    return tuple({1: a, 2: b, 3: c} for a, b, c in permutations((1, 2, 3)))


def permute_ray(ray: Ray, perm: Mapping[int, int]) -> Ray:
    if ray is Ray.R123P:
        return ray
    image = frozenset(perm[i] for i in (int(ch) for ch in ray.value))
    return ray_by_label(subset_name(image))


# ---------------------------------------------------------------------------
# Elemental inequalities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearFunctional:
    """Integer functional over entropy coordinates; nonneg on the cone."""

    name: str
    coeffs: tuple[int, ...]

    def evaluate(self, h: EntropyVector) -> LogLinear:
        acc = LogLinear.zero()
        for c, v in zip(self.coeffs, h.coords):
            if c:
                acc = acc + v.scale(c)
        return acc

    def evaluate_int(self, vec: Sequence[int]) -> int:
        return sum(c * v for c, v in zip(self.coeffs, vec))


@lru_cache(maxsize=None)
def elemental_inequalities(n: int) -> tuple[LinearFunctional, ...]:
    """Monotonicity and submodularity functionals for n variables."""
    if not 1 <= n <= _MAX_VARS:
        raise ValueError(f"n must be within 1..{_MAX_VARS}")
    index = subset_index_map(n)
    dim = len(index)
    ground = frozenset(range(1, n + 1))
    out: list[LinearFunctional] = []
    for i in range(1, n + 1):
        coeffs = [0] * dim
        coeffs[index[ground]] += 1
        rest = ground - {i}
        if rest:
            coeffs[index[rest]] -= 1
        out.append(LinearFunctional(f"mono:{i}", tuple(coeffs)))
    for i, j in combinations(range(1, n + 1), 2):
        others = sorted(ground - {i, j})
        for k in range(len(others) + 1):
            for beta_tuple in combinations(others, k):
                beta = frozenset(beta_tuple)
                coeffs = [0] * dim
                coeffs[index[beta | {i}]] += 1
                coeffs[index[beta | {j}]] += 1
                if beta:
                    coeffs[index[beta]] -= 1
                coeffs[index[beta | {i, j}]] -= 1
                suffix = subset_name(beta) if beta else "-"
                out.append(LinearFunctional(f"submod:{i},{j}|{suffix}", tuple(coeffs)))
    return tuple(out)


@dataclass(frozen=True)
class GammaVerdict:
    in_cone: bool
    violated: Optional[LinearFunctional] = None
    value: Optional[LogLinear] = None

    def __bool__(self) -> bool:
        return self.in_cone


def in_gamma_n(h: EntropyVector) -> GammaVerdict:
    """Test all elemental inequalities; report the first violated one."""
    for fn in elemental_inequalities(h.n):
        val = fn.evaluate(h)
        if val.sign() == Sign.NEGATIVE:
            return GammaVerdict(False, fn, val)
    return GammaVerdict(True)


# ---------------------------------------------------------------------------
# Exact conic decomposition
# ---------------------------------------------------------------------------


def _solve_columns_multi(
    columns: Sequence[Sequence[int]], rhs_list: Sequence[Sequence[Fraction]]
) -> Optional[list[list[Fraction]]]:
    """Solve ``M x = b`` exactly for several right-hand sides at once.

    Returns one solution vector per rhs, or None when the columns are
    linearly dependent or any system is inconsistent.
    """
    k = len(columns)
    rows = len(columns[0]) if k else len(rhs_list[0])
    nrhs = len(rhs_list)
    aug = [
        [Fraction(columns[j][i]) for j in range(k)] + [rhs[i] for rhs in rhs_list]
        for i in range(rows)
    ]
    pivots: list[int] = []
    r = 0
    for c in range(k):
        pr = next((i for i in range(r, rows) if aug[i][c]), None)
        if pr is None:
            return None  # dependent columns: caller enumerates other subsets
        aug[r], aug[pr] = aug[pr], aug[r]
        pv = aug[r][c]
        aug[r] = [v / pv for v in aug[r]]
        for i in range(rows):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
    for i in range(r, rows):
        if any(aug[i][k + t] for t in range(nrhs)):
            return None
    sols = [[Fraction(0)] * k for _ in range(nrhs)]
    for row, c in enumerate(pivots):
        for t in range(nrhs):
            sols[t][c] = aug[row][k + t]
    return sols


def _column_rank(columns: Sequence[Sequence[int]]) -> int:
    if not columns:
        return 0
    rows = len(columns[0])
    mat = [[Fraction(columns[j][i]) for j in range(len(columns))] for i in range(rows)]
    rank = 0
    for c in range(len(columns)):
        pr = next((i for i in range(rank, rows) if mat[i][c]), None)
        if pr is None:
            continue
        mat[rank], mat[pr] = mat[pr], mat[rank]
        pv = mat[rank][c]
        mat[rank] = [v / pv for v in mat[rank]]
        for i in range(rows):
            if i != rank and mat[i][c]:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[rank])]
        rank += 1
    return rank


@dataclass(frozen=True)
class ConicCertificate:
    """Exact nonnegative coefficients reproducing the input vector."""

    coefficients: Mapping[Ray, LogLinear]

    def vector(self) -> EntropyVector:
        coords = [LogLinear.zero()] * 7
        for ray, lam in self.coefficients.items():
            coords = [c + lam.scale(e) for c, e in zip(coords, ray.vector)]
        return EntropyVector(3, coords)

    def support(self) -> tuple[Ray, ...]:
        return sorted_rays(r for r, lam in self.coefficients.items() if lam)

    def to_json(self) -> dict:
        return {
            "generators": [r.label for r in sorted_rays(self.coefficients)],
            "coefficients": {r.label: lam.to_json() for r, lam in sorted(self.coefficients.items(), key=lambda kv: _RAY_RANK[kv[0]])},
            "residual_zero": True,
        }


def combination(coefficients: Mapping[Ray, LogLinear]) -> EntropyVector:
    """Build ``sum_j lambda_j e_j`` as an exact entropy-space vector."""
    coords = [LogLinear.zero()] * 7
    for ray, lam in coefficients.items():
        coords = [c + lam.scale(e) for c, e in zip(coords, ray.vector)]
    return EntropyVector(3, coords)


def cone_membership(
    h: EntropyVector,
    generators: Iterable[Ray],
    exhaustive: bool = False,
):
    """Exact conic decomposition of h over the given generator rays.

    Returns the first all-nonnegative exact certificate under a fixed
    deterministic enumeration of maximal independent generator subsets, or
    None when no certificate exists.  With ``exhaustive=True`` returns the
    list of all distinct certificates found across those subsets.
    """
    if h.n != 3:
        raise ValueError("conic decomposition is defined for n = 3 vectors")
    gens = sorted_rays(generators)
    columns = [g.vector for g in gens]
    rank = _column_rank(columns)

    primes = sorted({p for c in h.coords for p in c.terms})
    rhs_list = [
        [c.terms.get(p, Fraction(0)) for c in h.coords] for p in primes
    ]
    if not primes:
        # the zero vector is the trivial conic combination
        zero_cert = ConicCertificate({g: LogLinear.zero() for g in gens})
        return [zero_cert] if exhaustive else zero_cert

    found: list[ConicCertificate] = []
    seen: set[tuple] = set()
    for subset in combinations(gens, rank):
        sols = _solve_columns_multi([g.vector for g in subset], rhs_list)
        if sols is None:
            continue
        lams = {
            g: LogLinear({p: sols[t][j] for t, p in enumerate(primes)})
            for j, g in enumerate(subset)
        }
        if any(lam.sign() == Sign.NEGATIVE for lam in lams.values()):
            continue
        coeffs = {g: lams.get(g, LogLinear.zero()) for g in gens}
        cert = ConicCertificate(coeffs)
        if cert.vector() != h:  # exactness guard; algebra should make this unreachable
            continue
        key = tuple(coeffs[g] for g in gens)
        if key in seen:
            continue
        seen.add(key)
        if not exhaustive:
            return cert
        found.append(cert)
    return found if exhaustive else None


# ---------------------------------------------------------------------------
# Faces of the three-variable cone
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FaceSpec:
    """A face described by its generator rays.

    `canonical` marks the 19 catalogued representatives (faces containing
    vectors that are not entropy vectors, one per relabeling orbit);
    `orbit` lists the distinct generator sets obtained by relabeling
    variables, the face's own set included.
    """

    generators: frozenset[Ray]
    dim: int
    canonical: bool
    orbit: tuple[frozenset[Ray], ...] = field(default=(), compare=False)

    def labels(self) -> tuple[str, ...]:
        return tuple(r.label for r in sorted_rays(self.generators))

    def to_json(self) -> dict:
        return {
            "generators": list(self.labels()),
            "dim": self.dim,
            "canonical": self.canonical,
            "orbit_size": len(self.orbit),
        }

    def __repr__(self) -> str:
        return f"FaceSpec({','.join(self.labels())}; dim={self.dim})"


_CANONICAL_FACE_LABELS: tuple[tuple[str, ...], ...] = (
    # 1-D
    ("123p",),
    # 2-D
    ("1", "123p"),
    ("12", "123p"),
    # 3-D
    ("1", "2", "123p"),
    ("12", "13", "123p"),
    ("1", "12", "123p"),
    ("1", "23", "123p"),
    # 4-D
    ("1", "2", "3", "123p"),
    ("1", "2", "12", "123p"),
    ("1", "2", "13", "123p"),
    ("1", "12", "13", "123p"),
    ("1", "12", "23", "123p"),
    ("12", "13", "23", "123", "123p"),
    # 5-D
    ("1", "2", "3", "12", "123p"),
    ("1", "2", "12", "13", "123p"),
    ("1", "2", "13", "23", "123p"),
    ("1", "12", "13", "23", "123", "123p"),
    # 6-D
    ("1", "2", "3", "12", "13", "123p"),
    ("1", "2", "12", "13", "23", "123", "123p"),
)


def _orbit_of(gens: frozenset[Ray]) -> tuple[frozenset[Ray], ...]:
    images = {frozenset(permute_ray(r, perm) for r in gens) for perm in variable_permutations()}
    return tuple(sorted(images, key=lambda s: tuple(_RAY_RANK[r] for r in sorted_rays(s))))


def _make_face(gens: frozenset[Ray], canonical: bool) -> FaceSpec:
    dim = _column_rank([g.vector for g in sorted_rays(gens)])
    return FaceSpec(gens, dim, canonical, _orbit_of(gens))


@lru_cache(maxsize=1)
def face_catalogue() -> tuple[FaceSpec, ...]:
    """The 19 canonical proper faces holding non-entropy vectors."""
    return tuple(
        _make_face(frozenset(ray_by_label(lbl) for lbl in labels), canonical=True)
        for labels in _CANONICAL_FACE_LABELS
    )


@lru_cache(maxsize=1)
def _face_lookup() -> dict[frozenset, FaceSpec]:
    table: dict[frozenset, FaceSpec] = {}
    for face in face_catalogue():
        for image in face.orbit:
            table.setdefault(image, _make_face(image, canonical=(image == face.generators)))
    return table


def face_for_generators(generators: Iterable[Ray]) -> FaceSpec:
    """FaceSpec for a generator set; catalogued metadata when it matches."""
    gens = frozenset(generators)
    hit = _face_lookup().get(gens)
    return hit if hit is not None else _make_face(gens, canonical=False)


@unique
class FacePosition(Enum):
    STRICTLY_INSIDE = "strictly_inside"
    IN_SUBFACE = "in_subface"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class FaceLocation:
    position: FacePosition
    certificate: Optional[ConicCertificate] = None
    subface: Optional[FaceSpec] = None


def _tight_set(h: EntropyVector) -> frozenset[int]:
    fns = elemental_inequalities(3)
    return frozenset(i for i, fn in enumerate(fns) if fn.evaluate(h).sign() == Sign.ZERO)


def _face_tight_set(gens: Iterable[Ray]) -> frozenset[int]:
    fns = elemental_inequalities(3)
    gens = tuple(gens)
    return frozenset(
        i for i, fn in enumerate(fns) if all(fn.evaluate_int(g.vector) == 0 for g in gens)
    )


def strict_in_face(h: EntropyVector, face: FaceSpec) -> FaceLocation:
    """Locate h relative to a face: strictly inside, in a subface, outside.

    Membership is certified by exact conic decomposition.  Strictness uses
    the tight-set criterion: h lies in the relative interior iff the
    elemental inequalities tight at h are exactly those tight on the whole
    face.  When h sits deeper, the reported subface is the minimal face
    containing h (the rays annihilated by everything tight at h).
    """
    cert = cone_membership(h, face.generators)
    if cert is None:
        return FaceLocation(FacePosition.OUTSIDE)
    tight_h = _tight_set(h)
    if tight_h == _face_tight_set(face.generators):
        return FaceLocation(FacePosition.STRICTLY_INSIDE, cert)
    fns = elemental_inequalities(3)
    minimal = frozenset(
        r for r in RAY_ORDER if all(fns[i].evaluate_int(r.vector) == 0 for i in tight_h)
    )
    return FaceLocation(FacePosition.IN_SUBFACE, cert, face_for_generators(minimal))
