"""
Geometric verifiers built on the triple sums ``Q_ijk = Q_ij + Q_jk + Q_ki``
with ``Q_ab = Psi_{alpha+2}(q_a - q_b)``.

For three non-collinear points ``Q_ijk`` vanishes exactly on equilateral
triangles, and is parallel to ``q_ij`` exactly when the triangle is isosceles
at ``k``. The corollaries checked here are consequences of that fact for
central configurations: the only non-collinear three-body solution is
equilateral, ``n - 1`` collinear bodies force full collinearity, and a body
off the plane of the other ``n - 1`` is equidistant from them.
"""

import enum
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .cochain import as_configuration
from .errors import CollisionError
from .potential import PotentialParams, psi_gamma

__all__ = [
    "TripleClass",
    "TripleReport",
    "triple_q",
    "affine_rank",
    "Classification",
    "classify_geometry",
    "CorollaryCheck",
    "corollary_checks",
]

RANK_TOL = 1e-8
SPREAD_TOL = 1e-8


class TripleClass(str, enum.Enum):
    ZERO_EQUILATERAL = "zeroEquilateral"
    PARALLEL_TO_EDGE = "parallelToEdge"
    GENERAL = "general"


@dataclass(frozen=True)
class TripleReport:
    triple: tuple
    Qijk: np.ndarray
    classification: TripleClass
    scale: float
    cross: float

    @property
    def magnitude(self):
        return float(np.linalg.norm(self.Qijk))


def triple_q(q, triple, p=PotentialParams(), tol=1e-10):
    """Evaluate ``Q_ijk`` for bodies ``(i, j, k)`` and classify it.

    ``scale`` is the largest of ``|Q_ij|, |Q_jk|, |Q_ki|``. ``cross`` is the
    length of the component of ``Q_ijk`` orthogonal to ``q_ij``. The triple is
    ``zeroEquilateral`` when ``|Q_ijk| <= tol * scale``, ``parallelToEdge``
    when ``cross <= tol * scale``, and ``general`` otherwise.
    """
    q = as_configuration(q)
    i, j, k = triple
    pts = q[[i, j, k]]
    for a, b in combinations(range(3), 2):
        if np.array_equal(pts[a], pts[b]):
            raise CollisionError(f"bodies {triple[a]} and {triple[b]} coincide", pair=(triple[a], triple[b]))
    g = p.gamma
    Qij = psi_gamma(q[i] - q[j], g)
    Qjk = psi_gamma(q[j] - q[k], g)
    Qki = psi_gamma(q[k] - q[i], g)
    Q = Qij + Qjk + Qki
    scale = max(np.linalg.norm(Qij), np.linalg.norm(Qjk), np.linalg.norm(Qki))
    u = (q[i] - q[j]) / np.linalg.norm(q[i] - q[j])
    cross = float(np.linalg.norm(Q - (Q @ u) * u))
    if np.linalg.norm(Q) <= tol * scale:
        cls = TripleClass.ZERO_EQUILATERAL
    elif cross <= tol * scale:
        cls = TripleClass.PARALLEL_TO_EDGE
    else:
        cls = TripleClass.GENERAL
    return TripleReport((i, j, k), Q, cls, float(scale), cross)


def _singular_values(pts):
    c = pts - pts.mean(axis=0)
    if c.shape[0] < 2:
        return np.zeros(1)
    return np.linalg.svd(c, compute_uv=False)


def affine_rank(pts, tol=RANK_TOL):
    """Dimension of the affine hull of ``pts``, with relative singular-value cut."""
    s = _singular_values(np.asarray(pts, dtype=float))
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def _spread(values):
    values = np.asarray(values, dtype=float)
    return float((values.max() - values.min()) / values.max())


def _circle_spread(pts):
    """Relative spread of distances from the best-fit circle center of coplanar points."""
    c0 = pts.mean(axis=0)
    _, _, Vt = np.linalg.svd(pts - c0)
    uv = (pts - c0) @ Vt[:2].T
    # |p|^2 = 2 c . p + k
    A = np.column_stack([2.0 * uv, np.ones(len(uv))])
    sol, *_ = np.linalg.lstsq(A, np.sum(uv**2, axis=1), rcond=None)
    return _spread(np.linalg.norm(uv - sol[:2], axis=1))


def _distances(q):
    n = q.shape[0]
    return np.array([np.linalg.norm(q[a] - q[b]) for a, b in combinations(range(n), 2)])


@dataclass(frozen=True)
class Classification:
    tags: frozenset
    deviations: dict = field(default_factory=dict)


def _find_apex(q, tol):
    """Index of a body lying off the plane of the other ``n - 1`` coplanar bodies."""
    n = q.shape[0]
    for a in range(n):
        base = np.delete(q, a, axis=0)
        if affine_rank(base, tol) <= 2 and affine_rank(q, tol) == 3:
            return a
    return None


def classify_geometry(q, tol=SPREAD_TOL, rank_tol=RANK_TOL):
    """Geometric tags of a configuration with the deviations that decided them.

    Tags: ``collinear``, ``planar``, ``equilateral`` (three non-collinear bodies
    with equal sides), ``regular`` (all mutual distances equal), and for a body
    off the plane of the others ``pyramidal`` plus ``equidistantApex`` and
    ``cocircularBase`` when those hold within ``tol``.
    """
    q = as_configuration(q)
    n = q.shape[0]
    tags = set()
    dev = {}
    s = _singular_values(q)
    top = s[0] if s[0] > 0 else 1.0
    dev["collinearity"] = float(s[1] / top) if s.size > 1 else 0.0
    dev["coplanarity"] = float(s[2] / top) if s.size > 2 else 0.0
    rank = affine_rank(q, rank_tol)
    if rank <= 1:
        tags.add("collinear")
    if rank <= 2:
        tags.add("planar")
    if n >= 3:
        dev["distanceSpread"] = _spread(_distances(q))
        if dev["distanceSpread"] <= tol and rank >= 1:
            tags.add("regular")
            if n == 3:
                tags.add("equilateral")
    if n >= 4:
        apex = _find_apex(q, rank_tol)
        if apex is not None:
            tags.add("pyramidal")
            base = np.delete(q, apex, axis=0)
            dev["apexIndex"] = apex
            dev["apexSpread"] = _spread(np.linalg.norm(base - q[apex], axis=1))
            dev["cocircularSpread"] = _circle_spread(base)
            if dev["apexSpread"] <= tol:
                tags.add("equidistantApex")
            if dev["cocircularSpread"] <= tol:
                tags.add("cocircularBase")
    return Classification(frozenset(tags), dev)


@dataclass(frozen=True)
class CorollaryCheck:
    name: str
    applicable: bool
    passed: bool
    deviation: float
    detail: str = ""


def corollary_checks(q, tol=SPREAD_TOL, rank_tol=RANK_TOL):
    """Evaluate the triple-sum corollaries as implications on ``q``.

    A check that does not apply (hypothesis false) passes vacuously.
    """
    q = as_configuration(q)
    n, d = q.shape
    out = []
    rank = affine_rank(q, rank_tol)

    if n == 3 and d >= 2:
        spread = _spread(_distances(q))
        if rank >= 2:
            out.append(CorollaryCheck("noncollinear-3-body-is-equilateral", True, spread <= tol, spread))
        else:
            out.append(CorollaryCheck("noncollinear-3-body-is-equilateral", False, True, 0.0, "collinear"))

    if n >= 4 and d >= 2:
        hit = None
        for a in range(n):
            if affine_rank(np.delete(q, a, axis=0), rank_tol) <= 1:
                hit = a
                break
        if hit is None:
            out.append(CorollaryCheck("n-1-collinear-implies-collinear", False, True, 0.0, "no n-1 collinear subset"))
        else:
            s = _singular_values(q)
            dev = float(s[1] / s[0])
            out.append(CorollaryCheck("n-1-collinear-implies-collinear", True, rank <= 1, dev, f"without body {hit}"))

    if n >= 4 and d >= 3:
        apex = _find_apex(q, rank_tol)
        if apex is None:
            out.append(CorollaryCheck("apex-equidistant", False, True, 0.0, "no apex over a coplanar base"))
            out.append(CorollaryCheck("base-cocircular", False, True, 0.0, "no apex over a coplanar base"))
        else:
            base = np.delete(q, apex, axis=0)
            a_dev = _spread(np.linalg.norm(base - q[apex], axis=1))
            c_dev = _circle_spread(base)
            out.append(CorollaryCheck("apex-equidistant", True, a_dev <= tol, a_dev, f"apex body {apex}"))
            out.append(CorollaryCheck("base-cocircular", True, c_dev <= tol, c_dev, f"apex body {apex}"))
    return out
