"""
Homogeneous n-body potential, its derivatives, and the central-configuration
residual written on 1-cochains.

The potential is ``U(q) = sum_{i<j} m_i m_j / |q_i - q_j|^alpha``. A central
configuration satisfies ``lambda m_j q_j = dU/dq_j`` for every body; on mutual
differences this is equivalent to

    -(lambda / alpha) dq = P_m(Psi(dq)),    Psi(x) = x / |x|^(alpha + 2),

with ``dq = coboundary0(q)`` and ``P_m`` the projection onto cocycles.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .cochain import (
    OneCochain,
    as_configuration,
    as_masses,
    coboundary0,
    mass_norm_c0,
    mass_norm_c1,
    pairs,
    project_pm,
    project_to_x,
)
from .errors import CollisionError, DegenerateConfigurationError

__all__ = [
    "PotentialParams",
    "DEFAULT_COLLISION_TOLERANCE",
    "check_collisions",
    "psi_gamma",
    "potential_u",
    "f_tilde",
    "grad_u",
    "hessian_u",
    "lambda_of",
    "cc_residual",
    "body_residual",
    "Residual",
]

DEFAULT_COLLISION_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PotentialParams:
    """Homogeneity exponent ``alpha > 0`` and the derived exponents of Psi."""

    alpha: float = 1.0

    def __post_init__(self):
        a = float(self.alpha)
        if not np.isfinite(a) or a <= 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    @property
    def gamma(self):
        return self.alpha + 2.0

    @property
    def gamma_hat(self):
        g = self.gamma
        return g / (g - 1.0)


def check_collisions(q, tol=DEFAULT_COLLISION_TOLERANCE):
    """Raise :class:`CollisionError` if two bodies are closer than ``tol * diameter``.

    Returns the pairwise distances in lexicographic pair order.
    """
    q = as_configuration(q)
    I, J = pairs(q.shape[0])
    r = np.linalg.norm(q[I] - q[J], axis=1)
    if r.size == 0:
        return r
    diam = float(r.max())
    k = int(np.argmin(r))
    if diam == 0.0 or r[k] <= tol * diam:
        pair = (int(I[k]), int(J[k]))
        raise CollisionError(f"bodies {pair[0]} and {pair[1]} collide (distance {r[k]:.3e})", pair=pair)
    return r


def psi_gamma(x, gamma):
    """Radial map ``x / |x|^gamma``; its inverse is ``psi_gamma(., gamma/(gamma-1))``."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x)
    if r == 0.0:
        raise CollisionError("Psi is undefined at the zero vector")
    return x / r**gamma


def _psi_rows(e, gamma):
    r = np.linalg.norm(e, axis=1)
    if np.any(r == 0.0):
        k = int(np.argmin(r))
        raise CollisionError(f"zero entry at pair index {k}", pair=k)
    return e / (r**gamma)[:, None]


def potential_u(q, m, p, tol=DEFAULT_COLLISION_TOLERANCE):
    m = as_masses(m)
    q = as_configuration(q, n=m.n)
    r = check_collisions(q, tol)
    I, J = pairs(m.n)
    return float(np.sum(m.values[I] * m.values[J] * r ** (-p.alpha)))


def f_tilde(Q, m, p):
    """``sum_{i<j} m_i m_j (|Q_ij|^-alpha + |Q_ij|^2)`` on 1-cochains.

    Restricted to coboundaries of centered configurations this equals
    ``U(q) + |q|_M^2``.
    """
    m = as_masses(m)
    r = Q.norms()
    if np.any(r == 0.0):
        raise CollisionError("1-cochain has a zero entry", pair=int(np.argmin(r)))
    I, J = pairs(m.n)
    w = m.values[I] * m.values[J]
    return float(np.sum(w * (r ** (-p.alpha) + r**2)))


def grad_u(q, m, p, tol=DEFAULT_COLLISION_TOLERANCE):
    """Euclidean gradient of ``U``, one row per body.

    Divide row ``j`` by ``m_j`` to get the mass-metric gradient.
    """
    m = as_masses(m)
    q = as_configuration(q, n=m.n)
    r = check_collisions(q, tol)
    I, J = pairs(m.n)
    diff = q[I] - q[J]
    c = (-p.alpha * m.values[I] * m.values[J] * r ** (-p.alpha - 2.0))[:, None] * diff
    g = np.zeros_like(q)
    np.add.at(g, I, c)
    np.add.at(g, J, -c)
    return g


def _pair_block_hessian(diff, r, alpha):
    """Hessian of ``x -> |x|^-alpha`` at each row of ``diff``; shape (P, d, d)."""
    d = diff.shape[1]
    eye = np.eye(d)
    a = -alpha * r ** (-alpha - 2.0)
    b = alpha * (alpha + 2.0) * r ** (-alpha - 4.0)
    return a[:, None, None] * eye + b[:, None, None] * np.einsum("pi,pj->pij", diff, diff)


def hessian_u(q, m, p, tol=DEFAULT_COLLISION_TOLERANCE):
    """Euclidean Hessian of ``U`` as an ``(n*d, n*d)`` matrix, body-major."""
    m = as_masses(m)
    q = as_configuration(q, n=m.n)
    r = check_collisions(q, tol)
    n, d = q.shape
    I, J = pairs(n)
    blocks = (m.values[I] * m.values[J])[:, None, None] * _pair_block_hessian(q[I] - q[J], r, p.alpha)
    H = np.zeros((n, d, n, d))
    for b, i, j in zip(blocks, I, J):
        H[i, :, i, :] += b
        H[j, :, j, :] += b
        H[i, :, j, :] -= b
        H[j, :, i, :] -= b
    return H.reshape(n * d, n * d)


def lambda_of(q, m, p, tol=DEFAULT_COLLISION_TOLERANCE):
    """``-alpha U(q) / |q|_M^2`` for the centered copy of ``q``."""
    m = as_masses(m)
    x = project_to_x(as_configuration(q, n=m.n), m)
    nrm2 = mass_norm_c0(x, m) ** 2
    if nrm2 == 0.0:
        raise DegenerateConfigurationError("all bodies coincide with the center of mass")
    return -p.alpha * potential_u(x, m, p, tol) / nrm2


class Residual(NamedTuple):
    cochain: OneCochain
    norm: float


def cc_residual(q, m, p, tol=DEFAULT_COLLISION_TOLERANCE):
    """Central-configuration residual ``P_m(Psi(dq)) + (lambda/alpha) dq``.

    ``lambda`` is taken from :func:`lambda_of`. The returned norm is the C^1
    mass-norm of the residual divided by ``|lambda/alpha| |dq|_M``, which makes
    it invariant under rescaling of ``q``. It vanishes exactly on central
    configurations.
    """
    m = as_masses(m)
    q = as_configuration(q, n=m.n)
    lam = lambda_of(q, m, p, tol)
    dq = coboundary0(q)
    Q = OneCochain(_psi_rows(dq.entries, p.gamma), m.n)
    res = project_pm(Q, m) + (lam / p.alpha) * dq
    scale = abs(lam / p.alpha) * mass_norm_c1(dq, m)
    return Residual(res, mass_norm_c1(res, m) / scale)


def body_residual(q, m, p, tol=DEFAULT_COLLISION_TOLERANCE):
    """Per-body residual ``lambda m_j q_j - dU/dq_j`` on the centered copy of ``q``.

    For centered ``q`` the cochain residual of :func:`cc_residual` is
    ``coboundary0(w)`` for a centered ``w``, and ``e_j = alpha m_j w_j``. Hence
    ``sum_j |e_j|^2 / m_j = alpha^2 |res|_M^2`` and
    ``|e|_2 <= alpha sqrt(max m) |res|_M``.
    """
    m = as_masses(m)
    x = project_to_x(as_configuration(q, n=m.n), m)
    lam = lambda_of(x, m, p, tol)
    return lam * m.values[:, None] * x - grad_u(x, m, p, tol)
