"""
Hessians, spectra and Morse indices at central configurations.

Operators are carried as a symmetric Euclidean matrix together with the
diagonal weights of the metric they are self-adjoint in (masses ``m_j`` on
configurations, ``m_i m_j`` on 1-cochains). The metric operator is
``diag(w)^-1 A``; its eigenvalues are computed from the symmetric matrix
``diag(w)^-1/2 A diag(w)^-1/2``.
"""

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .cochain import (
    as_configuration,
    as_masses,
    coboundary0,
    coboundary1,
    mass_norm_c1,
    pairs,
    pm_matrix,
    project_to_x,
)
from .errors import CollisionError, NotACocycleError
from .potential import _pair_block_hessian, hessian_u, lambda_of
from .solvers import rescale_to_lambda

__all__ = [
    "SpectrumContext",
    "SymmetricOperator",
    "SpectrumReport",
    "hessian_f",
    "hessian_composed",
    "sphere_restricted",
    "spectrum",
    "radial_eigencheck",
    "spectra_correspondence",
    "Correspondence",
    "ZERO_THRESHOLD",
]

ZERO_THRESHOLD = 1e-8


class SpectrumContext(str, enum.Enum):
    C0_FULL = "C0Full"
    C1_COMPOSED = "C1Composed"
    SPHERE_RESTRICTED = "SphereRestricted"


@dataclass(frozen=True)
class SymmetricOperator:
    euclidean: np.ndarray
    weights: np.ndarray
    context: SpectrumContext

    def matrix(self):
        """The operator in the metric, ``diag(w)^-1 A``."""
        return self.euclidean / self.weights[:, None]

    def symmetrized(self):
        s = 1.0 / np.sqrt(self.weights)
        return self.euclidean * np.outer(s, s)

    def apply(self, v):
        return self.matrix() @ np.ravel(v)

    def inner(self, u, v):
        return float(np.sum(self.weights * np.ravel(u) * np.ravel(v)))


def hessian_f(q, m, p, lam=None, tol=1e-9):
    """Hessian of ``U(q) - (lambda/2) |q|_M^2`` on configurations.

    ``lam`` defaults to ``lambda_of(q)``. With ``lam = -2`` this is the
    Hessian of ``U + |q|_M^2``.
    """
    m = as_masses(m)
    q = as_configuration(q, n=m.n)
    if lam is None:
        lam = lambda_of(q, m, p, tol)
    d = q.shape[1]
    w = np.repeat(m.values, d)
    A = hessian_u(q, m, p, tol) - lam * np.diag(w)
    return SymmetricOperator(0.5 * (A + A.T), w, SpectrumContext.C0_FULL)


def hessian_composed(z, m, p, cocycle_tol=1e-10):
    """Hessian of ``f o P_m`` on 1-cochains at a cocycle ``z``.

    ``f(z) = sum_{i<j} m_i m_j (|z_ij|^-alpha + |z_ij|^2)``. Directions in the
    kernel of ``P_m`` contribute zero eigenvalues.
    """
    m = as_masses(m)
    n, d = z.n, z.d
    scale = float(np.max(z.norms())) if z.entries.size else 0.0
    defect = coboundary1(z).max_norm()
    if defect > cocycle_tol * max(scale, 1e-300):
        raise NotACocycleError(f"coboundary of input is {defect:.3e}, not a cocycle")
    r = z.norms()
    if np.any(r == 0.0):
        raise CollisionError("1-cochain has a zero entry", pair=int(np.argmin(r)))
    I, J = pairs(n)
    mm = m.values[I] * m.values[J]
    blocks = mm[:, None, None] * (_pair_block_hessian(z.entries, r, p.alpha) + 2.0 * np.eye(d))
    npairs = len(I)
    Hf = np.zeros((npairs, d, npairs, d))
    for k in range(npairs):
        Hf[k, :, k, :] = blocks[k]
    Hf = Hf.reshape(npairs * d, npairs * d)
    P = np.kron(pm_matrix(n, m), np.eye(d))
    A = P.T @ Hf @ P
    return SymmetricOperator(0.5 * (A + A.T), np.repeat(mm, d), SpectrumContext.C1_COMPOSED)


def sphere_restricted(op, q):
    """Restrict a configuration-space operator to the tangent space of the
    inertia ellipsoid through ``q`` (the mass-orthogonal complement of ``q``).

    The result is expressed in a mass-orthonormal basis of that tangent space,
    so its weights are all one.
    """
    sw = np.sqrt(op.weights)
    u = sw * np.ravel(q)
    u = u / np.linalg.norm(u)
    B = null_space(u[None, :])
    S = B.T @ op.symmetrized() @ B
    return SymmetricOperator(0.5 * (S + S.T), np.ones(B.shape[1]), SpectrumContext.SPHERE_RESTRICTED)


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    morse_index: int
    nullity: int
    zero_threshold: float
    context: SpectrumContext

    @property
    def positive(self):
        return len(self.eigenvalues) - self.morse_index - self.nullity

    def nonzero(self):
        return self.eigenvalues[np.abs(self.eigenvalues) > self.zero_threshold]


def spectrum(op, relative_threshold=ZERO_THRESHOLD, zero_threshold=None, asym_tol=1e-10):
    """Eigenvalues of ``op`` in its metric, with Morse index and nullity.

    An eigenvalue counts as zero when its magnitude is at most
    ``relative_threshold * max |eigenvalue|`` (or ``zero_threshold`` if given).
    """
    A = op.euclidean
    scale = max(float(np.max(np.abs(A))), 1e-300) if A.size else 1.0
    if A.size and np.max(np.abs(A - A.T)) > asym_tol * scale:
        raise ValueError("operator is not symmetric")
    ev = np.sort(np.linalg.eigvalsh(op.symmetrized()))
    if zero_threshold is None:
        zero_threshold = relative_threshold * (float(np.max(np.abs(ev))) if ev.size else 0.0)
    morse = int(np.sum(ev < -zero_threshold))
    null = int(np.sum(np.abs(ev) <= zero_threshold))
    return SpectrumReport(ev, morse, null, float(zero_threshold), op.context)


def radial_eigencheck(sol, p=None):
    """Expected radial eigenvalue ``-lambda (alpha + 2)`` against the mass-metric
    Rayleigh quotient of the Hessian along ``q``."""
    p = p or sol.params
    q = sol.configuration
    lam = lambda_of(q, sol.masses, p)
    op = hessian_f(q, sol.masses, p, lam)
    v = np.ravel(q)
    measured = op.inner(v, op.apply(v)) / op.inner(v, v)
    return -lam * (p.alpha + 2.0), float(measured)


@dataclass(frozen=True)
class Correspondence:
    passed: bool
    h_nonzero: np.ndarray
    h_removed: np.ndarray
    htilde_nonzero: np.ndarray
    max_relative_error: float
    message: str

    def diff(self):
        """Human-readable side-by-side listing of the two multisets."""
        lines = [f"H (after removing translations): {np.array2string(self.h_nonzero, precision=12)}"]
        lines.append(f"H~ nonzero:                      {np.array2string(self.htilde_nonzero, precision=12)}")
        lines.append(f"removed from H:                  {np.array2string(self.h_removed, precision=12)}")
        return "\n".join(lines)


def spectra_correspondence(sol, m=None, p=None, tol=1e-7, relative_threshold=ZERO_THRESHOLD):
    """Compare nonzero spectra of the configuration Hessian and the composed
    1-cochain Hessian at the ``lambda = -2`` rescaling of ``sol``.

    The configuration Hessian carries an extra eigenvalue 2 of multiplicity
    ``d`` (translations); the ``d`` nonzero eigenvalues closest to 2 are removed
    before matching.
    """
    m = as_masses(m if m is not None else sol.masses)
    p = p or sol.params
    x = project_to_x(rescale_to_lambda(sol, -2.0, p), m)
    d = x.shape[1]
    H = spectrum(hessian_f(x, m, p, -2.0), relative_threshold)
    Ht = spectrum(hessian_composed(coboundary0(x), m, p), relative_threshold)
    thr = relative_threshold * max(np.max(np.abs(H.eigenvalues)), np.max(np.abs(Ht.eigenvalues)))
    h = H.eigenvalues[np.abs(H.eigenvalues) > thr]
    ht = Ht.eigenvalues[np.abs(Ht.eigenvalues) > thr]
    drop = np.argsort(np.abs(h - 2.0), kind="stable")[:d]
    removed = np.sort(h[drop])
    h = np.sort(np.delete(h, drop))
    ht = np.sort(ht)
    if h.size != ht.size:
        return Correspondence(
            False, h, removed, ht, np.inf,
            f"nonzero counts differ: H has {h.size} after removal, H~ has {ht.size}",
        )
    err = float(np.max(np.abs(h - ht) / np.maximum(np.abs(h), np.abs(ht)))) if h.size else 0.0
    trans_err = float(np.max(np.abs(removed - 2.0)) / 2.0) if removed.size else 0.0
    ok = err <= tol and trans_err <= tol
    msg = f"max relative mismatch {err:.3e}, translation block error {trans_err:.3e}"
    return Correspondence(ok, h, removed, ht, err, msg)
