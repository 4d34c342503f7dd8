"""
Solvers for central configurations.

Three routes are provided:

* ``fixedPoint``: damped iteration of ``F(q) = -grad_M U / |grad_M U|_M`` on
  the unit mass-sphere, whose fixed points are the central configurations.
* ``variational``: descent on ``U(x) + |x|_M^2`` over centered configurations,
  evaluated through the 1-cochain functional on coboundaries. Steps use the
  Hessian with eigenvalues replaced by their absolute values, so every accepted
  step lowers the objective.
* ``newton``: plain Newton on the gradient of the same functional with a line
  search on the gradient norm; it converges to saddles as well as minima.

All solutions are reported centered and at unit mass-norm, with ``lambda``
recomputed from the configuration. The critical point of the variational
functional (where ``lambda = -2``) is kept alongside when a Newton-type route
produced it.
"""

import enum
import logging
from dataclasses import dataclass, field, replace
from itertools import permutations, product

import numpy as np

from .cochain import (
    Masses,
    as_configuration,
    as_masses,
    coboundary0,
    mass_norm_c0,
    project_to_x,
)
from .errors import CollisionError, ConvergenceError, DegenerateConfigurationError
from .potential import (
    PotentialParams,
    cc_residual,
    check_collisions,
    f_tilde,
    grad_u,
    hessian_u,
    lambda_of,
    potential_u,
)

log = logging.getLogger(__name__)

__all__ = [
    "Method",
    "SolveSettings",
    "CCSolution",
    "normalize_sphere",
    "fixed_point_step",
    "solve_fixed_point",
    "solve_variational",
    "solve_newton",
    "solve",
    "solve_moulton",
    "as_solution",
    "moulton_orderings",
    "random_start",
    "orbit_distance",
    "deduplicate",
    "multistart_solve",
    "rescale_to_lambda",
]


class Method(str, enum.Enum):
    FIXED_POINT = "fixedPoint"
    VARIATIONAL = "variational"
    NEWTON = "newton"


@dataclass(frozen=True)
class SolveSettings:
    max_iterations: int = 200
    residual_tolerance: float = 1e-11
    damping: float = 1.0
    backtrack: float = 0.5
    min_step: float = 1e-10
    armijo: float = 1e-4
    max_step_fraction: float = 0.5
    collision_tolerance: float = 1e-9
    rng_seed: int = 0
    method: Method = Method.VARIATIONAL

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.residual_tolerance > 0:
            raise ValueError("residual_tolerance must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack factor must lie in (0, 1)")
        object.__setattr__(self, "method", Method(self.method))


@dataclass
class CCSolution:
    configuration: np.ndarray
    lam: float
    residual_norm: float
    iterations: int
    method: Method
    masses: Masses
    params: PotentialParams
    classification: frozenset = frozenset()
    critical_point: np.ndarray = None
    history: list = field(default_factory=list, repr=False)
    label: str = ""

    @property
    def n(self):
        return self.configuration.shape[0]

    @property
    def d(self):
        return self.configuration.shape[1]


def normalize_sphere(q, m):
    """Center ``q`` and rescale it to unit mass-norm."""
    m = as_masses(m)
    x = project_to_x(as_configuration(q, n=m.n), m)
    r = mass_norm_c0(x, m)
    if r == 0.0:
        raise DegenerateConfigurationError("cannot normalize: all bodies coincide")
    return x / r


def fixed_point_step(q, m, p, tol=1e-9):
    """``F(q) = -grad_M U(q) / |grad_M U(q)|_M``."""
    m = as_masses(m)
    g = grad_u(q, m, p, tol) / m.values[:, None]
    r = mass_norm_c0(g, m)
    if r == 0.0:
        raise DegenerateConfigurationError("mass-metric gradient of U vanishes")
    return -g / r


def _finish(x, m, p, method, iterations, s, critical_point=None, history=None, label=""):
    from .geometry import classify_geometry

    q = normalize_sphere(x, m)
    res = cc_residual(q, m, p, s.collision_tolerance).norm
    lam = lambda_of(q, m, p, s.collision_tolerance)
    return CCSolution(
        configuration=q,
        lam=lam,
        residual_norm=res,
        iterations=iterations,
        method=Method(method),
        masses=m,
        params=p,
        classification=classify_geometry(q).tags,
        critical_point=critical_point,
        history=list(history or []),
        label=label,
    )


def as_solution(q, m, p, label="", method=Method.NEWTON, s=SolveSettings()):
    """Wrap an already-central configuration (e.g. a closed-form one) as a solution."""
    return _finish(as_configuration(q), as_masses(m), p, method, 0, s, label=label)


def _safe_residual(q, m, p, tol):
    try:
        return cc_residual(q, m, p, tol).norm
    except (CollisionError, DegenerateConfigurationError):
        return np.inf


def solve_fixed_point(q0, m, p, s=SolveSettings(method=Method.FIXED_POINT)):
    """Damped iteration ``q <- normalize((1 - t) q + t F(q))``.

    ``t`` starts at ``s.damping`` and is halved whenever the candidate collides
    or raises ``U``; it grows back by 1.5x after accepted steps.
    """
    m = as_masses(m)
    ctol = s.collision_tolerance
    q = normalize_sphere(q0, m)
    check_collisions(q, ctol)
    u = potential_u(q, m, p, ctol)
    t = s.damping
    history = [u]
    for it in range(s.max_iterations + 1):
        res = cc_residual(q, m, p, ctol).norm
        if res <= s.residual_tolerance:
            return _finish(q, m, p, Method.FIXED_POINT, it, s, history=history)
        if it == s.max_iterations:
            break
        F = fixed_point_step(q, m, p, ctol)
        while True:
            cand = normalize_sphere((1.0 - t) * q + t * F, m)
            try:
                u_new = potential_u(cand, m, p, ctol)
            except CollisionError:
                u_new = np.inf
            if u_new <= u * (1.0 + 1e-14):
                break
            t *= s.backtrack
            if t < s.min_step:
                raise ConvergenceError(
                    "fixed-point damping fell below its floor", best=q, residual_norm=res, iterations=it
                )
        q, u = cand, u_new
        history.append(u)
        t = min(s.damping, 1.5 * t)
    raise ConvergenceError(
        f"fixed-point iteration did not reach {s.residual_tolerance:g} in {s.max_iterations} steps",
        best=q,
        residual_norm=res,
        iterations=s.max_iterations,
    )


# -- Newton-type solvers on U + |x|^2 ------------------------------------------


class _Functional:
    """``Phi(x) = U(x) + |x|_M^2`` on centered configurations, in coordinates
    ``y = sqrt(m) x`` so that the mass-metric becomes Euclidean."""

    def __init__(self, m, p, n, d, ctol):
        self.m, self.p, self.n, self.d, self.ctol = m, p, n, d, ctol
        self.sqm = np.repeat(np.sqrt(m.values), d)

    def to_x(self, y):
        return project_to_x((y / self.sqm).reshape(self.n, self.d), self.m)

    def to_y(self, x):
        return x.reshape(-1) * self.sqm

    def value(self, x):
        return f_tilde(coboundary0(x), self.m, self.p)

    def grad(self, x):
        g = grad_u(x, self.m, self.p, self.ctol) + 2.0 * self.m.values[:, None] * x
        return g.reshape(-1) / self.sqm

    def hess(self, x):
        H = hessian_u(x, self.m, self.p, self.ctol)
        H = H / np.outer(self.sqm, self.sqm)
        return 0.5 * (H + H.T) + 2.0 * np.eye(H.shape[0])


def _radial_rescale(x, m, p, ctol):
    """Scale ``x`` to the minimum of ``Phi`` along its ray, where ``lambda = -2``."""
    u = potential_u(x, m, p, ctol)
    nrm2 = mass_norm_c0(x, m) ** 2
    r = (p.alpha * u / (2.0 * nrm2)) ** (1.0 / (p.alpha + 2.0))
    return r * x


def _newton_loop(q0, m, p, s, mode, admissible=None, label=""):
    m = as_masses(m)
    q0 = as_configuration(q0, n=m.n)
    n, d = q0.shape
    ctol = s.collision_tolerance
    phi = _Functional(m, p, n, d, ctol)
    x = project_to_x(q0, m)
    check_collisions(x, ctol)
    if mass_norm_c0(x, m) == 0.0:
        raise DegenerateConfigurationError("start configuration has no extent")
    x = _radial_rescale(x, m, p, ctol)

    def ok(xc):
        try:
            check_collisions(xc, ctol)
        except CollisionError:
            return False
        return admissible is None or admissible(xc)

    if not ok(x):
        raise CollisionError("start configuration is not admissible")

    f = phi.value(x)
    g = phi.grad(x)
    history = [f]
    method = Method.NEWTON if mode == "newton" else Method.VARIATIONAL
    res = np.inf
    for it in range(s.max_iterations + 1):
        xn = mass_norm_c0(x, m)
        gnorm = float(np.linalg.norm(g))
        res = _safe_residual(x, m, p, ctol)
        if res <= s.residual_tolerance and gnorm <= s.residual_tolerance * xn:
            return _finish(x, m, p, method, it, s, critical_point=x.copy(), history=history, label=label)
        if it == s.max_iterations:
            break

        mu, V = np.linalg.eigh(phi.hess(x))
        gc = V.T @ g
        big = np.abs(mu) > 1e-10 * np.max(np.abs(mu))
        steps = []
        if mode == "newton":
            c = np.zeros_like(gc)
            c[big] = -gc[big] / mu[big]
            steps.append(("newton", V @ c))
        steps.append(("descent", V @ np.where(big, -gc / np.maximum(np.abs(mu), 1e-300), -gc / np.max(np.abs(mu)))))

        accepted = False
        for kind, sy in steps:
            snorm = float(np.linalg.norm(sy))
            if snorm == 0.0:
                continue
            cap = s.max_step_fraction * xn
            if snorm > cap:
                sy = sy * (cap / snorm)
            slope = float(g @ sy)
            merit0 = 0.5 * gnorm**2
            a = 1.0
            while a >= s.min_step:
                xc = phi.to_x(phi.to_y(x) + a * sy)
                if ok(xc):
                    fc = phi.value(xc)
                    gcand = phi.grad(xc)
                    if kind == "newton":
                        merit = 0.5 * float(gcand @ gcand)
                        good = merit <= (1.0 - 2.0 * s.armijo * a) * merit0 or (
                            merit <= merit0 and merit0 < 1e-20 * xn**2
                        )
                    else:
                        good = fc <= f + s.armijo * a * slope or (
                            a == 1.0
                            and np.linalg.norm(gcand) < 0.5 * gnorm
                            and fc <= f + 1e-14 * abs(f)
                        )
                    if good:
                        x, f, g = xc, fc, gcand
                        history.append(f)
                        accepted = True
                        break
                a *= s.backtrack
            if accepted:
                break
        if not accepted:
            raise ConvergenceError(
                f"{method.value} line search failed at iteration {it}",
                best=normalize_sphere(x, m),
                residual_norm=res,
                iterations=it,
            )
    raise ConvergenceError(
        f"{method.value} solver did not converge in {s.max_iterations} iterations",
        best=normalize_sphere(x, m),
        residual_norm=res,
        iterations=s.max_iterations,
    )


def solve_variational(q0, m, p, s=SolveSettings()):
    """Descend ``U + |x|_M^2`` on centered configurations from ``q0``."""
    return _newton_loop(q0, m, p, s, "descent")


def solve_newton(q0, m, p, s=SolveSettings(method=Method.NEWTON)):
    """Newton iteration for critical points (including saddles) of ``U + |x|_M^2``."""
    return _newton_loop(q0, m, p, s, "newton")


def solve(q0, m, p, s=SolveSettings()):
    if s.method is Method.FIXED_POINT:
        return solve_fixed_point(q0, m, p, s)
    if s.method is Method.NEWTON:
        return solve_newton(q0, m, p, s)
    return solve_variational(q0, m, p, s)


# -- collinear (Moulton) configurations ---------------------------------------


def moulton_orderings(n):
    """Orderings of ``n`` bodies on a line, one per reflection class (``n!/2`` of them)."""
    if n < 2:
        raise ValueError("need at least two bodies")
    return [perm for perm in permutations(range(n)) if perm[0] < perm[-1]]


def _in_chamber(order):
    order = np.asarray(order)

    def check(x):
        return bool(np.all(np.diff(x[order, 0]) > 0.0))

    return check


def solve_moulton(ordering, m, p, s=SolveSettings(), q0=None):
    """The collinear central configuration with bodies in the given order.

    ``ordering[k]`` is the body placed k-th from the left. The functional is
    convex on each chamber, so descent from any in-chamber start reaches the
    same point. Steps leaving the chamber are rejected.
    """
    m = as_masses(m)
    order = tuple(int(k) for k in ordering)
    if sorted(order) != list(range(m.n)):
        raise ValueError(f"{ordering!r} is not a permutation of {m.n} bodies")
    if q0 is None:
        q0 = np.empty((m.n, 1))
        q0[list(order), 0] = np.arange(m.n, dtype=float)
    q0 = as_configuration(q0, n=m.n, d=1)
    if not _in_chamber(order)(q0):
        raise ValueError("start configuration is not in the requested chamber")
    label = "-".join(str(k) for k in order)
    return _newton_loop(q0, m, p, s, "descent", admissible=_in_chamber(order), label=label)


# -- multistart and deduplication ----------------------------------------------


def random_start(n, d, m, rng, min_separation=0.05, max_tries=1000):
    """Random configuration uniform on the unit mass-sphere of centered configurations.

    Draws with a pair closer than ``min_separation`` times the diameter are rejected.
    """
    m = as_masses(m)
    sqm = np.sqrt(m.values)[:, None]
    for _ in range(max_tries):
        x = project_to_x(rng.standard_normal((n, d)) / sqm, m)
        x = x / mass_norm_c0(x, m)
        try:
            check_collisions(x, min_separation)
        except CollisionError:
            continue
        return x
    raise RuntimeError("could not draw a well-separated start")


def _mass_preserving_perms(m):
    groups = {}
    for idx, v in enumerate(m.values):
        groups.setdefault(float(v), []).append(idx)
    blocks = list(groups.values())
    perms = []
    for choice in product(*(permutations(b) for b in blocks)):
        perm = np.arange(m.n)
        for b, c in zip(blocks, choice):
            perm[list(b)] = c
        perms.append(perm)
    return np.array(perms)


def orbit_distance(a, b, m, relabel=True):
    """Mass-distance between two configurations modulo the diagonal O(d) action.

    The optimal orthogonal alignment is the weighted Procrustes solution.
    With ``relabel`` the minimum is also taken over permutations of bodies
    that carry identical masses. Inputs should be centered.
    """
    m = as_masses(m)
    a = as_configuration(a, n=m.n)
    b = as_configuration(b, n=m.n, d=a.shape[1])
    perms = _mass_preserving_perms(m) if relabel else np.arange(m.n)[None, :]
    B = b[perms]  # (P, n, d)
    wa = a * m.values[:, None]
    C = np.einsum("ni,pnj->pij", wa, B)
    U, _, Vt = np.linalg.svd(C)
    R = U @ Vt
    diff = np.einsum("ni,pij->pnj", a, R) - B
    dist2 = np.einsum("n,pnj->p", m.values, diff**2)
    return float(np.sqrt(max(dist2.min(), 0.0)))


def deduplicate(solutions, threshold=1e-6):
    """Keep the first solution of each orbit class, in input order."""
    reps = []
    for sol in solutions:
        if not any(
            rep.d == sol.d and orbit_distance(rep.configuration, sol.configuration, sol.masses) <= threshold
            for rep in reps
        ):
            reps.append(sol)
    return reps


def multistart_solve(n, d, m, p, s=SolveSettings(), starts=20, diagnostics=None, threshold=1e-6):
    """Run the configured solver from seeded random starts and deduplicate.

    Failed starts are recorded in ``diagnostics`` (if a list is passed) as
    ``(start_index, message)`` and otherwise skipped.
    """
    if starts < 1:
        raise ValueError("starts must be >= 1")
    m = as_masses(m)
    rng = np.random.default_rng(s.rng_seed)
    q0s = [random_start(n, d, m, rng) for _ in range(starts)]
    found = []
    for k, q0 in enumerate(q0s):
        try:
            sol = solve(q0, m, p, s)
        except (ConvergenceError, CollisionError, DegenerateConfigurationError) as exc:
            log.debug("start %d failed: %s", k, exc)
            if diagnostics is not None:
                diagnostics.append((k, str(exc)))
            continue
        found.append(replace(sol, label=sol.label or f"start-{k}"))
    if not found:
        log.warning("no start converged (%d tried)", starts)
    return deduplicate(found, threshold)


def rescale_to_lambda(sol, target_lambda, p=None):
    """Rescale a solution so that its ``lambda`` equals ``target_lambda``.

    Since ``lambda(r q) = r^(-alpha-2) lambda(q)``, the factor is
    ``r = (lambda(q) / target)^(1/(alpha+2))``.
    """
    if target_lambda >= 0:
        raise ValueError("target lambda must be negative")
    p = p or sol.params
    q = sol.configuration
    lam = lambda_of(q, sol.masses, p)
    r = (lam / target_lambda) ** (1.0 / (p.alpha + 2.0))
    return r * q
