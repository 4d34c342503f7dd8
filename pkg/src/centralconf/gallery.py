"""Canonical central configurations: Lagrange, Euler, square, regular n-gon, pyramid."""

import numpy as np

from .cochain import as_masses
from .potential import PotentialParams
from .solvers import SolveSettings, solve_moulton, solve_newton

__all__ = ["GALLERY", "lagrange", "euler", "square", "ngon", "pyramid", "build"]


def _polygon(k, radius=1.0):
    th = 2.0 * np.pi * np.arange(k) / k
    return radius * np.column_stack([np.cos(th), np.sin(th)])


def lagrange(masses=None, p=PotentialParams()):
    """Equilateral triangle with unit sides; central for any three positive masses."""
    m = as_masses(masses if masses is not None else np.ones(3))
    if m.n != 3:
        raise ValueError("lagrange needs exactly 3 masses")
    q = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3.0) / 2.0]])
    return q, m


def euler(masses=None, p=PotentialParams()):
    """Collinear three-body solution with body 1 between bodies 0 and 2."""
    m = as_masses(masses if masses is not None else np.ones(3))
    if m.n != 3:
        raise ValueError("euler needs exactly 3 masses")
    sol = solve_moulton((0, 1, 2), m, p)
    return sol.configuration, m


def ngon(n, masses=None, p=PotentialParams()):
    """Regular n-gon on the unit circle with equal masses."""
    m = as_masses(masses if masses is not None else np.ones(n))
    if m.n != n or not m.is_equal():
        raise ValueError("ngon needs n equal masses")
    return _polygon(n), m


def square(masses=None, p=PotentialParams()):
    return ngon(4, masses, p)


def pyramid(n=5, masses=None, p=PotentialParams(), s=SolveSettings(method="newton")):
    """Regular (n-1)-gon base with equal masses and an apex on its axis (d = 3).

    The apex height is found by Newton iteration from a unit-height start,
    which keeps the rotational symmetry of the start.
    """
    if n < 4:
        raise ValueError("pyramid needs n >= 4")
    m = as_masses(masses if masses is not None else np.ones(n))
    if m.n != n or not np.all(m.values[:-1] == m.values[0]):
        raise ValueError("pyramid needs n masses with the first n-1 equal")
    base = np.column_stack([_polygon(n - 1), np.zeros(n - 1)])
    q0 = np.vstack([base, [0.0, 0.0, 1.0]])
    return solve_newton(q0, m, p, s).configuration, m


GALLERY = {
    "lagrange": lagrange,
    "euler": euler,
    "square": square,
    "ngon": ngon,
    "pyramid": pyramid,
}


def build(name, n=None, masses=None, p=PotentialParams()):
    """Configuration and masses for a gallery entry."""
    if name not in GALLERY:
        raise ValueError(f"unknown gallery entry {name!r}; choose from {sorted(GALLERY)}")
    if name == "ngon":
        return ngon(n or (len(masses) if masses is not None else 6), masses, p)
    if name == "pyramid":
        return pyramid(n or (len(masses) if masses is not None else 5), masses, p)
    return GALLERY[name](masses, p)
