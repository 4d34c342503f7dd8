"""
Simplicial cochains on the full simplex with coefficients in E = R^d.

A configuration of ``n`` bodies in ``R^d`` is a 0-cochain and is stored as a
plain ``(n, d)`` float array. Mutual differences live in the space of
1-cochains: one vector per unordered pair ``i < j``, read skew-symmetrically.
Triples ``i < j < k`` carry 2-cochains, the target of the second coboundary.

Bodies are indexed from 0. Pairs and triples are ordered lexicographically,
so for ``n = 4`` the pair order is 01, 02, 03, 12, 13, 23.

The sign convention throughout is ``q_ij = q_i - q_j``.
"""

from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

__all__ = [
    "Masses",
    "as_masses",
    "as_configuration",
    "OneCochain",
    "TwoCochain",
    "pair_index",
    "triple_index",
    "pairs",
    "triples",
    "coboundary0",
    "coboundary1",
    "mass_inner_c0",
    "mass_inner_c1",
    "mass_norm_c0",
    "mass_norm_c1",
    "project_pm",
    "pm_matrix",
    "center_of_mass",
    "project_to_x",
]


class Masses:
    """Positive body masses, normalized to sum to one.

    Parameters
    ----------
    values : array_like
        Raw positive weights. They are divided by their sum on construction;
        the original sum is kept in ``scale``.
    """

    __slots__ = ("_values", "_scale")

    def __init__(self, values):
        raw = np.array(values, dtype=float).reshape(-1)
        if raw.size < 1:
            raise ValueError("at least one mass is required")
        for idx, v in enumerate(raw):
            if not np.isfinite(v) or v <= 0.0:
                raise ValueError(f"masses[{idx}] = {v!r} must be a positive finite number")
        scale = float(raw.sum())
        vals = raw / scale
        vals.setflags(write=False)
        self._values = vals
        self._scale = scale

    @classmethod
    def equal(cls, n):
        return cls(np.ones(n))

    @property
    def values(self):
        return self._values

    @property
    def scale(self):
        """Sum of the raw weights before normalization."""
        return self._scale

    @property
    def n(self):
        return self._values.size

    def __len__(self):
        return self._values.size

    def __iter__(self):
        return iter(self._values)

    def __getitem__(self, idx):
        return self._values[idx]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._values, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, Masses):
            return NotImplemented
        return np.array_equal(self._values, other._values) and self._scale == other._scale

    def __hash__(self):
        return hash((self._values.tobytes(), self._scale))

    def __repr__(self):
        return f"Masses({self._values.tolist()!r}, scale={self._scale!r})"

    def is_equal(self):
        """True when all masses coincide exactly."""
        return bool(np.all(self._values == self._values[0]))


def as_masses(m):
    return m if isinstance(m, Masses) else Masses(m)


def as_configuration(q, n=None, d=None):
    """Coerce ``q`` to an ``(n, d)`` float array, checking the shape."""
    arr = np.asarray(q, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"configuration must be a 2-d array (n, d), got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"expected {n} bodies, got {arr.shape[0]}")
    if d is not None and arr.shape[1] != d:
        raise ValueError(f"expected dimension {d}, got {arr.shape[1]}")
    return arr


# -- index bookkeeping -------------------------------------------------------


def pair_index(i, j, n):
    """Flat lexicographic index of the pair ``(i, j)`` with ``0 <= i < j < n``."""
    if not (0 <= i < j < n):
        raise IndexError(f"pair ({i}, {j}) is not valid for n = {n}")
    return i * n - i * (i + 1) // 2 + (j - i - 1)


@lru_cache(maxsize=None)
def pairs(n):
    """Arrays ``(I, J)`` listing all pairs ``i < j`` in lexicographic order."""
    ij = np.array(list(combinations(range(n), 2)), dtype=np.intp).reshape(-1, 2)
    I, J = ij[:, 0].copy(), ij[:, 1].copy()
    I.setflags(write=False)
    J.setflags(write=False)
    return I, J


@lru_cache(maxsize=None)
def triples(n):
    ijk = np.array(list(combinations(range(n), 3)), dtype=np.intp).reshape(-1, 3)
    ijk.setflags(write=False)
    return ijk


@lru_cache(maxsize=None)
def _triple_lookup(n):
    return {tuple(t): k for k, t in enumerate(triples(n).tolist())}


def triple_index(i, j, k, n):
    """Flat lexicographic index of the triple ``i < j < k``."""
    try:
        return _triple_lookup(n)[(i, j, k)]
    except KeyError:
        raise IndexError(f"triple ({i}, {j}, {k}) is not valid for n = {n}") from None


# -- cochain containers ------------------------------------------------------


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class OneCochain:
    """A 1-cochain: one vector of E per pair ``i < j``.

    ``z[i, j]`` returns the stored vector for ``i < j``, its negation for
    ``i > j`` and zero on the diagonal. Entries are read-only.
    """

    __slots__ = ("_entries", "_n")

    def __init__(self, entries, n):
        e = np.asarray(entries, dtype=float)
        if e.ndim == 1:
            e = e.reshape(-1, 1)
        if e.shape[0] != comb(n, 2):
            raise ValueError(f"a 1-cochain for n = {n} needs {comb(n, 2)} entries, got {e.shape[0]}")
        self._entries = _frozen(e)
        self._n = int(n)

    @classmethod
    def zeros(cls, n, d):
        return cls(np.zeros((comb(n, 2), d)), n)

    @classmethod
    def from_full(cls, A):
        """Build from a skew ``(n, n, d)`` array, reading the upper triangle."""
        A = np.asarray(A, dtype=float)
        I, J = pairs(A.shape[0])
        return cls(A[I, J], A.shape[0])

    @classmethod
    def from_flat(cls, flat, n, d):
        return cls(np.asarray(flat, dtype=float).reshape(comb(n, 2), d), n)

    @property
    def n(self):
        return self._n

    @property
    def d(self):
        return self._entries.shape[1]

    @property
    def entries(self):
        return self._entries

    def flat(self):
        return self._entries.reshape(-1).copy()

    def full(self):
        """Skew-symmetric ``(n, n, d)`` array with ``A[i, j] = z_ij``."""
        I, J = pairs(self._n)
        A = np.zeros((self._n, self._n, self.d))
        A[I, J] = self._entries
        A[J, I] = -self._entries
        return A

    def norms(self):
        return np.linalg.norm(self._entries, axis=1)

    def __getitem__(self, ij):
        i, j = ij
        if i == j:
            if not 0 <= i < self._n:
                raise IndexError(f"body index {i} out of range")
            return np.zeros(self.d)
        if i < j:
            return self._entries[pair_index(i, j, self._n)].copy()
        return -self._entries[pair_index(j, i, self._n)]

    def _check(self, other):
        if not isinstance(other, OneCochain):
            return NotImplemented
        if other._entries.shape != self._entries.shape:
            raise ValueError("1-cochain shapes do not match")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return OneCochain(self._entries + other._entries, self._n)

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return OneCochain(self._entries - other._entries, self._n)

    def __neg__(self):
        return OneCochain(-self._entries, self._n)

    def __mul__(self, c):
        return OneCochain(self._entries * float(c), self._n)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, OneCochain):
            return NotImplemented
        return self._n == other._n and np.array_equal(self._entries, other._entries)

    def __hash__(self):
        return hash((self._n, self._entries.tobytes()))

    def __repr__(self):
        return f"OneCochain(n={self._n}, d={self.d}, entries={self._entries.tolist()!r})"


_PERM_SIGN = {
    (0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
    (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1,
}


class TwoCochain:
    """A 2-cochain: one vector of E per triple ``i < j < k``, read alternating."""

    __slots__ = ("_entries", "_n")

    def __init__(self, entries, n):
        e = np.asarray(entries, dtype=float)
        if e.ndim == 1:
            e = e.reshape(-1, 1)
        if e.shape[0] != comb(n, 3):
            raise ValueError(f"a 2-cochain for n = {n} needs {comb(n, 3)} entries, got {e.shape[0]}")
        self._entries = _frozen(e)
        self._n = int(n)

    @property
    def n(self):
        return self._n

    @property
    def d(self):
        return self._entries.shape[1]

    @property
    def entries(self):
        return self._entries

    def __getitem__(self, ijk):
        idx = tuple(int(x) for x in ijk)
        if len(set(idx)) < 3:
            return np.zeros(self.d)
        order = tuple(sorted(range(3), key=lambda t: idx[t]))
        sign = _PERM_SIGN[order]
        key = tuple(idx[t] for t in order)
        return sign * self._entries[triple_index(*key, self._n)]

    def max_norm(self):
        if self._entries.size == 0:
            return 0.0
        return float(np.max(np.linalg.norm(self._entries, axis=1)))

    def __repr__(self):
        return f"TwoCochain(n={self._n}, d={self.d}, entries={self._entries.tolist()!r})"


# -- coboundaries ------------------------------------------------------------


def coboundary0(q):
    """Mutual differences ``q_i - q_j`` of a configuration, as a 1-cochain."""
    q = as_configuration(q)
    I, J = pairs(q.shape[0])
    return OneCochain(q[I] - q[J], q.shape[0])


def coboundary1(z):
    """Triple sums ``z_ij + z_jk + z_ki`` for ``i < j < k``."""
    n = z.n
    T = triples(n)
    if T.shape[0] == 0:
        return TwoCochain(np.zeros((0, z.d)), n)
    e = z.entries
    i, j, k = T[:, 0], T[:, 1], T[:, 2]
    ij = np.array([pair_index(a, b, n) for a, b in zip(i, j)], dtype=np.intp)
    jk = np.array([pair_index(a, b, n) for a, b in zip(j, k)], dtype=np.intp)
    ik = np.array([pair_index(a, b, n) for a, b in zip(i, k)], dtype=np.intp)
    # z_ki = -z_ik
    return TwoCochain(e[ij] + e[jk] - e[ik], n)


# -- metrics -----------------------------------------------------------------


def mass_inner_c0(v, w, m):
    """Mass-metric ``sum_j m_j v_j . w_j`` on tangent vectors of E^n."""
    m = as_masses(m)
    v = as_configuration(v)
    w = as_configuration(w)
    if v.shape != w.shape or v.shape[0] != m.n:
        raise ValueError(f"shape mismatch: {v.shape}, {w.shape} with {m.n} masses")
    return float(np.sum(m.values * np.einsum("jk,jk->j", v, w)))


def mass_norm_c0(v, m):
    return float(np.sqrt(mass_inner_c0(v, v, m)))


def _pair_weights(m):
    I, J = pairs(m.n)
    return m.values[I] * m.values[J]


def mass_inner_c1(v, w, m):
    """Mass-metric on 1-cochains, weighting pair ``ij`` by ``m_i m_j``."""
    m = as_masses(m)
    if v.n != m.n or w.n != m.n or v.d != w.d:
        raise ValueError("1-cochain dimensions do not match the masses")
    return float(np.sum(_pair_weights(m) * np.einsum("pk,pk->p", v.entries, w.entries)))


def mass_norm_c1(v, m):
    return float(np.sqrt(mass_inner_c1(v, v, m)))


# -- projection onto cocycles -------------------------------------------------


def project_pm(Q, m):
    """Mass-weighted projection of a 1-cochain onto the 1-cocycles.

    ``(P Q)_ij = Q_ij + sum_{k not in {i,j}} m_k (Q_ik + Q_kj + Q_ji)``.
    The bracket vanishes for ``k in {i, j}``, so the sum runs over all ``k``.
    """
    m = as_masses(m)
    if Q.n != m.n:
        raise ValueError(f"cochain has n = {Q.n} but {m.n} masses were given")
    A = Q.full()
    # T[i, j, k] = A_ik + A_kj + A_ji
    T = A[:, None, :, :] + np.transpose(A, (1, 0, 2))[None, :, :, :] + A.transpose(1, 0, 2)[:, :, None, :]
    PA = A + np.einsum("k,ijkd->ijd", m.values, T)
    return OneCochain.from_full(PA)


def pm_matrix(n, m):
    """Matrix of the projection on scalar (d = 1) 1-cochains, pair-lexicographic.

    Row ``ij`` has ``m_i + m_j`` on the diagonal, ``+/- m_k`` against the
    pairs ``ik`` and ``kj`` (sign from the skew reading), and zero elsewhere.
    For ``d > 1`` the same matrix acts on each coordinate.
    """
    m = as_masses(m)
    if m.n != n:
        raise ValueError(f"expected {n} masses, got {m.n}")
    if n < 2:
        raise ValueError("need at least two bodies")
    mv = m.values
    size = comb(n, 2)
    P = np.zeros((size, size))
    for i, j in combinations(range(n), 2):
        row = pair_index(i, j, n)
        P[row, row] = mv[i] + mv[j]
        for k in range(n):
            if k == i or k == j:
                continue
            # + m_k Q_ik
            if i < k:
                P[row, pair_index(i, k, n)] += mv[k]
            else:
                P[row, pair_index(k, i, n)] -= mv[k]
            # + m_k Q_kj
            if k < j:
                P[row, pair_index(k, j, n)] += mv[k]
            else:
                P[row, pair_index(j, k, n)] -= mv[k]
    return P


# -- center of mass ----------------------------------------------------------


def center_of_mass(q, m):
    m = as_masses(m)
    q = as_configuration(q, n=m.n)
    return m.values @ q


def project_to_x(q, m):
    """Translate ``q`` so that its center of mass is at the origin."""
    q = as_configuration(q)
    return q - center_of_mass(q, m)
