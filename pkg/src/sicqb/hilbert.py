"""Dense complex linear algebra for finite-dimensional quantum states.

Vectors and operators are plain ``numpy`` arrays (``complex128``); the only
wrapped type is :class:`DensityOperator`, which validates trace, Hermiticity
and positivity on construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from sicqb.errors import (
    DimensionMismatchError,
    InvalidStateError,
    NormalizationError,
    NotHermitianError,
)

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = -1e-10

# Jacobi stops once off-diagonal Frobenius mass < JACOBI_TOL * max(1, ||A||_F).
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 60

MAX_DENSE_DIM = 4096
SEED_BOUND = 2**64


# --------------------------------------------------------------------------- #
# Random numbers
# --------------------------------------------------------------------------- #

def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < SEED_BOUND:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 generator for ``seed``, optionally on an independent sub-stream.

    Sub-streams are keyed by extra integers (e.g. a restart index) through
    :class:`numpy.random.SeedSequence`, so stream ``(seed, k)`` is the same
    regardless of which other streams were consumed before it.
    """
    entropy = [check_seed(seed), *(int(s) for s in stream)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex normals (E|z|^2 = 1) by the Box-Muller transform."""
    u1 = 1.0 - rng.random(shape)  # (0, 1], keeps log finite
    u2 = rng.random(shape)
    radius = np.sqrt(-np.log(u1))  # sqrt(-2 ln u1) / sqrt(2)
    return radius * np.exp(2j * np.pi * u2)


# --------------------------------------------------------------------------- #
# Validation helpers
# --------------------------------------------------------------------------- #

def as_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    return v


def as_square(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


def check_normalized(v, tol: float = NORM_TOL) -> np.ndarray:
    v = as_vector(v)
    norm2 = float(np.vdot(v, v).real)
    if abs(norm2 - 1.0) > tol:
        raise NormalizationError(np.sqrt(norm2))
    return v


def check_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = as_square(m)
    err = float(np.max(np.abs(m - m.conj().T)))
    if err > tol:
        raise NotHermitianError(
            f"matrix is not Hermitian: max |M - M^dagger| = {err:.3e} > {tol:.0e}"
        )
    return m


def normalize(v) -> np.ndarray:
    v = as_vector(v)
    return v / np.linalg.norm(v)


# --------------------------------------------------------------------------- #
# Basic operations
# --------------------------------------------------------------------------- #

def inner(a, b) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    a, b = as_vector(a), as_vector(b)
    if a.size != b.size:
        raise DimensionMismatchError(f"inner product of dims {a.size} and {b.size}")
    return complex(np.vdot(a, b))


def projector(v, tol: float = NORM_TOL) -> np.ndarray:
    """Rank-one projector |v><v| of a normalized vector."""
    v = check_normalized(v, tol)
    return np.outer(v, v.conj())


def tensor(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def partial_trace_last(m, sub_dim: int) -> np.ndarray:
    """Trace out the trailing ``sub_dim``-dimensional tensor factor of ``m``."""
    m = as_square(np.asarray(m))
    n = m.shape[0]
    if sub_dim < 1 or n % sub_dim:
        raise DimensionMismatchError(
            f"operator dimension {n} is not divisible by subsystem dimension {sub_dim}"
        )
    keep = n // sub_dim
    return np.einsum("ajbj->ab", m.reshape(keep, sub_dim, keep, sub_dim))


def frobenius(m) -> float:
    return float(np.linalg.norm(np.asarray(m)))


# --------------------------------------------------------------------------- #
# Hermitian eigendecomposition (cyclic Jacobi)
# --------------------------------------------------------------------------- #

def _round_robin(n: int) -> list[list[tuple[int, int]]]:
    """Tournament schedule: n-1 rounds (n padded to even) of disjoint pairs."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            if p < n and q < n:
                pairs.append((min(p, q), max(p, q)))
        rounds.append(pairs)
        players = [players[0], players[-1], *players[1:-1]]
    return rounds


def _off_norm(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return frobenius(off)


def eigh(m, tol: float = JACOBI_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Each round of a sweep annihilates a set of disjoint off-diagonal pairs at
    once (round-robin ordering), so a sweep is ``n - 1`` dense products.

    Returns
    -------
    eigenvalues : ndarray
        Real, in descending order.
    eigenvectors : ndarray
        Unitary matrix whose column ``k`` belongs to ``eigenvalues[k]``.
    """
    a = check_hermitian(m).copy()
    n = a.shape[0]
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=np.complex128)
    threshold = tol * max(1.0, frobenius(a))
    schedule = _round_robin(n)

    for _ in range(JACOBI_MAX_SWEEPS):
        if _off_norm(a) < threshold:
            break
        for pairs in schedule:
            if not pairs:
                continue
            p = np.array([pq[0] for pq in pairs])
            q = np.array([pq[1] for pq in pairs])
            apq = a[p, q]
            mag = np.abs(apq)
            active = mag > 0.0
            if not np.any(active):
                continue
            p, q, apq, mag = p[active], q[active], apq[active], mag[active]
            phase = apq / mag
            theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
            sign = np.where(theta >= 0.0, 1.0, -1.0)
            big = np.abs(theta) > 1e100
            safe_theta = np.where(big, 0.0, theta)
            t = np.where(
                big,
                0.5 / np.where(big, theta, 1.0),
                sign / (np.abs(safe_theta) + np.sqrt(safe_theta**2 + 1.0)),
            )
            c = 1.0 / np.sqrt(t**2 + 1.0)
            s = t * c
            # 2x2 block: diag(1, conj(phase)) @ [[c, s], [-s, c]]
            u = np.eye(n, dtype=np.complex128)
            u[p, p] = c
            u[p, q] = s
            u[q, p] = -s * phase.conj()
            u[q, q] = c * phase.conj()
            a = u.conj().T @ a @ u
            a[p, q] = 0.0
            a[q, p] = 0.0
            v = v @ u
        a = 0.5 * (a + a.conj().T)

    w = np.diag(a).real.copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def eigvalsh(m) -> np.ndarray:
    return eigh(m)[0]


def min_eigenvalue(m) -> float:
    return float(eigh(m)[0][-1])


# --------------------------------------------------------------------------- #
# Density operators
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class DensityOperator:
    """Trace-one, Hermitian, positive-semidefinite operator.

    Positivity is certified with :func:`eigh` unless ``check_positivity`` is
    off, which is meant for operators that are positive by construction and
    too large for a dense eigensolve (tensor powers).
    """

    matrix: np.ndarray
    check_positivity: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        m = check_hermitian(self.matrix)
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"trace must be 1, got {tr.real:.17g}")
        if self.check_positivity:
            lam = min_eigenvalue(m)
            if lam < POSITIVITY_TOL:
                raise InvalidStateError(
                    f"operator is not positive semidefinite: min eigenvalue {lam:.3e}",
                    min_eigenvalue=lam,
                )

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityOperator":
        return cls(np.eye(d, dtype=np.complex128) / d)

    @classmethod
    def pure(cls, v) -> "DensityOperator":
        return cls(projector(v))


def random_density(d: int, rank: int | None = None, seed: int = 0,
                   stream: tuple[int, ...] = ()) -> DensityOperator:
    """Ginibre-ensemble state G G^dagger / tr(G G^dagger), G of shape d x rank.

    ``stream`` selects an independent sub-stream of ``seed`` (see
    :func:`make_rng`).
    """
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    rank = d if rank is None else rank
    if not 1 <= rank <= d:
        raise ValueError(f"rank must satisfy 1 <= rank <= {d}, got {rank}")
    g = complex_normal(make_rng(seed, *stream), (d, rank))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityOperator(rho / np.trace(rho).real)


def random_pure_vector(d: int, seed: int, stream: tuple[int, ...] = ()) -> np.ndarray:
    return normalize(complex_normal(make_rng(seed, *stream), d))


def random_unitary(d: int, seed: int, stream: tuple[int, ...] = ()) -> np.ndarray:
    """Haar-random unitary: QR of a Ginibre matrix with the phase of R fixed."""
    z = complex_normal(make_rng(seed, *stream), (d, d))
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))
