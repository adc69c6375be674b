"""Quantum states as SIC outcome probabilities, and the Born rule on them.

A state rho is carried by the d^2 numbers p_i = tr(rho H_i), H_i = Pi_i/d,
and recovered as

    rho = sum_i ((d + 1) p_i - 1/d) Pi_i.

For a von Neumann measurement {D_j} performed directly, the Born rule then
reads

    Q_j = (d + 1) sum_i p_i r_ji - 1,    r_ji = tr(Pi_i D_j),

where r_ji is the probability of D_j after the SIC measurement returned i
and left the system in Pi_i.  The classical law of total probability over
the same inputs gives P_j = sum_i p_i r_ji instead.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sicqb.errors import DimensionMismatchError, InvalidStateError
from sicqb.hilbert import (
    POSITIVITY_TOL,
    DensityOperator,
    check_normalized,
    make_rng,
    min_eigenvalue,
    random_density,
    random_pure_vector,
    random_unitary,
)
from sicqb.sic import SicPovm

SUM_TOL = 1e-12
ENTRY_TOL = 1e-10
ORTHONORMAL_TOL = 1e-10
STOCHASTIC_TOL = 1e-10


@dataclass(frozen=True)
class SicProbabilityVector:
    """Distribution over the d^2 SIC outcomes, in orbit order.

    Construction checks only that ``probs`` lies on the simplex.  Whether it
    is the image of some density operator is a separate question, answered
    by :func:`is_quantum` / :func:`from_probs`.
    """

    dim: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64)
        if p.shape != (self.dim**2,):
            raise DimensionMismatchError(
                f"expected {self.dim**2} probabilities for d = {self.dim}, got shape {p.shape}"
            )
        if np.any(p < -ENTRY_TOL):
            raise ValueError(f"negative probability {p.min():.3e}")
        total = float(p.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total:.17g}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)

    @classmethod
    def uniform(cls, d: int) -> "SicProbabilityVector":
        return cls(d, np.full(d * d, 1.0 / (d * d)))


def _probs(p) -> tuple[int, np.ndarray]:
    if isinstance(p, SicProbabilityVector):
        return p.dim, p.probs
    arr = np.asarray(p, dtype=np.float64)
    d = int(round(np.sqrt(arr.size)))
    if d * d != arr.size:
        raise DimensionMismatchError(f"{arr.size} is not a square number of outcomes")
    return d, arr


def _check_dims(s: SicPovm, d: int, what: str):
    if s.dim != d:
        raise DimensionMismatchError(f"SIC has dimension {s.dim}, {what} has dimension {d}")


# --------------------------------------------------------------------------- #
# State <-> probabilities
# --------------------------------------------------------------------------- #

def to_probs(s: SicPovm, rho) -> SicProbabilityVector:
    """p_i = tr(rho H_i) = <psi_i|rho|psi_i> / d."""
    rho = np.asarray(rho, dtype=np.complex128)
    _check_dims(s, rho.shape[0], "state")
    vals = np.einsum("ij,jk,ik->i", s.vectors.conj(), rho, s.vectors).real / s.dim
    return SicProbabilityVector(s.dim, vals)


def reconstruct(s: SicPovm, p) -> np.ndarray:
    """sum_i ((d+1) p_i - 1/d) Pi_i, with no positivity check."""
    d, probs = _probs(p)
    _check_dims(s, d, "probability vector")
    coeffs = (d + 1) * probs - 1.0 / d
    rho = np.einsum("i,ijk->jk", coeffs, s.projectors)
    return 0.5 * (rho + rho.conj().T)


def from_probs(s: SicPovm, p) -> DensityOperator:
    """Density operator with SIC probabilities ``p``.

    Raises
    ------
    InvalidStateError
        The reconstruction has an eigenvalue below -1e-10, i.e. ``p`` is a
        distribution no quantum state assigns.  ``min_eigenvalue`` holds it.
    """
    rho = reconstruct(s, p)
    lam = min_eigenvalue(rho)
    if lam < POSITIVITY_TOL:
        raise InvalidStateError(
            f"probabilities do not correspond to a quantum state: "
            f"reconstruction has eigenvalue {lam:.17g}",
            min_eigenvalue=lam,
        )
    return DensityOperator(rho / np.trace(rho).real, check_positivity=False)


def is_quantum(s: SicPovm, p) -> bool:
    return min_eigenvalue(reconstruct(s, p)) >= POSITIVITY_TOL


def purity_from_probs(p) -> float:
    """tr(rho^2) = d (d+1) sum_i p_i^2 - 1."""
    d, probs = _probs(p)
    return float(d * (d + 1) * np.dot(probs, probs) - 1.0)


# --------------------------------------------------------------------------- #
# Ground measurements
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class GroundMeasurement:
    """Von Neumann measurement in an orthonormal basis (columns of ``basis``)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=np.complex128)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError(f"basis must be a square matrix of column vectors, got {b.shape}")
        err = float(np.max(np.abs(b.conj().T @ b - np.eye(b.shape[0]))))
        if err > ORTHONORMAL_TOL:
            raise ValueError(f"basis vectors are not orthonormal (max error {err:.3e})")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def projectors(self) -> np.ndarray:
        """D_j = |j><j|, shape ``(d, d, d)``."""
        return np.einsum("ij,kj->jik", self.basis, self.basis.conj())

    @classmethod
    def computational(cls, d: int) -> "GroundMeasurement":
        return cls(np.eye(d, dtype=np.complex128))

    @classmethod
    def random(cls, d: int, seed: int, stream: tuple[int, ...] = ()) -> "GroundMeasurement":
        return cls(random_unitary(d, seed, stream))

    @classmethod
    def containing(cls, v) -> "GroundMeasurement":
        """A basis whose first vector is the normalized ``v``."""
        v = check_normalized(v, tol=1e-10)
        d = v.size
        q, _ = np.linalg.qr(np.column_stack([v, np.eye(d, dtype=np.complex128)]))
        q = q[:, :d]
        q[:, 0] *= np.vdot(q[:, 0], v) / abs(np.vdot(q[:, 0], v))
        return cls(q)


@dataclass(frozen=True)
class ConditionalMatrix:
    """r[j, i] = P(D_j | H_i); each column is a distribution over j."""

    entries: np.ndarray

    def __post_init__(self):
        r = np.array(self.entries, dtype=np.float64)
        d = r.shape[0]
        if r.ndim != 2 or r.shape[1] != d * d:
            raise DimensionMismatchError(f"conditional matrix must be d x d^2, got {r.shape}")
        if np.any(r < -STOCHASTIC_TOL):
            raise ValueError(f"negative conditional probability {r.min():.3e}")
        err = float(np.max(np.abs(r.sum(axis=0) - 1.0)))
        if err > STOCHASTIC_TOL:
            raise ValueError(f"columns must sum to 1 (max error {err:.3e})")
        r.setflags(write=False)
        object.__setattr__(self, "entries", r)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def conditional_matrix(s: SicPovm, m: GroundMeasurement) -> ConditionalMatrix:
    """r[j, i] = tr(Pi_i D_j) = |<j|psi_i>|^2."""
    _check_dims(s, m.dim, "ground measurement")
    return ConditionalMatrix(np.abs(m.basis.conj().T @ s.vectors.T) ** 2)


# --------------------------------------------------------------------------- #
# Two laws of total probability
# --------------------------------------------------------------------------- #

def _inputs(p, r) -> tuple[int, np.ndarray, np.ndarray]:
    d, probs = _probs(p)
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (d, d * d):
        raise DimensionMismatchError(f"conditional matrix shape {r.shape} does not fit d = {d}")
    return d, probs, r


def born_urgleichung(p, r) -> np.ndarray:
    """Q_j = (d+1) sum_i p_i r[j, i] - 1: the Born probabilities of the ground outcomes."""
    d, probs, r = _inputs(p, r)
    return (d + 1) * (r @ probs) - 1.0


def classical_ltp(p, r) -> np.ndarray:
    """P_j = sum_i p_i r[j, i]."""
    _, probs, r = _inputs(p, r)
    return r @ probs


def deviation_report(p, r) -> dict:
    gap = np.abs(classical_ltp(p, r) - born_urgleichung(p, r))
    return {"max_abs_gap": float(gap.max()), "mean_abs_gap": float(gap.mean())}


def born_direct(rho, m: GroundMeasurement) -> np.ndarray:
    """tr(rho D_j), evaluated in Hilbert space."""
    rho = np.asarray(rho, dtype=np.complex128)
    return np.einsum("ji,jk,ki->i", m.basis.conj(), rho, m.basis).real


def urgleichung_report(s: SicPovm, rho, m: GroundMeasurement) -> dict:
    p = to_probs(s, rho)
    r = conditional_matrix(s, m)
    q = born_urgleichung(p, r)
    pc = classical_ltp(p, r)
    direct = born_direct(rho, m)
    return {
        "q": q,
        "p_classical": pc,
        "max_abs_gap": float(np.max(np.abs(q - pc))),
        "born_direct": direct,
        "max_born_error": float(np.max(np.abs(q - direct))),
    }


def mean_gap(s: SicPovm, trials: int, seed: int, pure: bool = True) -> float:
    """Mean of max_j |P_j - Q_j| over seeded random states and ground bases.

    Trial ``t`` draws its state from stream ``(seed, t, 0)`` and its basis
    from stream ``(seed, t, 1)``.
    """
    d = s.dim
    total = 0.0
    for t in range(trials):
        if pure:
            v = random_pure_vector(d, seed, (t, 0))
            rho = np.outer(v, v.conj())
        else:
            rho = random_density(d, seed=seed, stream=(t, 0)).matrix
        m = GroundMeasurement.random(d, seed, (t, 1))
        p = to_probs(s, rho)
        total += deviation_report(p, conditional_matrix(s, m))["max_abs_gap"]
    return total / trials


def gap_table(sics: dict[int, SicPovm], trials: int, seed: int) -> list[dict]:
    """Mean classical-vs-Born gap for random pure states, one row per dimension."""
    return [
        {"d": d, "trials": trials, "mean_max_abs_gap": mean_gap(s, trials, seed)}
        for d, s in sorted(sics.items())
    ]


def expected_pure_gap_qubit() -> float:
    """Closed-form mean of max_j |P_j - Q_j| for Haar-random qubit pure states.

    For d = 2, |P_j - Q_j| = |2 Q_j - 1| / 3 and Q_0 is uniform on [0, 1],
    so the mean is E|2U - 1| / 3 = 1/6.
    """
    return 1.0 / 6.0


def sample_simplex(d: int, count: int, seed: int) -> np.ndarray:
    """``count`` uniform samples from the (d^2 - 1)-simplex (normalized exponentials)."""
    e = -np.log(1.0 - make_rng(seed).random((count, d * d)))
    return e / e.sum(axis=1, keepdims=True)

