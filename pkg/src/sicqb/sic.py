"""Verification and numerical search of Weyl-Heisenberg covariant SICs.

Only group-covariant SICs (orbits of one fiducial vector) are searched for;
every known SIC is of this kind, but the verifier accepts arbitrary sets of
d^2 vectors.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from sicqb.errors import DimensionMismatchError, NormalizationError
from sicqb.hilbert import as_vector, complex_normal, eigh, make_rng, normalize
from sicqb.weyl_heisenberg import WhGroup, orbit

log = logging.getLogger(__name__)

VERIFY_TOL = 1e-10
INPUT_NORM_TOL = 1e-10
SUM_TOL = 1e-10
GRAM_MIN_SV = 1e-8


class WrongCountError(ValueError):
    """Candidate set does not contain exactly d^2 vectors."""


class SicVerificationError(ValueError):
    """The SIC conditions fail; carries the worst-offending pair."""

    def __init__(self, message: str, pair: tuple[int, int] | None, deviation: float,
                 residual: float):
        self.pair = pair
        self.deviation = deviation
        self.residual = residual
        super().__init__(message)


# --------------------------------------------------------------------------- #
# SIC representation and verification
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class SicPovm:
    """d^2 unit vectors with pairwise |<psi_i|psi_j>|^2 = 1/(d+1).

    Build with :func:`verify_sic` (or :meth:`from_fiducial`); the constructor
    itself does not check the SIC conditions.
    """

    dim: int
    vectors: np.ndarray = field(repr=False)  # (d*d, d), row i is |psi_i>
    residual: float = 0.0
    sum_deviation: float = 0.0
    gram_min_singular_value: float = 0.0

    @cached_property
    def projectors(self) -> np.ndarray:
        """Pi_i = |psi_i><psi_i|, shape ``(d*d, d, d)``."""
        return np.einsum("ij,ik->ijk", self.vectors, self.vectors.conj())

    @classmethod
    def from_fiducial(cls, fiducial, tol: float = VERIFY_TOL) -> "SicPovm":
        v = as_vector(fiducial)
        return verify_sic(orbit(WhGroup(v.size), v), tol)


def _overlap_squares(vectors: np.ndarray) -> np.ndarray:
    return np.abs(vectors.conj() @ vectors.T) ** 2


def verify_sic(vectors, tol: float = VERIFY_TOL) -> SicPovm:
    """Check the SIC conditions on a candidate set of d^2 vectors.

    Raises
    ------
    WrongCountError
        The number of vectors is not the square of their dimension.
    DimensionMismatchError
        The vectors do not all have the same dimension.
    NormalizationError
        A vector is off the unit sphere by more than 1e-10.
    SicVerificationError
        An overlap, the frame sum or the Gram rank condition fails; ``pair``
        names the worst pair for overlap failures.
    """
    rows = [np.asarray(v, dtype=np.complex128).ravel() for v in vectors]
    if not rows:
        raise WrongCountError("no vectors given")
    dims = {r.size for r in rows}
    if len(dims) != 1:
        raise DimensionMismatchError(f"vectors have differing dimensions {sorted(dims)}")
    d = dims.pop()
    if len(rows) != d * d:
        raise WrongCountError(f"expected d^2 = {d * d} vectors of dimension {d}, got {len(rows)}")
    vecs = np.array(rows)
    norms = np.linalg.norm(vecs, axis=1)
    bad = int(np.argmax(np.abs(norms**2 - 1.0)))
    if abs(norms[bad] ** 2 - 1.0) > INPUT_NORM_TOL:
        raise NormalizationError(
            float(norms[bad]), f"vector {bad} is not normalized: norm = {norms[bad]!r}"
        )

    target = 1.0 / (d + 1)
    dev = np.abs(_overlap_squares(vecs) - target)
    np.fill_diagonal(dev, -1.0)
    flat = int(np.argmax(dev))
    i, j = divmod(flat, d * d)
    residual = float(max(dev[i, j], 0.0))
    if residual > tol:
        raise SicVerificationError(
            f"overlap condition fails for pair ({i}, {j}): "
            f"|<psi_i|psi_j>|^2 = {dev[i, j] + target:.17g}, expected {target:.17g} "
            f"(deviation {residual:.3e} > tol {tol:.0e})",
            pair=(i, j), deviation=residual, residual=residual,
        )

    sic = SicPovm(d, vecs, residual)
    sum_dev = float(np.max(np.abs(sic.projectors.sum(axis=0) - d * np.eye(d))))
    if sum_dev > SUM_TOL:
        raise SicVerificationError(
            f"projectors do not sum to d*I: max deviation {sum_dev:.3e}",
            pair=None, deviation=sum_dev, residual=residual,
        )
    min_sv = float(np.min(np.abs(eigh(gram_matrix(sic))[0])))
    if min_sv <= GRAM_MIN_SV:
        raise SicVerificationError(
            f"projectors are linearly dependent: Gram min singular value {min_sv:.3e}",
            pair=None, deviation=min_sv, residual=residual,
        )
    return SicPovm(d, vecs, residual, sum_dev, min_sv)


def overlap_residual(vectors) -> float:
    """max_{i != j} | |<psi_i|psi_j>|^2 - 1/(d+1) |, with no other checks."""
    vecs = np.asarray(vectors, dtype=np.complex128)
    d = vecs.shape[1]
    dev = np.abs(_overlap_squares(vecs) - 1.0 / (d + 1))
    np.fill_diagonal(dev, 0.0)
    return float(dev.max())


def gram_matrix(s: SicPovm) -> np.ndarray:
    """Hilbert-Schmidt Gram matrix tr(Pi_i Pi_j) = |<psi_i|psi_j>|^2."""
    return _overlap_squares(s.vectors)


@dataclass(frozen=True)
class SicEffects:
    effects: np.ndarray  # (d*d, d, d), H_i = Pi_i / d

    @property
    def dim(self) -> int:
        return self.effects.shape[1]


def effects(s: SicPovm) -> SicEffects:
    """The POVM elements H_i = Pi_i / d."""
    return SicEffects(s.projectors / s.dim)


# --------------------------------------------------------------------------- #
# Frame potential
# --------------------------------------------------------------------------- #

def frame_potential(g: WhGroup, fiducial) -> float:
    """Sum over non-identity displacements of (|<psi|D psi>|^2 - 1/(d+1))^2.

    Evaluated on ``fiducial / |fiducial|``, so the value is invariant under
    rescaling and global phase.  It vanishes exactly on SIC fiducials.
    """
    err, _ = _residuals(g, as_vector(fiducial), jacobian=False)
    return float(np.sum(err**2))


def _residuals(g: WhGroup, x: np.ndarray, jacobian: bool):
    """Overlap deviations s_k - 1/(d+1) for k != 0 and, optionally, their
    complex gradients 2 ds_k/d conj(x) stacked as rows."""
    d = g.dim
    if x.size != d:
        raise DimensionMismatchError(f"vector of dimension {x.size} for group of dimension {d}")
    dx = g.displacements @ x                   # D_k x
    norm2 = float(np.vdot(x, x).real)
    a = dx @ x.conj()                          # <x|D_k x>
    err = (np.abs(a) ** 2 / norm2**2 - 1.0 / (d + 1))[1:]
    if not jacobian:
        return err, None
    ddx = np.einsum("kji,j->ki", g.displacements.conj(), x)   # D_k^dagger x
    ds = (a.conj()[:, None] * dx + a[:, None] * ddx) / norm2**2 \
        - 2.0 * (np.abs(a) ** 2 / norm2**3)[:, None] * x[None, :]
    return err, 2.0 * ds[1:]


def frame_potential_and_gradient(g: WhGroup, x) -> tuple[float, np.ndarray]:
    """Frame potential and its gradient with respect to the raw vector ``x``.

    The gradient is returned as a complex vector ``dF/dRe(x) + i dF/dIm(x)``
    (twice the Wirtinger derivative dF/d conj(x)).
    """
    err, jac = _residuals(g, as_vector(x), jacobian=True)
    return float(np.sum(err**2)), 2.0 * (err @ jac)


def as_real(x: np.ndarray) -> np.ndarray:
    return np.concatenate([x.real, x.imag])


def as_complex(r: np.ndarray) -> np.ndarray:
    n = r.size // 2
    return r[:n] + 1j * r[n:]


# --------------------------------------------------------------------------- #
# Search
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class SearchConfig:
    max_restarts: int = 50
    max_iters: int = 20000
    success_threshold: float = 1e-16
    seed: int = 0
    polish_iters: int = 200
    polish_target: float = 1e-28


@dataclass(frozen=True)
class SearchReport:
    dim: int
    fiducial: np.ndarray = field(repr=False)
    objective: float
    restarts_used: int
    iterations: int
    seed: int
    converged: bool


ARMIJO_C1 = 1e-4
MAX_BACKTRACKS = 60


def _descend(g: WhGroup, x: np.ndarray, max_iters: int, stop_below: float):
    """Gradient descent on the sphere with Armijo backtracking.

    The trial step length is the Barzilai-Borwein estimate from the previous
    iterate; backtracking halves it until sufficient decrease holds.
    Returns ``(x, value, iterations)``.
    """
    f, grad = frame_potential_and_gradient(g, x)
    step = 1.0
    prev_x = prev_grad = None
    it = 0
    for it in range(1, max_iters + 1):
        if f <= stop_below:
            return x, f, it - 1
        gnorm2 = float(np.vdot(grad, grad).real)
        if gnorm2 == 0.0:
            return x, f, it - 1
        if prev_x is not None:
            sx = as_real(x - prev_x)
            yg = as_real(grad - prev_grad)
            sy = float(sx @ yg)
            if sy > 0:
                step = float(sx @ sx) / sy
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            trial = normalize(x - step * grad)
            f_trial, g_trial = frame_potential_and_gradient(g, trial)
            if f_trial <= f - ARMIJO_C1 * step * gnorm2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            return x, f, it - 1
        prev_x, prev_grad = x, grad
        x, f, grad = trial, f_trial, g_trial
    return x, f, it


def _polish(g: WhGroup, x: np.ndarray, max_iters: int, stop_below: float):
    """Levenberg-Marquardt on the overlap deviations.

    Near d = 3 fiducials the frame potential has flat directions and plain
    descent crawls; the Gauss-Newton model does not.  Returns
    ``(x, value, iterations)``.
    """
    err, jac = _residuals(g, x, jacobian=True)
    f = float(err @ err)
    damping = 1e-3
    it = 0
    for it in range(1, max_iters + 1):
        if f <= stop_below:
            return x, f, it - 1
        jr = np.concatenate([jac.real, jac.imag], axis=1)   # (d^2-1, 2d)
        normal = jr.T @ jr
        rhs = -jr.T @ err
        improved = False
        while damping < 1e12:
            lhs = normal + damping * np.diag(np.diag(normal) + 1e-30)
            try:
                step = np.linalg.solve(lhs, rhs)
            except np.linalg.LinAlgError:
                damping *= 10.0
                continue
            trial = normalize(x + as_complex(step))
            err_t, jac_t = _residuals(g, trial, jacobian=True)
            f_t = float(err_t @ err_t)
            if f_t < f:
                x, err, jac, f = trial, err_t, jac_t, f_t
                damping = max(damping / 3.0, 1e-15)
                improved = True
                break
            damping *= 4.0
        if not improved:
            return x, f, it - 1
    return x, f, it


def search_fiducial(d: int, config: SearchConfig = SearchConfig()) -> SearchReport:
    """Minimize the frame potential from seeded random starts.

    Restart ``r`` draws its start from PCG64 stream ``(seed, r)``, so the
    report does not depend on execution order.  A run whose objective falls
    below ``success_threshold`` is polished by Levenberg-Marquardt and
    reported as converged; otherwise the best restart is returned with
    ``converged=False``.  With ``max_restarts == 0`` nothing is tried and the
    report carries the first basis vector.
    """
    if d < 2:
        raise ValueError(f"SIC search needs d >= 2, got {d}")
    g = WhGroup(d)
    best_x = np.eye(d, dtype=np.complex128)[0]
    best_f = frame_potential(g, best_x)
    total_iters = 0
    for r in range(config.max_restarts):
        x0 = normalize(complex_normal(make_rng(config.seed, r), d))
        x, f, iters = _descend(g, x0, config.max_iters, config.success_threshold)
        total_iters += iters
        log.debug("d=%d restart %d: objective %.3e after %d iterations", d, r, f, iters)
        if f <= config.success_threshold:
            x, f, extra = _polish(g, x, config.polish_iters, config.polish_target)
            total_iters += extra
            return SearchReport(d, _fix_phase(x), f, r + 1, total_iters, config.seed, True)
        if r == 0 or f < best_f:
            best_x, best_f = x, f
    return SearchReport(d, _fix_phase(best_x), best_f, config.max_restarts, total_iters,
                        config.seed, False)


def _fix_phase(x: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-modulus entry is real positive."""
    k = int(np.argmax(np.abs(x)))
    return normalize(x * (abs(x[k]) / x[k]))
