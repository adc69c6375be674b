"""Clock, shift and displacement operators of the discrete Weyl-Heisenberg group.

Operators are built from closed-form entries rather than matrix powers:

    X^p Z^q |k> = omega^(q k) |k + p mod d>
    D_{p,q}     = tau^(p q) X^p Z^q,   tau = -exp(i pi / d)

Orbit element ``i`` is ``D_{p,q}|psi>`` with ``i = p * d + q``; every
probability vector in this package is indexed in that order.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from sicqb.errors import DimensionMismatchError
from sicqb.hilbert import check_normalized

TAU_CONVENTION = "-exp(i*pi/d)"


@dataclass(frozen=True)
class WhGroup:
    """Weyl-Heisenberg group data for dimension ``dim``.

    ``tau_sign`` selects the phase convention ``tau = tau_sign * exp(i pi/d)``;
    the default -1 is the one used throughout the SIC literature.  Overlap
    moduli do not depend on it.
    """

    dim: int
    tau_sign: int = -1

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dimension must be positive, got {self.dim}")
        if self.tau_sign not in (1, -1):
            raise ValueError("tau_sign must be +1 or -1")

    @property
    def omega(self) -> complex:
        return complex(np.exp(2j * np.pi / self.dim))

    @property
    def tau(self) -> complex:
        return complex(self.tau_sign * np.exp(1j * np.pi / self.dim))

    def tau_power(self, k: int) -> complex:
        # tau^k from the exact angle, tau^(2d) = 1
        k = k % (2 * self.dim)
        sign = self.tau_sign**k
        return complex(sign * np.exp(1j * np.pi * k / self.dim))

    def omega_power(self, k) -> np.ndarray:
        return np.exp(2j * np.pi * (np.asarray(k) % self.dim) / self.dim)

    @cached_property
    def displacements(self) -> np.ndarray:
        """All d^2 displacement operators, shape ``(d*d, d, d)``, orbit order."""
        d = self.dim
        ops = np.zeros((d * d, d, d), dtype=np.complex128)
        k = np.arange(d)
        for p in range(d):
            rows = (k + p) % d
            for q in range(d):
                ops[p * d + q, rows, k] = self.tau_power(p * q) * self.omega_power(q * k)
        ops.setflags(write=False)
        return ops


def shift(g: WhGroup) -> np.ndarray:
    """Cyclic shift X|k> = |k+1 mod d>."""
    d = g.dim
    return np.roll(np.eye(d, dtype=np.complex128), 1, axis=0)


def clock(g: WhGroup) -> np.ndarray:
    """Clock Z = diag(1, omega, ..., omega^(d-1))."""
    return np.diag(g.omega_power(np.arange(g.dim))).astype(np.complex128)


def displacement(g: WhGroup, p: int, q: int) -> np.ndarray:
    d = g.dim
    if not (0 <= p < d and 0 <= q < d):
        raise ValueError(f"displacement indices must lie in [0, {d}), got ({p}, {q})")
    return g.displacements[p * d + q].copy()


def orbit(g: WhGroup, fiducial) -> np.ndarray:
    """The d^2 vectors D_{p,q}|fiducial>, shape ``(d*d, d)``, row i = p*d + q."""
    v = check_normalized(fiducial, tol=1e-10)
    if v.size != g.dim:
        raise DimensionMismatchError(
            f"fiducial has dimension {v.size}, group has dimension {g.dim}"
        )
    return g.displacements @ v


def overlaps(g: WhGroup, fiducial) -> np.ndarray:
    """<psi|D_{p,q}|psi> for every displacement, in orbit order."""
    v = np.asarray(fiducial, dtype=np.complex128)
    return np.einsum("j,kjl,l->k", v.conj(), g.displacements, v)
