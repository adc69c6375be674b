"""Exchangeable n-system states built from finite mixtures of i.i.d. states.

For weights w_k and single-system states rho_k the n-system state is

    rho^(n) = sum_k w_k rho_k^{(x) n}.

Everything here is dense; the total dimension d**n is capped at 4096.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sicqb.errors import CapacityError, DimensionMismatchError
from sicqb.hilbert import MAX_DENSE_DIM, DensityOperator, frobenius, make_rng, partial_trace_last
from sicqb.qbist import to_probs
from sicqb.sic import SicPovm, effects

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class DeFinettiMixture:
    weights: np.ndarray
    components: tuple[DensityOperator, ...]

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        comps = tuple(c if isinstance(c, DensityOperator) else DensityOperator(c)
                      for c in self.components)
        if w.ndim != 1 or w.size == 0 or w.size != len(comps):
            raise ValueError(
                f"need one weight per component, got {w.size} weights and {len(comps)} components"
            )
        if np.any(w <= 0.0):
            raise ValueError("mixture weights must be strictly positive")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"mixture weights sum to {w.sum():.17g}, not 1")
        dims = {c.dim for c in comps}
        if len(dims) != 1:
            raise DimensionMismatchError(f"components have differing dimensions {sorted(dims)}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def barycenter(self) -> np.ndarray:
        return np.einsum("k,kij->ij", self.weights, np.array([c.matrix for c in self.components]))


@dataclass(frozen=True)
class ExchangeableState:
    n: int
    d: int
    state: DensityOperator


def _check_cap(d: int, n: int):
    if n < 1:
        raise ValueError(f"number of systems must be positive, got {n}")
    if d**n > MAX_DENSE_DIM:
        raise CapacityError(
            f"d^n = {d}^{n} = {d**n} exceeds the dense cap of {MAX_DENSE_DIM}"
        )


def tensor_power(rho, n: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    out = rho
    for _ in range(n - 1):
        out = np.kron(out, rho)
    return out


def build_exchangeable(mix: DeFinettiMixture, n: int) -> ExchangeableState:
    """sum_k w_k rho_k^{(x) n}.

    Raises ``CapacityError`` when d**n > 4096.
    """
    d = mix.dim
    _check_cap(d, n)
    total = np.zeros((d**n, d**n), dtype=np.complex128)
    for w, comp in zip(mix.weights, mix.components):
        total += w * tensor_power(comp.matrix, n)
    return ExchangeableState(n, d, DensityOperator(total, check_positivity=False))


def swap_permutation(d: int, n: int, m: int) -> np.ndarray:
    """Product-basis relabelling that exchanges tensor factors m and m+1."""
    return np.arange(d**n).reshape((d,) * n).swapaxes(m, m + 1).ravel()


def check_symmetry(e: ExchangeableState) -> dict:
    """Largest Frobenius change of the state under any adjacent factor swap.

    Adjacent transpositions generate the symmetric group, so a zero result
    means full permutation invariance.
    """
    rho = e.state.matrix
    worst = 0.0
    for m in range(e.n - 1):
        perm = swap_permutation(e.d, e.n, m)
        worst = max(worst, frobenius(rho[np.ix_(perm, perm)] - rho))
    return {"max_asymmetry": worst}


def check_extendability(mix: DeFinettiMixture, n: int) -> dict:
    """Frobenius distance between tr_last(rho^(n+1)) and rho^(n)."""
    d = mix.dim
    _check_cap(d, n + 1)
    bigger = build_exchangeable(mix, n + 1).state.matrix
    reduced = partial_trace_last(bigger, d)
    del bigger
    return {"max_inconsistency": frobenius(reduced - build_exchangeable(mix, n).state.matrix)}


# --------------------------------------------------------------------------- #
# SIC outcome statistics
# --------------------------------------------------------------------------- #

def exact_outcome_law(s: SicPovm, rho_n, n: int) -> np.ndarray:
    """Joint law of n SIC measurements on an n-system state.

    Outcome tuples ``(i_1, ..., i_n)`` are flattened with ``i_1`` most
    significant, matching the Kronecker ordering of the systems.
    """
    d = s.dim
    h = effects(s).effects                     # (d^2, d, d)
    cur = np.asarray(rho_n, dtype=np.complex128)[None, :, :]
    for _ in range(n):
        outcomes, dim = cur.shape[0], cur.shape[1]
        rest = dim // d
        cur = cur.reshape(outcomes, d, rest, d, rest)
        cur = np.einsum("iba,maxby->mixy", h, cur).reshape(outcomes * d * d, rest, rest)
    return cur[:, 0, 0].real


def product_mixture_law(mix: DeFinettiMixture, s: SicPovm, n: int) -> np.ndarray:
    """sum_k w_k (p_k x ... x p_k), with p_k the SIC probabilities of rho_k."""
    law = 0.0
    for w, comp in zip(mix.weights, mix.components):
        p = to_probs(s, comp.matrix).probs
        joint = np.ones(1)
        for _ in range(n):
            joint = np.multiply.outer(joint, p).ravel()
        law = law + w * joint
    return np.asarray(law)


def sample_as_if(mix: DeFinettiMixture, s: SicPovm, n: int, trials: int, seed: int) -> np.ndarray:
    """Empirical joint law: pick rho_k by weight, then n i.i.d. SIC outcomes.

    Component draws use stream ``(seed, 0)``; outcomes for component k use
    stream ``(seed, 1, k)``.  Results are aggregated in component order.
    """
    d2 = s.dim**2
    ks = make_rng(seed, 0).choice(len(mix.weights), size=trials, p=mix.weights)
    counts = np.zeros(d2**n, dtype=np.int64)
    place = d2 ** np.arange(n - 1, -1, -1)
    for k, comp in enumerate(mix.components):
        count = int(np.sum(ks == k))
        if count == 0:
            continue
        p = to_probs(s, comp.matrix).probs
        outcomes = make_rng(seed, 1, k).choice(d2, size=(count, n), p=p / p.sum())
        counts += np.bincount(outcomes @ place, minlength=d2**n)
    return counts / trials


def as_if_statistics(mix: DeFinettiMixture, s: SicPovm, n: int, seed: int,
                     trials: int = 100_000) -> dict:
    """Compare the as-if i.i.d. sampling story with the exchangeable state.

    Returns the exact joint law of ``build_exchangeable(mix, n)`` under the
    n-fold SIC measurement, its distance to the closed-form mixture of
    product laws, and the total-variation distance of a Monte-Carlo sample
    of the as-if process from it.
    """
    if s.dim != mix.dim:
        raise DimensionMismatchError(f"SIC dimension {s.dim} differs from mixture dimension {mix.dim}")
    exact = exact_outcome_law(s, build_exchangeable(mix, n).state.matrix, n)
    product = product_mixture_law(mix, s, n)
    empirical = sample_as_if(mix, s, n, trials, seed)
    return {
        "exact_law": exact,
        "product_law": product,
        "exact_law_gap": float(np.max(np.abs(exact - product))),
        "trials": trials,
        "tv_distance": float(0.5 * np.sum(np.abs(empirical - exact))),
    }
