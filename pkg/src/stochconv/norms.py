"""Monte Carlo estimators for mixed process norms with bootstrap errors.

Two norms are estimated from grid samples: the time-mixed norm
(integral_0^T (E |X_t|^p)^(q/p) dt)^(1/q) of a path ensemble, and the
two-parameter norm
(integral (integral (E |zeta(s, t)|^p)^(q/p) ds)^(r/q) dt)^(1/r) of a
two-parameter field.  Node quadrature is trapezoidal in each time variable,
the path mean sits innermost, and standard errors come from a seeded
multinomial bootstrap over paths (200 resamples by default).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, StochConvError
from .hilbert import SemigroupSpec, SpectralOperator, operator_matrix, semigroup_eval
from .noise import TimeGrid

__all__ = [
    "NormReport",
    "TwoParameterField",
    "estimate_lpq",
    "estimate_lpqr",
    "singular_kernel_field",
    "deterministic_lpq_norm",
]


@dataclass(frozen=True)
class NormReport:
    """A norm estimate with its standard error and the exponents used."""

    estimate: float
    standard_error: float
    p: float
    q: float
    r: float | None = None
    n_paths: int = 0
    n_boot: int = 0

    def __post_init__(self):
        if not np.isfinite(self.estimate) or self.estimate < 0.0:
            raise StochConvError(f"estimate must be finite nonnegative, got {self.estimate}")
        if self.standard_error < 0.0:
            raise StochConvError("standard error must be nonnegative")

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "se": self.standard_error,
            "p": self.p,
            "q": self.q,
            "r": self.r,
        }


@dataclass(frozen=True)
class TwoParameterField:
    """Pointwise magnitudes |zeta((omega, s), t)| on the grid, per path.

    ``magnitudes`` has shape (paths, n_nodes, n_nodes); axis 1 is the process
    time s, axis 2 the parameter time t.
    """

    magnitudes: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        mags = np.asarray(self.magnitudes, dtype=np.float64)
        mags.setflags(write=False)
        object.__setattr__(self, "magnitudes", mags)
        n_nodes = self.grid.n_steps + 1
        if mags.ndim != 3 or mags.shape[1:] != (n_nodes, n_nodes):
            raise DimensionMismatchError(
                "field must be (paths, n_nodes, n_nodes)",
                expected=("paths", n_nodes, n_nodes),
                got=mags.shape,
            )
        if np.any(mags < 0.0):
            raise StochConvError("field magnitudes must be nonnegative")

    @classmethod
    def from_ensembles(cls, ensembles: Sequence, grid: TimeGrid) -> "TwoParameterField":
        """Stack one s-indexed path ensemble per t-node into a field."""
        n_nodes = grid.n_steps + 1
        if len(ensembles) != n_nodes:
            raise DimensionMismatchError(
                "need one ensemble per t-node", expected=n_nodes, got=len(ensembles)
            )
        mags = np.stack(
            [np.sqrt(np.sum(e.values**2, axis=-1)) for e in ensembles], axis=2
        )
        return cls(mags, grid)


def _bootstrap_se(per_path_stat, n_paths: int, n_boot: int, seed: int) -> float:
    """SE of a path-mean functional via multinomial resampling weights.

    ``per_path_stat(weights)`` must return the estimate under path weights
    summing to n_paths.
    """
    if n_boot <= 1 or n_paths < 2:
        return 0.0
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n_paths, np.full(n_paths, 1.0 / n_paths), size=n_boot)
    values = np.array([per_path_stat(c.astype(np.float64)) for c in counts])
    return float(np.std(values, ddof=1))


def estimate_lpq(
    ensemble, p: float, q: float, n_boot: int = 200, seed: int = 0
) -> NormReport:
    """Estimate the time-mixed (p, q) norm of a path ensemble.

    Trapezoidal quadrature over the grid nodes of the path-mean p-th moment,
    then the outer 1/q power; the bootstrap resamples whole paths.

    Raises:
      StochConvError: if p < 1 or q < 1.
    """
    if p < 1.0 or q < 1.0:
        raise StochConvError(f"exponents must satisfy p, q >= 1, got p={p}, q={q}")
    mags_p = np.sqrt(np.sum(ensemble.values**2, axis=-1)) ** p
    nodes = ensemble.grid.nodes
    n_paths = mags_p.shape[0]

    def stat(weights):
        moment = weights @ mags_p / n_paths
        return float(np.trapezoid(moment ** (q / p), nodes) ** (1.0 / q))

    estimate = stat(np.ones(n_paths))
    se = _bootstrap_se(stat, n_paths, n_boot, seed)
    return NormReport(estimate, se, p=p, q=q, r=None, n_paths=n_paths, n_boot=n_boot)


def estimate_lpqr(
    field: TwoParameterField,
    p: float,
    q: float,
    r: float,
    n_boot: int = 200,
    seed: int = 0,
) -> NormReport:
    """Estimate the two-parameter (p, q, r) norm of a field.

    Nested trapezoidal node quadrature, inner over the process time, outer
    over the parameter time, with the path mean innermost.

    Raises:
      StochConvError: if any exponent is < 1.
    """
    if p < 1.0 or q < 1.0 or r < 1.0:
        raise StochConvError(
            f"exponents must satisfy p, q, r >= 1, got p={p}, q={q}, r={r}"
        )
    mags_p = field.magnitudes**p
    nodes = field.grid.nodes
    n_paths = mags_p.shape[0]

    def stat(weights):
        moment = np.einsum("m,mst->st", weights, mags_p) / n_paths
        inner = np.trapezoid(moment ** (q / p), nodes, axis=0)
        return float(np.trapezoid(inner ** (r / q), nodes) ** (1.0 / r))

    estimate = stat(np.ones(n_paths))
    se = _bootstrap_se(stat, n_paths, n_boot, seed)
    return NormReport(estimate, se, p=p, q=q, r=r, n_paths=n_paths, n_boot=n_boot)


def singular_kernel_field(
    phi,
    semigroup: SemigroupSpec,
    grid: TimeGrid,
    beta: float,
    weight: SpectralOperator | None = None,
) -> TwoParameterField:
    """Magnitude field of the singular-kernel family for deterministic data.

    Entry (s_i, t_k) is (t_k - s_i)^(-beta) |S(t_k - s_i) Phi_{s_i}| for
    s_i < t_k and 0 otherwise, with |.| the (optionally weighted)
    Hilbert-Schmidt norm.  The returned field has a single path since the
    expectation of a deterministic integrand is trivial.
    """
    from .ito import CONSTANT, TIME_VARYING

    if phi.kind not in (CONSTANT, TIME_VARYING):
        raise StochConvError("field construction requires a deterministic integrand")
    if not 0.0 <= beta < 1.0:
        raise StochConvError(f"beta must lie in [0, 1), got {beta}")
    n_nodes = grid.n_steps + 1
    n_lags = grid.n_steps
    if phi.kind == CONSTANT:
        mats = np.broadcast_to(
            operator_matrix(phi.constant), (n_nodes, phi.codomain.dim, phi.domain.dim)
        )
    else:
        if phi.node_matrices.shape[0] < n_nodes:
            mats = np.concatenate(
                [phi.node_matrices, phi.node_matrices[-1:]], axis=0
            )
        else:
            mats = phi.node_matrices[:n_nodes]
    q = np.ones(phi.domain.dim) if weight is None else weight.eigenvalues
    if np.any(q < 0.0):
        raise StochConvError("weight eigenvalues must be nonnegative")
    lags = np.arange(1, n_lags + 1) * grid.dt
    kernel = lags ** (-beta) if beta > 0.0 else np.ones(n_lags)
    mags = np.zeros((1, n_nodes, n_nodes))
    if semigroup.is_diagonal:
        # |S(lag) M Q^(1/2)|_HS^2 = sum_h exp(-2 rate_h lag) * sum_u M[h,u]^2 q_u
        row_mass = np.einsum("shu,u->sh", mats**2, q)
        decay = np.exp(-2.0 * np.outer(lags, semigroup.rates))
        hs = np.sqrt(row_mass @ decay.T)  # (s, lag)
        for j in range(1, n_lags + 1):
            mags[0, : n_nodes - j, j:][np.diag_indices(n_nodes - j)] = (
                kernel[j - 1] * hs[: n_nodes - j, j - 1]
            )
    else:
        for j in range(1, n_lags + 1):
            s_mat = operator_matrix(semigroup_eval(semigroup, lags[j - 1]))
            prod = np.einsum("hg,sgu->shu", s_mat, mats[: n_nodes - j])
            hs = np.sqrt(np.einsum("shu,u->s", prod**2, q))
            mags[0, : n_nodes - j, j:][np.diag_indices(n_nodes - j)] = (
                kernel[j - 1] * hs
            )
    return TwoParameterField(mags, grid)


def deterministic_lpq_norm(
    phi, grid: TimeGrid, q_exponent: float, weight: SpectralOperator | None = None
) -> float:
    """Left-rule discrete time norm of a deterministic integrand.

    Returns (sum_{i<N} |Phi_{t_i}|^q dt)^(1/q) with the optionally weighted
    Hilbert-Schmidt magnitude; for a deterministic process the inner
    expectation is trivial so the p exponent drops out.
    """
    from .ito import CONSTANT, TIME_VARYING
    from .hilbert import hs_norm

    if q_exponent < 1.0:
        raise StochConvError(f"exponent must be >= 1, got {q_exponent}")
    if phi.kind == CONSTANT:
        value = hs_norm(phi.constant, weight)
        return value * grid.horizon ** (1.0 / q_exponent)
    if phi.kind != TIME_VARYING:
        raise StochConvError("norm requires a deterministic integrand")
    q = np.ones(phi.domain.dim) if weight is None else weight.eigenvalues
    mats = phi.node_matrices[: grid.n_steps]
    hs = np.sqrt(np.einsum("ihu,u->i", mats**2, q))
    return float((np.sum(hs**q_exponent) * grid.dt) ** (1.0 / q_exponent))
