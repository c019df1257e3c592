"""Left-point Euler-Ito integration of operator step processes against noise.

The integral of a predictable operator-valued step process is the prefix sum
I(t_k) = sum_{i<k} Phi_{t_i} dW_i, evaluated at the left node of every step
(Ito convention).  Paths are reported at the grid nodes; between nodes the
convention is piecewise-linear interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatchError, PredictabilityError, StochConvError
from .hilbert import HilbertSpec, Operator, SpectralOperator, operator_matrix
from .noise import NoiseEnsemble, TimeGrid

__all__ = [
    "IntegrandSpec",
    "PathEnsemble",
    "ito_integrate",
    "integrand_products",
    "sup_norm",
    "lr_path_norm",
    "probe_predictability",
    "export_paths_csv",
]

CONSTANT = "constant"
TIME_VARYING = "time_varying"
ADAPTED = "adapted"


@dataclass(frozen=True)
class IntegrandSpec:
    """Rule producing the operator value Phi_{t_i} for every (path, node).

    Three kinds are supported: a single constant operator, a deterministic
    operator per time node, and an adapted callback ``cb(i, increments)``
    that receives the step index and the full read-only increment array of
    shape (paths, N, dim_U) and returns matrices of shape (dim_H, dim_U) or
    (paths, dim_H, dim_U).  The callback may only read increments with step
    index < i; ``probe_predictability`` enforces this by perturbing the
    increments at steps >= i and requiring exact invariance.
    """

    domain: HilbertSpec
    codomain: HilbertSpec
    kind: str
    constant: Operator | None = None
    node_matrices: np.ndarray | None = None
    callback: Callable[[int, np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in (CONSTANT, TIME_VARYING, ADAPTED):
            raise StochConvError(f"unknown integrand kind {self.kind!r}")
        if self.kind == TIME_VARYING:
            mats = np.array(self.node_matrices, dtype=np.float64)
            mats.setflags(write=False)
            object.__setattr__(self, "node_matrices", mats)
            if mats.ndim != 3 or mats.shape[1:] != (self.codomain.dim, self.domain.dim):
                raise DimensionMismatchError(
                    "node matrices must be (n_nodes, dim_H, dim_U)",
                    expected=("n", self.codomain.dim, self.domain.dim),
                    got=mats.shape,
                )

    @classmethod
    def from_constant(cls, op: Operator) -> "IntegrandSpec":
        return cls(op.domain, op.codomain, CONSTANT, constant=op)

    @classmethod
    def from_operators(cls, ops: Sequence[Operator]) -> "IntegrandSpec":
        mats = np.stack([operator_matrix(op) for op in ops])
        return cls(ops[0].domain, ops[0].codomain, TIME_VARYING, node_matrices=mats)

    @classmethod
    def from_matrices(
        cls, domain: HilbertSpec, codomain: HilbertSpec, mats
    ) -> "IntegrandSpec":
        return cls(domain, codomain, TIME_VARYING, node_matrices=np.asarray(mats, float))

    @classmethod
    def from_callback(
        cls, domain: HilbertSpec, codomain: HilbertSpec, cb
    ) -> "IntegrandSpec":
        return cls(domain, codomain, ADAPTED, callback=cb)

    def scaled(self, factor: float) -> "IntegrandSpec":
        """The integrand pointwise multiplied by a scalar."""
        if self.kind == CONSTANT:
            return IntegrandSpec.from_constant(_scaled_operator(self.constant, factor))
        if self.kind == TIME_VARYING:
            return IntegrandSpec.from_matrices(
                self.domain, self.codomain, factor * self.node_matrices
            )
        cb = self.callback
        return IntegrandSpec.from_callback(
            self.domain, self.codomain, lambda i, past: factor * np.asarray(cb(i, past))
        )


def _scaled_operator(op: Operator, factor: float) -> Operator:
    from .hilbert import DenseOperator

    if isinstance(op, SpectralOperator):
        return SpectralOperator(op.domain, op.codomain, factor * op.eigenvalues)
    return DenseOperator(op.domain, op.codomain, factor * op.entries)


@dataclass(frozen=True)
class PathEnsemble:
    """H-valued process values at grid nodes, shape (paths, N + 1, dim_H)."""

    values: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 3 or vals.shape[1] != self.grid.n_steps + 1:
            raise DimensionMismatchError(
                "values must be (paths, n_nodes, dim)",
                expected=("paths", self.grid.n_steps + 1, "dim"),
                got=vals.shape,
            )
        if not np.all(np.isfinite(vals)):
            raise StochConvError("path ensemble contains non-finite entries")

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[2]


def _check_compatible(phi: IntegrandSpec, noise: NoiseEnsemble):
    if phi.domain.dim != noise.spec.space.dim:
        raise DimensionMismatchError(
            "integrand domain must match the noise space",
            expected=noise.spec.space.dim,
            got=phi.domain.dim,
        )


def integrand_products(phi: IntegrandSpec, noise: NoiseEnsemble) -> np.ndarray:
    """Per-step products Phi_{t_i} dW_i, shape (paths, N, dim_H)."""
    _check_compatible(phi, noise)
    inc = noise.increments
    n_paths, n_steps, _ = inc.shape
    if phi.kind == CONSTANT:
        if isinstance(phi.constant, SpectralOperator):
            return inc * phi.constant.eigenvalues
        return inc @ phi.constant.entries.T
    if phi.kind == TIME_VARYING:
        if phi.node_matrices.shape[0] < n_steps:
            raise DimensionMismatchError(
                "need one operator per step",
                expected=n_steps,
                got=phi.node_matrices.shape[0],
            )
        return np.einsum("ihu,piu->pih", phi.node_matrices[:n_steps], inc)
    out = np.empty((n_paths, n_steps, phi.codomain.dim))
    for i in range(n_steps):
        mats = np.asarray(phi.callback(i, inc), dtype=np.float64)
        if mats.ndim == 2:
            out[:, i, :] = inc[:, i, :] @ mats.T
        else:
            out[:, i, :] = np.einsum("phu,pu->ph", mats, inc[:, i, :])
    return out


def ito_integrate(
    phi: IntegrandSpec, noise: NoiseEnsemble, probe: bool = False
) -> PathEnsemble:
    """Integrate a predictable step process against the sampled increments.

    Args:
      phi: integrand description; its domain must match the noise space.
      noise: sampled Q-Wiener increments.
      probe: when True, adapted callbacks are first checked for
        predictability by future-perturbation.

    Returns:
      ``PathEnsemble`` with I(t_0) = 0 and
      I(t_k) = sum_{i<k} Phi_{t_i} dW_i for every path.

    Raises:
      DimensionMismatchError: integrand/noise dimension mismatch.
      PredictabilityError: probe mode caught a callback reading the future.
    """
    if probe:
        probe_predictability(phi, noise)
    products = integrand_products(phi, noise)
    n_paths, n_steps, dim_h = products.shape
    values = np.zeros((n_paths, n_steps + 1, dim_h))
    np.cumsum(products, axis=1, out=values[:, 1:, :])
    return PathEnsemble(values, noise.grid)


def probe_predictability(
    phi: IntegrandSpec,
    noise: NoiseEnsemble,
    check_steps: Sequence[int] | None = None,
    probe_seed: int = 0x5EED,
) -> None:
    """Verify integrand values at node i ignore increments at steps >= i.

    Re-evaluates the integrand against a noise copy whose future increments
    are replaced by a differently-seeded stream and requires exact equality.

    Raises:
      PredictabilityError: if any probed node value changes.
    """
    from .noise import sample_increments

    if phi.kind != ADAPTED:
        return
    n_steps = noise.grid.n_steps
    if check_steps is None:
        check_steps = sorted({1, n_steps // 2, n_steps - 1} & set(range(n_steps)))
    alt = sample_increments(
        noise.spec, noise.grid, probe_seed ^ noise.master_seed, noise.n_paths
    )
    for i in check_steps:
        perturbed = noise.increments.copy()
        perturbed[:, i:, :] = alt.increments[:, i:, :]
        perturbed.setflags(write=False)
        baseline = np.asarray(phi.callback(i, noise.increments))
        probed = np.asarray(phi.callback(i, perturbed))
        if not np.array_equal(baseline, probed):
            raise PredictabilityError(
                f"integrand value at step {i} depends on increments at steps >= {i}"
            )


def sup_norm(ensemble: PathEnsemble, path: int) -> float:
    """Maximum Euclidean node magnitude along one path."""
    if not 0 <= path < ensemble.n_paths:
        raise StochConvError(f"path index {path} out of range [0, {ensemble.n_paths})")
    mags = np.sqrt(np.sum(ensemble.values[path] ** 2, axis=-1))
    return float(np.max(mags))


def path_sup_norms(ensemble: PathEnsemble) -> np.ndarray:
    """Per-path sup norms, shape (paths,)."""
    mags = np.sqrt(np.sum(ensemble.values**2, axis=-1))
    return np.max(mags, axis=1)


def lr_path_norm(ensemble: PathEnsemble, r: float):
    """Monte Carlo estimate of (E[sup-norm^r])^(1/r) with a delta-method SE.

    Raises:
      StochConvError: if r < 1.
    """
    from .norms import NormReport

    if r < 1.0:
        raise StochConvError(f"exponent must satisfy r >= 1, got {r}")
    sups = path_sup_norms(ensemble) ** r
    n = sups.size
    moment = float(np.mean(sups))
    estimate = moment ** (1.0 / r)
    if moment == 0.0 or n < 2:
        se = 0.0
    else:
        se_moment = float(np.std(sups, ddof=1) / np.sqrt(n))
        se = se_moment * estimate / (r * moment)
    return NormReport(estimate=estimate, standard_error=se, p=r, q=r, r=r, n_paths=n)


def export_paths_csv(ensemble: PathEnsemble, file) -> None:
    """Write paths as CSV rows ``path_id, t, coord_0, ..., coord_{d-1}``."""
    own = isinstance(file, (str, bytes))
    fh = open(file, "w", newline="") if own else file
    try:
        dim = ensemble.dim
        header = "path_id,t," + ",".join(f"coord_{d}" for d in range(dim))
        fh.write(header + "\n")
        nodes = ensemble.grid.nodes
        for p in range(ensemble.n_paths):
            for k, t in enumerate(nodes):
                coords = ",".join(repr(float(v)) for v in ensemble.values[p, k])
                fh.write(f"{p},{float(t)!r},{coords}\n")
    finally:
        if own:
            fh.close()
