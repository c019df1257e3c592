"""Commutation of parameter averaging with Euler-Ito integration.

For a finite weighted family of integrands the two pipelines

* mix first:  integrate the weighted sum of the integrands,
* mix last:   integrate each member, then form the weighted sum,

agree up to floating-point reassociation of a finite double sum.  Both sides
share the identical scaled per-step products w_j * (g_j(t_i) dW_i) and differ
only in the reduction order (atoms inner vs. atoms outer), so a single-atom
family commutes bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .convolution import DiscrepancyReport, compare
from .errors import DimensionMismatchError, StochConvError
from .ito import IntegrandSpec, PathEnsemble, integrand_products
from .noise import NoiseEnsemble

__all__ = [
    "FubiniFamily",
    "integrate_then_ito",
    "ito_then_integrate",
    "fubini_report",
]


@dataclass(frozen=True)
class FubiniFamily:
    """Finitely many parameter atoms, weights and per-atom integrands."""

    atoms: tuple
    weights: np.ndarray
    integrands: tuple

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "integrands", tuple(self.integrands))
        if w.shape != (len(self.atoms),) or len(self.integrands) != len(self.atoms):
            raise DimensionMismatchError(
                "atoms, weights and integrands must align",
                expected=len(self.atoms),
                got=(w.shape, len(self.integrands)),
            )
        if w.size == 0:
            raise StochConvError("family needs at least one atom")
        if np.any(w < 0.0) or not np.all(np.isfinite(w)):
            raise StochConvError("weights must be finite and nonnegative")
        dims = {(g.domain.dim, g.codomain.dim) for g in self.integrands}
        if len(dims) != 1:
            raise DimensionMismatchError(
                "all family integrands must share dimensions", got=dims
            )

    @classmethod
    def from_factory(
        cls,
        atoms: Sequence,
        weights: Sequence[float],
        factory: Callable[[object], IntegrandSpec],
    ) -> "FubiniFamily":
        return cls(tuple(atoms), np.asarray(weights, float), tuple(factory(y) for y in atoms))

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)


def _scaled_products(family: FubiniFamily, noise: NoiseEnsemble, j: int) -> np.ndarray:
    products = integrand_products(family.integrands[j], noise)
    products *= family.weights[j]
    return products


def integrate_then_ito(family: FubiniFamily, noise: NoiseEnsemble) -> PathEnsemble:
    """Average the family first, then integrate (atoms reduced inside steps).

    Returns the Euler-Ito integral of sum_j w_j g(y_j) on the given noise.
    """
    mixed = _scaled_products(family, noise, 0)
    for j in range(1, family.n_atoms):
        mixed += _scaled_products(family, noise, j)
    n_paths, n_steps, dim_h = mixed.shape
    values = np.zeros((n_paths, n_steps + 1, dim_h))
    np.cumsum(mixed, axis=1, out=values[:, 1:, :])
    return PathEnsemble(values, noise.grid)


def ito_then_integrate(family: FubiniFamily, noise: NoiseEnsemble) -> PathEnsemble:
    """Integrate each member first, then average (atoms reduced last).

    Returns sum_j w_j I(g(y_j)) computed on the same noise, with the scaled
    per-step products shared bit-for-bit with ``integrate_then_ito``.
    """
    first = np.cumsum(_scaled_products(family, noise, 0), axis=1)
    total = np.zeros((first.shape[0], noise.grid.n_steps + 1, first.shape[2]))
    total[:, 1:, :] = first
    for j in range(1, family.n_atoms):
        total[:, 1:, :] += np.cumsum(_scaled_products(family, noise, j), axis=1)
    return PathEnsemble(total, noise.grid)


def fubini_report(family: FubiniFamily, noise: NoiseEnsemble) -> DiscrepancyReport:
    """Discrepancy between the two reduction orders on common noise.

    The headline number is the ``sup_abs`` field: the maximum over paths and
    nodes of the absolute difference.
    """
    lhs = integrate_then_ito(family, noise)
    rhs = ito_then_integrate(family, noise)
    return compare(
        lhs,
        rhs,
        meta={"seed": noise.master_seed, "n_atoms": family.n_atoms},
    )
