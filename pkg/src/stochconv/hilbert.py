"""Finite (Galerkin-truncated) Hilbert spaces, linear operators and semigroups.

Vectors are coordinate arrays with respect to a fixed orthonormal basis of the
truncated space.  Operators come in two flavours: diagonal in the shared basis
(``SpectralOperator``) or a full matrix (``DenseOperator``).  Strongly
continuous semigroups are represented either by a nonnegative spectrum
(S(t) = coordinatewise exp(-rate*t)) or by a dense generator matrix
(S(t) = expm(t*A), evaluated with scipy's scaling-and-squaring Pade method).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import DimensionMismatchError, StochConvError

__all__ = [
    "HilbertSpec",
    "SpectralOperator",
    "DenseOperator",
    "SemigroupSpec",
    "apply_operator",
    "hs_norm",
    "semigroup_eval",
    "operator_matrix",
    "identity_operator",
    "operator_from_json",
    "operator_to_json",
]


def _frozen_array(values, dtype=np.float64):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HilbertSpec:
    """A truncated separable Hilbert space: the first ``dim`` basis modes."""

    dim: int
    label: str = "H"

    def __post_init__(self):
        if self.dim < 1:
            raise StochConvError(f"space dimension must be >= 1, got {self.dim}")


@dataclass(frozen=True)
class SpectralOperator:
    """Operator acting coordinatewise on the shared basis of domain/codomain."""

    domain: HilbertSpec
    codomain: HilbertSpec
    eigenvalues: np.ndarray

    def __post_init__(self):
        if self.domain.dim != self.codomain.dim:
            raise DimensionMismatchError(
                "spectral operator needs equal domain/codomain dims",
                expected=self.domain.dim,
                got=self.codomain.dim,
            )
        object.__setattr__(self, "eigenvalues", _frozen_array(self.eigenvalues))
        if self.eigenvalues.shape != (self.domain.dim,):
            raise DimensionMismatchError(
                "eigenvalue list length must match space dimension",
                expected=(self.domain.dim,),
                got=self.eigenvalues.shape,
            )


@dataclass(frozen=True)
class DenseOperator:
    """General linear map stored as a codomain.dim x domain.dim matrix."""

    domain: HilbertSpec
    codomain: HilbertSpec
    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen_array(self.entries))
        if self.entries.shape != (self.codomain.dim, self.domain.dim):
            raise DimensionMismatchError(
                "operator matrix shape must be (codomain.dim, domain.dim)",
                expected=(self.codomain.dim, self.domain.dim),
                got=self.entries.shape,
            )


Operator = SpectralOperator | DenseOperator


def identity_operator(space: HilbertSpec) -> SpectralOperator:
    return SpectralOperator(space, space, np.ones(space.dim))


def operator_matrix(op: Operator) -> np.ndarray:
    """Dense matrix of an operator (read-only view for dense operators)."""
    if isinstance(op, SpectralOperator):
        return np.diag(op.eigenvalues)
    return op.entries


def apply_operator(op: Operator, v: np.ndarray) -> np.ndarray:
    """Apply a linear operator to a vector or a batch of vectors.

    Args:
      op: a ``SpectralOperator`` or ``DenseOperator``.
      v: array whose last axis has length ``op.domain.dim``; leading axes are
        treated as batch dimensions.

    Returns:
      Array of the same leading shape with last axis ``op.codomain.dim``.

    Raises:
      DimensionMismatchError: if the last axis of ``v`` does not match.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != op.domain.dim:
        raise DimensionMismatchError(
            "vector length must match operator domain",
            expected=op.domain.dim,
            got=v.shape[-1],
        )
    if isinstance(op, SpectralOperator):
        return v * op.eigenvalues
    return v @ op.entries.T


def hs_norm(op: Operator, weight: SpectralOperator | None = None) -> float:
    """Hilbert-Schmidt norm of an operator, optionally weighted on the domain.

    Computes ``(sum_j |op(sqrt(q_j) u_j)|^2)^(1/2)`` over the domain basis
    ``u_j``, where ``q_j`` are the eigenvalues of ``weight`` (all ones when
    ``weight`` is None).

    Raises:
      DimensionMismatchError: weight defined on a different-dimensional space.
      StochConvError: weight has a negative eigenvalue.
    """
    if weight is not None:
        if weight.domain.dim != op.domain.dim:
            raise DimensionMismatchError(
                "weight must act on the operator domain",
                expected=op.domain.dim,
                got=weight.domain.dim,
            )
        q = weight.eigenvalues
        if np.any(q < 0.0):
            raise StochConvError("weight eigenvalues must be nonnegative")
    else:
        q = np.ones(op.domain.dim)
    if isinstance(op, SpectralOperator):
        return float(np.sqrt(np.sum(q * op.eigenvalues**2)))
    return float(np.sqrt(np.sum(q * np.sum(op.entries**2, axis=0))))


@dataclass(frozen=True)
class SemigroupSpec:
    """Strongly continuous semigroup S on a truncated space.

    ``rates`` set S(t) = coordinatewise exp(-rate_k * t) (requires
    rate_k >= 0, so the sup bound is exactly 1).  Alternatively ``generator``
    sets S(t) = expm(t * A).  ``bound`` is sup_{t in [0, horizon]} |S(t)|,
    exact for the diagonal kind and sampled on 257 nodes for the dense kind.
    """

    space: HilbertSpec
    rates: np.ndarray | None = None
    generator: np.ndarray | None = None
    horizon: float = 1.0
    bound: float = field(init=False, default=1.0)

    def __post_init__(self):
        if (self.rates is None) == (self.generator is None):
            raise StochConvError("provide exactly one of rates / generator")
        if self.horizon <= 0.0:
            raise StochConvError("horizon must be positive")
        if self.rates is not None:
            object.__setattr__(self, "rates", _frozen_array(self.rates))
            if self.rates.shape != (self.space.dim,):
                raise DimensionMismatchError(
                    "rate list length must match space dimension",
                    expected=(self.space.dim,),
                    got=self.rates.shape,
                )
            if np.any(self.rates < 0.0):
                raise StochConvError("diagonal semigroup rates must be >= 0")
            object.__setattr__(self, "bound", 1.0)
        else:
            object.__setattr__(self, "generator", _frozen_array(self.generator))
            if self.generator.shape != (self.space.dim, self.space.dim):
                raise DimensionMismatchError(
                    "generator must be a square matrix on the space",
                    expected=(self.space.dim, self.space.dim),
                    got=self.generator.shape,
                )
            ts = np.linspace(0.0, self.horizon, 257)
            norms = [np.linalg.norm(expm(t * self.generator), 2) for t in ts]
            object.__setattr__(self, "bound", float(max(norms)))

    @property
    def is_diagonal(self) -> bool:
        return self.rates is not None


def semigroup_eval(sg: SemigroupSpec, t: float) -> Operator:
    """Evaluate S(t) as an operator.

    Args:
      sg: semigroup description.
      t: time, must be >= 0.

    Returns:
      ``SpectralOperator`` for the diagonal kind, ``DenseOperator`` otherwise.

    Raises:
      StochConvError: if t < 0.
    """
    if t < 0.0:
        raise StochConvError(f"semigroup evaluated at negative time {t}")
    if sg.is_diagonal:
        return SpectralOperator(sg.space, sg.space, np.exp(-sg.rates * t))
    return DenseOperator(sg.space, sg.space, expm(t * sg.generator))


def operator_to_json(op: Operator) -> dict:
    if isinstance(op, SpectralOperator):
        return {"kind": "diagonal", "eigenvalues": op.eigenvalues.tolist()}
    return {"kind": "dense", "rows": op.entries.tolist()}


def operator_from_json(data: dict, domain: HilbertSpec, codomain: HilbertSpec) -> Operator:
    """Build an operator from its JSON form.

    Accepted forms: ``{"kind": "diagonal", "eigenvalues": [...]}`` and
    ``{"kind": "dense", "rows": [[...], ...]}``.
    """
    kind = data.get("kind")
    if kind == "diagonal":
        return SpectralOperator(domain, codomain, np.asarray(data["eigenvalues"], dtype=float))
    if kind == "dense":
        return DenseOperator(domain, codomain, np.asarray(data["rows"], dtype=float))
    raise StochConvError(f"unknown operator kind {kind!r}")
