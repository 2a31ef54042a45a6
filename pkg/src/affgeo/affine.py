"""Finite-dimensional affine spaces, charts, affine and bi-affine maps.

A space is described by a dimension and a set of named charts; every
non-reference chart carries an invertible affine transition to the
reference chart.  The model vector space is implicitly ``R^n`` per
chart, and tangent vectors transform by the linear part of transitions
only.  Keeping the charts explicit makes frame-independence an
executable statement: compute in two charts, compare.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "AffineGeometryError", "AffineSpaceSpec", "AffinePoint", "TangentVec",
    "AffineMap", "BiAffineMap", "BiAffineParts", "difference",
    "cocycle_check", "linear_part", "biaffine_parts",
]

# Construction-time identities use this tolerance; anything downstream
# of an ODE or a finite difference uses 1e-6 instead.
CONSTRUCTION_TOL = 1e-12

_MAX_CONDITION = 1e12


class AffineGeometryError(ValueError):
    """Raised for geometric data that does not make sense."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class _Transition:
    """Affine map x -> A x + b into the reference chart."""

    matrix: np.ndarray
    offset: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x + self.offset

    def apply_vector(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def invert(self, y: np.ndarray) -> np.ndarray:
        return np.linalg.solve(self.matrix, y - self.offset)

    def invert_vector(self, w: np.ndarray) -> np.ndarray:
        return np.linalg.solve(self.matrix, w)


class AffineSpaceSpec:
    """Affine space of dimension ``n`` with named charts.

    ``charts`` maps a chart name to ``(matrix, offset)``: the affine
    transition sending that chart's coordinates to the reference
    chart.  The reference chart gets the identity transition.
    """

    def __init__(self, dim: int, reference: str = "ref",
                 charts: dict[str, tuple] | None = None):
        if dim < 1:
            raise AffineGeometryError("dimension must be positive")
        self.dim = dim
        self.reference = reference
        self._transitions: dict[str, _Transition] = {
            reference: _Transition(_frozen(np.eye(dim)), _frozen(np.zeros(dim)))
        }
        for name, (matrix, offset) in (charts or {}).items():
            self.add_chart(name, matrix, offset)

    def add_chart(self, name: str, matrix, offset) -> None:
        if name in self._transitions:
            raise AffineGeometryError(f"chart {name!r} already defined")
        m = _frozen(matrix)
        b = _frozen(offset)
        if m.shape != (self.dim, self.dim) or b.shape != (self.dim,):
            raise AffineGeometryError(f"chart {name!r}: wrong transition shape")
        if np.linalg.cond(m) > _MAX_CONDITION:
            raise AffineGeometryError(f"chart {name!r}: transition is singular")
        round_trip = m @ np.linalg.inv(m)
        if np.max(np.abs(round_trip - np.eye(self.dim))) > CONSTRUCTION_TOL:
            raise AffineGeometryError(f"chart {name!r}: inverse check failed")
        self._transitions[name] = _Transition(m, b)

    @property
    def charts(self) -> tuple[str, ...]:
        return tuple(self._transitions)

    def _transition(self, chart: str) -> _Transition:
        try:
            return self._transitions[chart]
        except KeyError:
            raise AffineGeometryError(f"unknown chart {chart!r}") from None

    def point(self, coords, chart: str | None = None) -> "AffinePoint":
        chart = chart or self.reference
        self._transition(chart)
        return AffinePoint(self, chart, _frozen(coords))

    def vector(self, components, chart: str | None = None) -> "TangentVec":
        chart = chart or self.reference
        self._transition(chart)
        return TangentVec(self, chart, _frozen(components))

    def to_reference(self, p: "AffinePoint") -> np.ndarray:
        return self._transition(p.chart).apply(p.coords)

    def vector_to_reference(self, v: "TangentVec") -> np.ndarray:
        return self._transition(v.chart).apply_vector(v.components)

    def convert_point(self, p: "AffinePoint", chart: str) -> "AffinePoint":
        ref = self.to_reference(p)
        return AffinePoint(self, chart, _frozen(self._transition(chart).invert(ref)))

    def convert_vector(self, v: "TangentVec", chart: str) -> "TangentVec":
        ref = self.vector_to_reference(v)
        return TangentVec(self, chart,
                          _frozen(self._transition(chart).invert_vector(ref)))


@dataclass(frozen=True)
class AffinePoint:
    space: AffineSpaceSpec
    chart: str
    coords: np.ndarray

    def in_reference(self) -> np.ndarray:
        return self.space.to_reference(self)


@dataclass(frozen=True)
class TangentVec:
    space: AffineSpaceSpec
    chart: str
    components: np.ndarray

    def in_reference(self) -> np.ndarray:
        return self.space.vector_to_reference(self)


def difference(p: AffinePoint, q: AffinePoint) -> TangentVec:
    """The model vector ``p - q``, in reference-chart components."""
    if p.space is not q.space:
        raise AffineGeometryError("points belong to different spaces")
    d = p.in_reference() - q.in_reference()
    return TangentVec(p.space, p.space.reference, _frozen(d))


def cocycle_check(a1: AffinePoint, a2: AffinePoint, a3: AffinePoint) -> float:
    """Residual of (a3-a2) + (a2-a1) + (a1-a3); zero for a true affine space."""
    total = (difference(a3, a2).components
             + difference(a2, a1).components
             + difference(a1, a3).components)
    return float(np.max(np.abs(total)))


class AffineMap:
    """x -> L x + b between reference charts of two specs."""

    def __init__(self, domain: AffineSpaceSpec, codomain: AffineSpaceSpec,
                 matrix, offset):
        self.domain = domain
        self.codomain = codomain
        self.matrix = _frozen(matrix)
        self.offset = _frozen(offset)
        if self.matrix.shape != (codomain.dim, domain.dim):
            raise AffineGeometryError("linear part has wrong shape")
        if self.offset.shape != (codomain.dim,):
            raise AffineGeometryError("offset has wrong shape")

    def apply(self, p: AffinePoint) -> AffinePoint:
        if p.space is not self.domain:
            raise AffineGeometryError("point is not in the domain space")
        y = self.matrix @ p.in_reference() + self.offset
        return self.codomain.point(y)

    def apply_vector(self, v: TangentVec) -> TangentVec:
        return self.codomain.vector(self.matrix @ v.in_reference())

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """self after inner."""
        if inner.codomain is not self.domain:
            raise AffineGeometryError("maps are not composable")
        return AffineMap(inner.domain, self.codomain,
                         self.matrix @ inner.matrix,
                         self.matrix @ inner.offset + self.offset)


def linear_part(phi: AffineMap) -> np.ndarray:
    return phi.matrix


class BiAffineMap:
    """Phi(x, y) = C(x (x) y) + D x + E y + F, affine in each slot.

    Stored by tensor coefficients so the partial linear parts are exact
    slice extractions, no numerical differentiation involved.
    """

    def __init__(self, C, D, E, F):
        self.C = _frozen(C)
        self.D = _frozen(D)
        self.E = _frozen(E)
        self.F = _frozen(F)
        k, n1, n2 = self.C.shape
        if self.D.shape != (k, n1) or self.E.shape != (k, n2) \
                or self.F.shape != (k,):
            raise AffineGeometryError("inconsistent coefficient shapes")
        self.out_dim, self.dim1, self.dim2 = k, n1, n2

    def apply(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (np.einsum("kij,i,j->k", self.C, x, y)
                + self.D @ x + self.E @ y + self.F)

    def part_first(self, u, y) -> np.ndarray:
        """Linear part in the first slot: Phi(x+u, y) - Phi(x, y)."""
        u = np.asarray(u, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.einsum("kij,i,j->k", self.C, u, y) + self.D @ u

    def part_second(self, x, w) -> np.ndarray:
        """Linear part in the second slot: Phi(x, y+w) - Phi(x, y)."""
        x = np.asarray(x, dtype=float)
        w = np.asarray(w, dtype=float)
        return np.einsum("kij,i,j->k", self.C, x, w) + self.E @ w

    def bilinear_part(self, u, w) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        w = np.asarray(w, dtype=float)
        return np.einsum("kij,i,j->k", self.C, u, w)


class BiAffineParts(NamedTuple):
    first: object     # (u, y) -> linear in u
    second: object    # (x, w) -> linear in w
    bilinear: object  # (u, w) -> bilinear


def biaffine_parts(phi: BiAffineMap) -> BiAffineParts:
    return BiAffineParts(phi.part_first, phi.part_second, phi.bilinear_part)
