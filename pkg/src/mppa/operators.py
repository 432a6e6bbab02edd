"""Euclidean points and maximal monotone operators with closed-form resolvents.

Every operator here answers resolvent queries J_c = (I + cT)^(-1) exactly
(up to floating point), with no inner iterative solver, and carries a known
zero of T so traces can be measured against the solution set.
"""

from __future__ import annotations

import math

import numpy as np

IDENTITY_TOL = 1e-8
SLACK = 1e-9

_WITNESS_CS = (0.1, 1.0, 10.0)


def as_point(coords) -> np.ndarray:
    """Validate and convert to a 1-d float64 vector of length >= 1."""
    pt = np.asarray(coords, dtype=float)
    if pt.ndim == 0:
        pt = pt.reshape(1)
    if pt.ndim != 1 or pt.size < 1:
        raise ValueError("a point is a nonempty 1-d coordinate vector")
    if not np.all(np.isfinite(pt)):
        raise ValueError("point has non-finite coordinates")
    return pt


def inner(x, y) -> float:
    x = as_point(x)
    y = as_point(y)
    if x.size != y.size:
        raise ValueError(f"dimension mismatch: {x.size} vs {y.size}")
    return float(np.dot(x, y))


def norm(x) -> float:
    x = as_point(x)
    return float(np.linalg.norm(x))


class ResolventOperator:
    """Base class: a maximal monotone operator presented through resolvents.

    Subclasses implement _resolve(c, x) for c > 0 and come with a
    zero_set_witness, a known point s with 0 in T(s).
    """

    kind = "abstract"

    def __init__(self, dim: int, zero_set_witness):
        self.dim = dim
        self.zero_set_witness = as_point(zero_set_witness)
        if self.zero_set_witness.size != dim:
            raise ValueError("zero set witness has wrong dimension")
        for c in _WITNESS_CS:
            res = norm(self._resolve(c, self.zero_set_witness) - self.zero_set_witness)
            if res > SLACK:
                raise ValueError(
                    f"declared zero is not fixed by the resolvent at c={c} "
                    f"(residual {res:.3e})")

    def resolvent(self, c: float, x) -> np.ndarray:
        if not (c > 0):
            raise ValueError("resolvent parameter must be positive")
        x = as_point(x)
        if x.size != self.dim:
            raise ValueError(f"dimension mismatch: operator is {self.dim}-dimensional")
        return self._resolve(float(c), x)

    def _resolve(self, c: float, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> str:
        return self.kind


class QuadraticProx(ResolventOperator):
    """Gradient of the squared distance to a center, scaled by a weight.

    T(x) = w*(x - m), so J_c(x) = (x + c*w*m) / (1 + c*w).
    """

    kind = "quadratic_prox"

    def __init__(self, center, weight: float = 1.0, zero_set_witness=None):
        if not (weight > 0):
            raise ValueError("weight must be positive")
        self.center = as_point(center)
        self.weight = float(weight)
        if zero_set_witness is None:
            zero_set_witness = self.center
        super().__init__(self.center.size, zero_set_witness)

    def _resolve(self, c, x):
        cw = c * self.weight
        return (x + cw * self.center) / (1.0 + cw)

    def describe(self):
        return f"{self.kind}(center={self.center.tolist()}, weight={self.weight})"


class BallProjection(ResolventOperator):
    """Normal cone of a closed ball; every resolvent is the metric projection."""

    kind = "ball_projection"

    def __init__(self, center, radius: float, zero_set_witness=None):
        if not (radius > 0):
            raise ValueError("radius must be positive")
        self.center = as_point(center)
        self.radius = float(radius)
        if zero_set_witness is None:
            zero_set_witness = self.center
        super().__init__(self.center.size, zero_set_witness)

    def _resolve(self, c, x):
        d = x - self.center
        dist = float(np.linalg.norm(d))
        if dist <= self.radius:
            return x.copy()
        return self.center + d * (self.radius / dist)

    def describe(self):
        return f"{self.kind}(center={self.center.tolist()}, radius={self.radius})"


class BoxProjection(ResolventOperator):
    """Normal cone of a coordinate box; resolvents clip componentwise."""

    kind = "box_projection"

    def __init__(self, lo, hi, zero_set_witness=None):
        self.lo = as_point(lo)
        self.hi = as_point(hi)
        if self.lo.size != self.hi.size:
            raise ValueError("box corners must have equal dimension")
        if np.any(self.lo > self.hi):
            raise ValueError("box is empty")
        if zero_set_witness is None:
            zero_set_witness = (self.lo + self.hi) / 2.0
        super().__init__(self.lo.size, zero_set_witness)

    def _resolve(self, c, x):
        return np.clip(x, self.lo, self.hi)

    def describe(self):
        return f"{self.kind}(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


class LinearPSD(ResolventOperator):
    """Linear operator x -> A x with A symmetric positive semidefinite.

    J_c solves (I + cA) y = x; the system matrix is positive definite for
    every c > 0, so the solve cannot be singular.
    """

    kind = "linear_psd"

    def __init__(self, matrix, zero_set_witness=None):
        mat = np.asarray(matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
            raise ValueError("matrix must be square")
        if not np.all(np.isfinite(mat)):
            raise ValueError("matrix has non-finite entries")
        if not np.allclose(mat, mat.T, atol=1e-9):
            raise ValueError("matrix must be symmetric")
        eigs = np.linalg.eigvalsh(mat)
        if eigs.min() < -1e-9:
            raise ValueError("matrix must be positive semidefinite")
        self.matrix = mat
        if zero_set_witness is None:
            zero_set_witness = np.zeros(mat.shape[0])
        else:
            image = mat @ as_point(zero_set_witness)
            if float(np.linalg.norm(image)) > SLACK:
                raise ValueError("declared zero is not in the kernel")
        super().__init__(mat.shape[0], zero_set_witness)

    def _resolve(self, c, x):
        system = np.eye(self.dim) + c * self.matrix
        return np.linalg.solve(system, x)

    def describe(self):
        return f"{self.kind}(dim={self.dim})"


class Rotation2D(ResolventOperator):
    """Quarter-turn rotation T(x1, x2) = (-x2, x1): monotone with <Tx, x> = 0.

    The zero set is the origin alone, which makes it a useful stress case:
    no resolvent is a projection and the iterates spiral rather than slide.
    """

    kind = "rotation2d"

    def __init__(self):
        super().__init__(2, np.zeros(2))

    def _resolve(self, c, x):
        det = 1.0 + c * c
        return np.array([(x[0] + c * x[1]) / det, (x[1] - c * x[0]) / det])


def check_resolvent_identity(op: ResolventOperator, a: float, b: float, x) -> float:
    """Residual of J_a(x) = J_b((b/a) x + (1 - b/a) J_a(x)); zero for any
    maximal monotone operator, up to floating point."""
    if not (a > 0 and b > 0):
        raise ValueError("resolvent parameters must be positive")
    x = as_point(x)
    ja = op.resolvent(a, x)
    ratio = b / a
    rhs = op.resolvent(b, ratio * x + (1.0 - ratio) * ja)
    return float(np.linalg.norm(ja - rhs))


def check_resolvent_scaling(op: ResolventOperator, a: float, b: float, x) -> bool:
    """For 0 < a <= b, displacement at the small parameter is controlled by
    twice the displacement at the large one."""
    if not (0 < a <= b):
        raise ValueError("requires 0 < a <= b")
    x = as_point(x)
    lhs = float(np.linalg.norm(op.resolvent(a, x) - x))
    rhs = float(np.linalg.norm(op.resolvent(b, x) - x))
    return lhs <= 2.0 * rhs + IDENTITY_TOL
