"""
Closed polygons in Minkowski 3-space R^{2,1}.

A polygon of type (k1, k2) has its first k1 sides on future pseudospheres
and the remaining k2 on past ones, side i of Minkowski norm alpha_i. The
module validates such polygons, normalises them under SU(1,1), evaluates
the Kostant-Kirillov form, bends about the first diagonal and builds
sequences that leave every compact set.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from . import algebra
from .algebra import CausalClass, Su11Isometry
from .errors import (
    CompactCase,
    DegenerateDiagonal,
    NonGeneric,
    NotNormalized,
    NotTangent,
    NotTimelike,
)

logger = logging.getLogger(__name__)

VALIDATION_TOL = 1e-9
AXIS_TOL = 1e-14
WITNESS_LIMIT = 1e3


@dataclass(eq=False)
class MinkPolygon:
    sides: np.ndarray
    k1: int
    alpha: np.ndarray
    order: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        self.sides = np.array(self.sides, dtype=float).reshape(-1, 3)
        self.alpha = np.array(self.alpha, dtype=float).reshape(-1)
        if self.alpha.size != len(self.sides):
            raise ValueError(f"{len(self.sides)} sides but {self.alpha.size} radii")
        if not 0 <= self.k1 <= self.n:
            raise ValueError(f"k1 = {self.k1} out of range for n = {self.n}")

    @property
    def n(self) -> int:
        return len(self.sides)

    @property
    def k2(self) -> int:
        return self.n - self.k1

    def copy(self, sides: Optional[np.ndarray] = None) -> "MinkPolygon":
        return MinkPolygon(self.sides.copy() if sides is None else sides, self.k1, self.alpha.copy(), self.order)


@dataclass
class BendingState:
    """A polygon bent by ``angle`` about the axis of u_1 + u_2."""

    polygon: MinkPolygon
    angle: float = 0.0

    def advanced(self, theta: float) -> "BendingState":
        return BendingState(bend(self.polygon, theta), self.angle + theta)


@dataclass
class ValidationReport:
    closure_residual: float
    norm_errors: np.ndarray
    causal_ok: bool
    generic: bool
    closed: bool
    norms_ok: bool
    violations: List[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.closed and self.norms_ok and self.causal_ok


def validate(poly: MinkPolygon, tol: float = VALIDATION_TOL, margin: float = 1e-8) -> ValidationReport:
    """Closure, side norms and sheets, with tolerances scaled by the coordinates involved."""
    u = poly.sides
    total = u.sum(axis=0)
    closure = float(np.abs(total).max())
    closed = closure <= tol * (1.0 + float(np.abs(u).max(initial=0.0)))

    square = algebra.mink_inner(u, u)
    euclid = np.sum(u ** 2, axis=1)
    norms_ok = bool(np.all(np.abs(square - poly.alpha ** 2) <= tol * (1.0 + euclid)))
    norm_errors = np.abs(algebra.mink_norm(u) - poly.alpha)

    violations = []
    for i, side in enumerate(u):
        expected = CausalClass.FUTURE if i < poly.k1 else CausalClass.PAST
        found = algebra.causal_class(side)
        if found is not expected:
            violations.append(f"side {i + 1} is {found.value}, expected {expected.value}")
    gap = abs(poly.alpha[:poly.k1].sum() - poly.alpha[poly.k1:].sum())
    return ValidationReport(closure, norm_errors, not violations, gap > margin, closed, norms_ok, violations)


def act_polygon(poly: MinkPolygon, g: Su11Isometry) -> MinkPolygon:
    return poly.copy(g.apply(poly.sides))


def random_isometry(rng: np.random.Generator, rapidity: float = 1.0) -> Su11Isometry:
    return (
        algebra.rotation(rng.uniform(0, 2 * np.pi))
        @ algebra.boost(rng.uniform(-rapidity, rapidity))
        @ algebra.rotation(rng.uniform(0, 2 * np.pi))
    )


def _spatial_angle(v: np.ndarray) -> Optional[float]:
    if np.hypot(v[0], v[1]) <= AXIS_TOL * (1.0 + abs(v[2])):
        return None
    return float(np.arctan2(v[1], v[0]))


def normalize_su11(poly: MinkPolygon) -> Tuple[MinkPolygon, Su11Isometry]:
    """Put u_1 + ... + u_k1 on the positive t-axis, then u_1's spatial part on the +x axis."""
    d = poly.sides[:poly.k1].sum(axis=0)
    if algebra.causal_class(d) is not CausalClass.FUTURE:
        raise DegenerateDiagonal(f"first block sums to a {algebra.causal_class(d).value} vector")

    g = Su11Isometry.identity()
    angle = _spatial_angle(d)
    if angle is not None:
        g = algebra.rotation(np.pi / 2 - angle)
        rho = np.hypot(d[0], d[1])
        g = algebra.boost(-np.arctanh(rho / d[2])) @ g

    sides = g.apply(poly.sides)
    for side in sides:
        angle = _spatial_angle(side)
        if angle is not None:
            g = algebra.rotation(-angle) @ g
            break
    return poly.copy(g.apply(poly.sides)), g


def kk_form(u, v, w, radius: float, tol: float = 1e-9) -> float:
    """omega_u(v, w) = u . (v x w) / R^2 on the pseudosphere of radius R."""
    u, v, w = (np.asarray(x, dtype=float) for x in (u, v, w))
    if abs(algebra.mink_inner(u, u) - radius ** 2) > tol * (1.0 + u @ u):
        raise NotTangent(f"u is not on the pseudosphere of radius {radius}")
    for name, x in (("v", v), ("w", w)):
        if abs(algebra.mink_inner(u, x)) > tol * (1.0 + np.linalg.norm(u) * np.linalg.norm(x)):
            raise NotTangent(f"{name} is not tangent at u")
    return float(algebra.mink_inner(u, algebra.mink_cross(v, w))) / radius ** 2


def diagonal_length(poly: MinkPolygon, j: int) -> float:
    if j == poly.n:
        return 0.0
    d = poly.sides[:j].sum(axis=0)
    if algebra.causal_class(d) not in (CausalClass.FUTURE, CausalClass.PAST):
        raise NotTimelike(f"u_1 + ... + u_{j} is {algebra.causal_class(d).value}")
    return float(algebra.mink_norm(d))


def bend(poly: MinkPolygon, theta: float, tol: float = 1e-9) -> MinkPolygon:
    """Rotate u_1, u_2 about the t-axis, which must carry u_1 + u_2."""
    d = poly.sides[0] + poly.sides[1]
    if np.hypot(d[0], d[1]) > tol * (1.0 + abs(d[2])):
        raise NotNormalized("u_1 + u_2 is off the t-axis")
    sides = poly.sides.copy()
    sides[:2] = algebra.rotation(theta).apply(sides[:2])
    return poly.copy(sides)


def bend_sweep(poly: MinkPolygon, steps: int) -> List[Tuple[float, float, float, float]]:
    """Rows (theta, ell, closure_inf_norm, max_norm_error) over a full turn."""
    start = BendingState(poly)
    rows = []
    for k in range(steps):
        state = start.advanced(2 * np.pi * k / steps)
        report = validate(state.polygon)
        rows.append((state.angle, diagonal_length(state.polygon, 2), report.closure_residual,
                     float(report.norm_errors.max())))
    return rows


def dual_swap(poly: MinkPolygon) -> MinkPolygon:
    sides = -np.concatenate([poly.sides[poly.k1:], poly.sides[:poly.k1]])
    alpha = np.concatenate([poly.alpha[poly.k1:], poly.alpha[:poly.k1]])
    return MinkPolygon(sides, poly.k2, alpha)


def _timelike_pair(beta1: float, beta2: float, length: float, theta: float = 0.0) -> np.ndarray:
    """Future sides of norms beta1, beta2 summing to (0, 0, length)."""
    t1 = (length ** 2 + beta1 ** 2 - beta2 ** 2) / (2.0 * length)
    rho = np.sqrt(max(t1 ** 2 - beta1 ** 2, 0.0))
    first = np.array([rho * np.cos(theta), rho * np.sin(theta), t1])
    second = np.array([-first[0], -first[1], length - t1])
    return np.array([first, second])


def minkowski_quadrilateral(alpha: Sequence[float], ell: float, theta: float = 0.0) -> Optional[MinkPolygon]:
    """The (2, 2) quadrilateral with diagonal length ell bent by theta; None below the minimum."""
    alpha = np.asarray(alpha, dtype=float)
    if ell < max(alpha[0] + alpha[1], alpha[2] + alpha[3]):
        return None
    future = _timelike_pair(alpha[0], alpha[1], ell, theta)
    past = -_timelike_pair(alpha[2], alpha[3], ell)
    return MinkPolygon(np.concatenate([future, past]), 2, alpha)


def noncompact_witness(alpha: Sequence[float], k1: int, m_max: Optional[int] = None,
                       margin: float = 1e-8) -> List[MinkPolygon]:
    """Closed polygons whose first-block diagonal doubles from step to step.

    Sides 3..k1 sit on the future t-axis and k1+3..n on the past one; the two
    free pairs are solved in closed form for a total future time T_m = T_0 2^m.
    """
    alpha = np.asarray(alpha, dtype=float)
    n = alpha.size
    k2 = n - k1
    if k1 <= 1 or k2 <= 1:
        raise CompactCase(k1, k2)
    future_sum, past_sum = alpha[:k1].sum(), alpha[k1:].sum()
    if abs(future_sum - past_sum) <= margin:
        raise NonGeneric(abs(future_sum - past_sum))

    t0 = max(future_sum, past_sum) + 1.0
    if m_max is None:
        m_max = max(int(np.floor(np.log2(WITNESS_LIMIT / t0))) + 1, 0)
    polygons = []
    for m in range(m_max + 1):
        total = t0 * 2.0 ** m
        sides = np.zeros((n, 3))
        sides[2:k1, 2] = alpha[2:k1]
        sides[k1 + 2:, 2] = -alpha[k1 + 2:]
        sides[:2] = _timelike_pair(alpha[0], alpha[1], total - alpha[2:k1].sum())
        sides[k1:k1 + 2] = -_timelike_pair(alpha[k1], alpha[k1 + 1], total - alpha[k1 + 2:].sum())
        polygons.append(MinkPolygon(sides, k1, alpha))
    logger.debug(f"witness with {len(polygons)} polygons, last diagonal {t0 * 2.0 ** m_max:.3e}")
    return polygons


def closed_form_witness(m: int) -> np.ndarray:
    """The (2, 2) sequence for alpha = (1, 1, 2, 1) from quadratic P, Q; complex where Q^2 < 0.

    It closes for every m while u_2 and u_3 miss their norms.
    """
    root2 = np.sqrt(2.0)
    P = 0.5 * (3 + 2 * (root2 - 1) * m)
    Q = np.emath.sqrt(8 * (root2 - 1) * m ** 2 - 4 * (3 * root2 - 1) * m - 9)
    return np.array([
        [-1, 0, root2],
        [1 - P, Q, m - root2],
        [P, -Q, 1 - m],
        [0, 0, -1],
    ], dtype=complex)


def closed_form_witness_errors(m: int) -> Tuple[float, np.ndarray]:
    """Closure residual and |u_i . u_i - alpha_i^2| of the closed-form sequence."""
    sides = closed_form_witness(m)
    alpha = np.array([1.0, 1.0, 2.0, 1.0])
    square = -sides[:, 0] ** 2 - sides[:, 1] ** 2 + sides[:, 2] ** 2
    return float(np.abs(sides.sum(axis=0)).max()), np.abs(square - alpha ** 2)


_GENERATORS = (
    np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
    np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
    np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]]),
)


def moduli_dimension(poly: MinkPolygon, rtol: float = 1e-9) -> int:
    """2n - rank(closure differential) - rank(SU(1,1) orbit) at a closed polygon."""
    tangents = [scipy.linalg.null_space((algebra.ETA @ u)[None, :]) for u in poly.sides]
    closure = np.hstack(tangents)
    orbit = np.array([
        np.concatenate([np.linalg.lstsq(T, X @ u, rcond=None)[0] for T, u in zip(tangents, poly.sides)])
        for X in _GENERATORS
    ]).T

    def rank(m: np.ndarray) -> int:
        s = np.linalg.svd(m, compute_uv=False)
        return int(np.sum(s > rtol * s.max()))

    return 2 * poly.n - rank(closure) - rank(orbit)
