"""
Bridges out of the hyperpolygon picture.

* hyperpolygons to strongly parabolic Higgs data on CP^1: residues
  R_i = (q_i p_i)_0 at marked points x_i, flags <q_i> and weights with
  beta_2 - beta_1 = alpha_i;
* points of Z_S to closed Minkowski polygons of type (|S|, |S^c|) and back.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from . import algebra
from .errors import (
    MarkedPointsNotDistinct,
    NotCanonical,
    NotClosed,
    NotNormalized,
    NotOnComplexLevel,
    OffPseudosphere,
    WeightOutOfRange,
)
from .hyperpolygon import HyperConfig, SubsetMask, complex_residual, epsilon
from .minkowski import MinkPolygon, validate

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class ParabolicWeights:
    beta: np.ndarray

    @property
    def differences(self) -> np.ndarray:
        return self.beta[:, 1] - self.beta[:, 0]


@dataclass(eq=False)
class HiggsData:
    points: np.ndarray
    flags: np.ndarray
    residues: np.ndarray
    alpha: np.ndarray
    weights: Optional[ParabolicWeights] = None

    @property
    def n(self) -> int:
        return self.points.size

    def field(self, z: complex) -> np.ndarray:
        """Phi(z) = sum R_i / (z - x_i) on the affine chart."""
        return np.einsum("iab,i->ab", self.residues, 1.0 / (z - self.points))

    def structure_residuals(self) -> Dict[str, float]:
        return {
            "trace": float(np.abs(np.trace(self.residues, axis1=1, axis2=2)).max()),
            "nilpotent": float(np.abs(self.residues @ self.residues).max()),
            "flag": float(np.abs(np.einsum("iab,ib->ia", self.residues, self.flags)).max()),
            "sum": float(np.abs(self.residues.sum(axis=0)).max()),
        }


@dataclass
class LineVerdict:
    destabilizing: bool
    subset: SubsetMask
    margin: float
    phi_invariant: bool


def beta_from_alpha(alpha: Sequence[float], base: Optional[Sequence[float]] = None) -> ParabolicWeights:
    alpha = np.asarray(alpha, dtype=float)
    base = np.zeros_like(alpha) if base is None else np.asarray(base, dtype=float)
    bad = np.flatnonzero((base < 0) | (base + alpha >= 1))
    if bad.size:
        i = int(bad[0])
        raise WeightOutOfRange(
            f"weights at x_{i + 1} leave [0, 1): beta_1 = {base[i]}, beta_2 = {base[i] + alpha[i]}",
            index=i + 1,
        )
    return ParabolicWeights(np.column_stack([base, base + alpha]))


def default_marked_points(n: int) -> np.ndarray:
    return np.arange(1, n + 1, dtype=complex)


def to_higgs(cfg: HyperConfig, points: Optional[Sequence[complex]] = None, tol: float = 1e-10) -> HiggsData:
    points = default_marked_points(cfg.n) if points is None else np.asarray(points, dtype=complex)
    if points.size != cfg.n:
        raise ValueError(f"{points.size} marked points for n = {cfg.n}")
    if np.unique(points).size != points.size:
        raise MarkedPointsNotDistinct("marked points must be distinct")
    drift = complex_residual(cfg)
    if drift > tol * cfg.scale() ** 2:
        raise NotOnComplexLevel(drift)

    residues = algebra.traceless_part(np.einsum("ia,ib->iab", cfg.q, cfg.p))
    weights = beta_from_alpha(cfg.alpha) if np.all(cfg.alpha < 1) else None
    return HiggsData(points, cfg.q.copy(), residues, cfg.alpha.copy(), weights)


def scale_residues(data: HiggsData, lam: complex) -> HiggsData:
    return HiggsData(data.points, data.flags, lam * data.residues, data.alpha, data.weights)


def involution_on_higgs(data: HiggsData) -> HiggsData:
    return scale_residues(data, -1.0)


def line_destabilizes(data: HiggsData, v: Sequence[complex], degree: int = 0, tol: float = 1e-9) -> LineVerdict:
    """Stability inequality for the constant line <v> of the given degree in the trivial bundle."""
    v = np.asarray(v, dtype=complex)
    vnorm = np.linalg.norm(v)
    if vnorm == 0:
        raise ValueError("v must be nonzero")
    if degree > 0:
        raise ValueError(f"constant lines in the trivial bundle have degree <= 0, got {degree}")
    flag_norms = np.linalg.norm(data.flags, axis=1)
    dets = data.flags[:, 0] * v[1] - data.flags[:, 1] * v[0]
    subset = SubsetMask.from_indices(np.flatnonzero(np.abs(dets) <= tol * flag_norms * vnorm), data.n)

    margin = -2.0 * degree - epsilon(subset, data.alpha)
    images = data.residues @ v
    scale = max(1.0, float(np.abs(data.residues).max()))
    invariant = bool(np.all(np.abs(images[:, 0] * v[1] - images[:, 1] * v[0]) <= tol * scale * vnorm ** 2))
    return LineVerdict(margin <= 0, subset, float(margin), invariant)


# --- Z_S and Minkowski polygons -------------------------------------------------------

def zs_to_minkowski(cfg: HyperConfig, subset: SubsetMask, tol: float = 1e-9) -> MinkPolygon:
    """Sides u_i from diagonal Z_S data, S moved to the first |S| slots."""
    inside = subset.as_bool()
    p, q = cfg.p, cfg.q
    off_form = np.concatenate([
        np.abs(q[inside, 1]), np.abs(p[inside, 0]), np.abs(q[~inside, 0]), np.abs(p[~inside, 1]),
    ])
    if off_form.size and off_form.max() > tol * cfg.scale():
        raise NotCanonical(f"configuration is not in the diagonal form for {subset}")

    order = subset.indices() + subset.complement().indices()
    sides = np.zeros((cfg.n, 3))
    for slot, i in enumerate(order):
        a, b = p[i]
        c, d = q[i]
        if inside[i]:
            bc = b * c
            sides[slot] = (bc.real, bc.imag, 0.5 * (abs(b) ** 2 + abs(c) ** 2))
        else:
            ad = a * d
            sides[slot] = (ad.real, -ad.imag, -0.5 * (abs(a) ** 2 + abs(d) ** 2))
    return MinkPolygon(sides, subset.size, cfg.alpha[list(order)], order)


def minkowski_to_zs(poly: MinkPolygon, tol: float = 1e-9) -> HyperConfig:
    """Inverse of zs_to_minkowski on normalised polygons; slots return to their recorded indices."""
    u = poly.sides
    report = validate(poly, tol)
    if not report.closed:
        raise NotClosed(report.closure_residual)
    if not (report.norms_ok and report.causal_ok):
        violations = list(report.violations)
        if not report.norms_ok:
            violations.insert(0, "side norms do not match alpha")
        raise OffPseudosphere(violations)
    scale = 1.0 + float(np.abs(u).max())
    for block in (u[:poly.k1], u[poly.k1:]):
        drift = np.abs(block[:, :2].sum(axis=0)).max(initial=0.0)
        if drift > tol * scale:
            raise NotNormalized(f"spatial parts of a block sum to {drift:.3e}")

    spatial = u[:, 0] + 1j * u[:, 1]
    t = np.sqrt(poly.alpha ** 2 + np.abs(spatial) ** 2)
    length = np.sqrt(poly.alpha + t)
    p = np.zeros((poly.n, 2), dtype=complex)
    q = np.zeros((poly.n, 2), dtype=complex)
    future = np.arange(poly.n) < poly.k1
    q[future, 0] = length[future]
    p[future, 1] = spatial[future] / length[future]
    q[~future, 1] = length[~future]
    p[~future, 0] = np.conj(spatial[~future]) / length[~future]

    order = poly.order if poly.order is not None else tuple(range(poly.n))
    back = np.empty(poly.n, dtype=int)
    back[list(order)] = np.arange(poly.n)
    return HyperConfig(p[back], q[back], poly.alpha[back])
