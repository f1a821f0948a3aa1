"""
The involution (p, q) -> (-p, q) and its fixed components.

The fixed locus splits into the polygon space M(alpha) (p = 0) and one
component Z_S for every short S with |S| >= 2. Points of Z_S are recognised
by their two straight classes; in a diagonalising SU(2) frame they take the
form q_i = (c_i, 0), p_i = (0, b_i) on S and q_i = (0, d_i), p_i = (a_i, 0)
off S.
"""
import enum
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from . import algebra
from .errors import (
    CensusMismatch,
    IdentityViolated,
    NotOnLevelSet,
    NotStable,
    NotZComponent,
)
from .gauge import GaugeElement, SolverOptions, act, kempf_ness_normalize
from .hyperpolygon import (
    GENERICITY_MARGIN,
    HyperConfig,
    SubsetMask,
    complex_residual,
    epsilon,
    is_alpha_stable,
    maximal_straight_sets,
    p_negligible,
    real_residual,
    require_stable,
    short_census,
)

logger = logging.getLogger(__name__)

LEVEL_TOL = 1e-8
# fixed-point samples are solved well below IDENTITY_TOL
SAMPLE_TOL = 1e-12
IDENTITY_TOL = 1e-9
POINCARE_NOTE = (
    "Poincare polynomials of Z_S are those of CP^{|S|-2}, even degrees only; "
    "odd-degree terms of 1+t+...+t^{2(|S|-2)} do not occur"
)


class FixedKind(enum.Enum):
    NOT_FIXED = "not-fixed"
    POLYGON = "polygon"
    Z = "Z_S"


@dataclass
class FixedPointClass:
    kind: FixedKind
    subset: Optional[SubsetMask] = None
    gauge: Optional[GaugeElement] = None

    @property
    def fixed(self) -> bool:
        return self.kind is not FixedKind.NOT_FIXED


def involve(cfg: HyperConfig) -> HyperConfig:
    return HyperConfig(-cfg.p, cfg.q.copy(), cfg.alpha.copy())


def diagonalising_gauge(cfg: HyperConfig, subset: SubsetMask) -> GaugeElement:
    """A = [u, u_perp] with u along the q_i of the subset."""
    rep = cfg.q[subset.indices()[0]]
    u = rep / np.linalg.norm(rep)
    A = np.column_stack([u, [-np.conj(u[1]), np.conj(u[0])]])
    return GaugeElement(A, np.ones(cfg.n))


def classify_fixed(cfg: HyperConfig, level_tol: float = LEVEL_TOL,
                   margin: float = GENERICITY_MARGIN) -> FixedPointClass:
    residual = real_residual(cfg)
    if residual > level_tol:
        raise NotOnLevelSet(residual)
    residual = complex_residual(cfg)
    if residual > level_tol:
        raise NotOnLevelSet(residual, "complex moment map")
    require_stable(cfg, margin=margin)

    if p_negligible(cfg, range(cfg.n)):
        return FixedPointClass(FixedKind.POLYGON)
    straight = maximal_straight_sets(cfg)
    if len(straight) != 2:
        logger.debug(f"{len(straight)} straight classes with p != 0: not fixed")
        return FixedPointClass(FixedKind.NOT_FIXED)
    subset = straight[0] if epsilon(straight[0], cfg.alpha) < 0 else straight[1]
    return FixedPointClass(FixedKind.Z, subset, diagonalising_gauge(cfg, subset))


# --- canonical Z_S data -----------------------------------------------------------

@dataclass
class CanonicalForm:
    config: HyperConfig
    subset: SubsetMask
    order: Tuple[int, ...]
    gauge: GaugeElement


def canonical_zs_form(cfg: HyperConfig, subset: SubsetMask) -> CanonicalForm:
    """Diagonalise, put S first, make c_i, d_i real positive and the first nonzero b_i c_i real positive.

    ``order[k]`` is the original index of slot k. Two points of Z_S are
    K-equivalent exactly when their canonical forms agree.
    """
    diag = diagonalising_gauge(cfg, subset)
    out = act(cfg, diag)
    inside = subset.as_bool()
    lead = np.where(inside, out.q[:, 0], out.q[:, 1])
    torus = GaugeElement(np.eye(2), np.conj(lead) / np.abs(lead))
    out = act(out, torus)

    pairing = np.where(inside, out.p[:, 1] * out.q[:, 0], out.p[:, 0] * out.q[:, 1])
    floor = 1e-12 * out.scale() ** 2
    nonzero = [i for i in subset.indices() if abs(pairing[i]) > floor]
    if nonzero:
        # diag(w, 1/w) rotates b_i c_i by w^-2
        angle = np.angle(pairing[nonzero[0]]) / 2.0
    else:
        others = [i for i in subset.complement().indices() if abs(pairing[i]) > floor]
        angle = -np.angle(pairing[others[0]]) / 2.0 if others else 0.0
    w = np.exp(1j * angle)
    rotation = GaugeElement(np.diag([w, np.conj(w)]), np.where(inside, w, np.conj(w)))
    out = act(out, rotation)

    order = subset.indices() + subset.complement().indices()
    permuted = HyperConfig(out.p[list(order)], out.q[list(order)], out.alpha[list(order)])
    first = SubsetMask.from_indices(range(subset.size), cfg.n)
    return CanonicalForm(permuted, first, order, diag.compose(torus).compose(rotation))


def check_zs_identities(cfg: HyperConfig, subset: SubsetMask, tol: float = IDENTITY_TOL) -> Dict[str, float]:
    """Balance identities of Z_S data, checked in canonical form; returns their magnitudes."""
    if p_negligible(cfg, range(cfg.n)):
        raise NotZComponent("p vanishes; the point lies on M(alpha)")
    canon = canonical_zs_form(cfg, subset)
    p, q, alpha = canon.config.p, canon.config.q, canon.config.alpha
    k = subset.size
    a, b = p[:, 0], p[:, 1]
    c, d = q[:, 0], q[:, 1]
    S, Sc = slice(0, k), slice(k, None)
    eps = epsilon(canon.subset, alpha)

    magnitudes = {
        "side_norms": float(max(
            np.abs(np.abs(c[S]) ** 2 - np.abs(b[S]) ** 2 - 2 * alpha[S]).max(),
            np.abs(np.abs(d[Sc]) ** 2 - np.abs(a[Sc]) ** 2 - 2 * alpha[Sc]).max(),
        )),
        "block_balance": float(abs(
            np.sum(np.abs(c[S]) ** 2 + np.abs(b[S]) ** 2) - np.sum(np.abs(d[Sc]) ** 2 + np.abs(a[Sc]) ** 2)
        )),
        "epsilon_balance": float(abs(eps - (np.sum(np.abs(a[Sc]) ** 2) - np.sum(np.abs(b[S]) ** 2)))),
        "block_sums": float(max(abs(np.sum(b[S] * c[S])), abs(np.sum(a[Sc] * d[Sc])))),
        "diagonal_form": float(max(
            np.abs(d[S]).max(initial=0.0), np.abs(a[S]).max(initial=0.0),
            np.abs(c[Sc]).max(initial=0.0), np.abs(b[Sc]).max(initial=0.0),
        )),
    }
    for name, magnitude in magnitudes.items():
        if magnitude > tol:
            raise IdentityViolated(name, magnitude)
    return magnitudes


def phi_floor(subset: SubsetMask, alpha: Sequence[float]) -> float:
    """Minimum of phi on Z_S, attained exactly on X_S."""
    return -0.5 * epsilon(subset, alpha)


# --- independent fixedness test -------------------------------------------------------

def _torus_residual(cfg: HyperConfig, A: np.ndarray) -> float:
    """min over unit e of |A^-1 q_i e_i - q_i|^2 + |-e_i^-1 p_i A - p_i|^2, summed over i."""
    y = cfg.q @ np.linalg.inv(A).T
    z = -cfg.p @ A
    gamma = np.einsum("ia,ia->i", np.conj(cfg.q), y) + np.einsum("ia,ia->i", np.conj(z), cfg.p)
    total = 2.0 * (np.sum(np.abs(cfg.q) ** 2) + np.sum(np.abs(cfg.p) ** 2)) - 2.0 * np.sum(np.abs(gamma))
    return max(float(total), 0.0)


def orbit_fixed_residual(cfg: HyperConfig, grid: int = 33) -> float:
    """Distance from cfg to the compact orbit of its involution image, relative to the scale."""
    best = np.inf
    for q in cfg.q:
        u = q / np.linalg.norm(q)
        U = np.column_stack([u, [-np.conj(u[1]), np.conj(u[0])]])

        def objective(theta: float) -> float:
            A = U @ np.diag([np.exp(1j * theta), np.exp(-1j * theta)]) @ algebra.adjoint(U)
            return _torus_residual(cfg, A)

        thetas = np.linspace(0.0, np.pi, grid)
        values = [objective(t) for t in thetas]
        k = int(np.argmin(values))
        lo, hi = thetas[max(k - 1, 0)], thetas[min(k + 1, grid - 1)]
        found = minimize_scalar(objective, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        best = min(best, values[k], float(found.fun))
    return float(np.sqrt(best)) / cfg.scale()


def is_fixed_by_orbit(cfg: HyperConfig, tol: float = 1e-6) -> bool:
    return orbit_fixed_residual(cfg) < tol


# --- census ---------------------------------------------------------------------------

@dataclass
class ComponentRecord:
    label: str
    dimension: int
    compact: bool
    poincare: Optional[List[int]]
    subset: Optional[SubsetMask] = None
    phi_floor: Optional[float] = None


@dataclass
class Census:
    n: int
    alpha: np.ndarray
    components: List[ComponentRecord]
    short_sets: int
    notes: List[str] = field(default_factory=list)

    @property
    def compact(self) -> int:
        return sum(1 for c in self.components if c.compact)

    @property
    def noncompact(self) -> int:
        return sum(1 for c in self.components if not c.compact)


def projective_poincare(dim: int) -> List[int]:
    """Coefficients of 1 + t^2 + ... + t^{2 dim} indexed by degree."""
    return [1 if k % 2 == 0 else 0 for k in range(2 * dim + 1)]


def census(alpha: Sequence[float], threads: int = 1, margin: float = GENERICITY_MARGIN) -> Census:
    alpha = np.asarray(alpha, dtype=float)
    n = alpha.size
    shorts = short_census(alpha, margin=margin, threads=threads)
    dimension = 2 * (n - 3)
    components: List[ComponentRecord] = []
    has_long_complement = False
    for subset in shorts.sprime_sets():
        compact = subset.size == n - 1
        has_long_complement |= compact
        # dim Z_S = dim X_S + 2 (n - 1 - |S|)
        if 2 * (subset.size - 2) + 2 * (n - 1 - subset.size) != dimension:
            raise CensusMismatch(f"dimension identity fails for {subset}")
        components.append(ComponentRecord(
            label=f"Z_{subset}",
            dimension=dimension,
            compact=compact,
            poincare=projective_poincare(subset.size - 2),
            subset=subset,
            phi_floor=phi_floor(subset, alpha),
        ))
    if not has_long_complement:
        components.insert(0, ComponentRecord("M(alpha)", dimension, True, None))

    result = Census(n, alpha, components, int(shorts.shorts.size), [POINCARE_NOTE])
    expected = 2 ** (n - 1) - (n + 1)
    if result.noncompact != expected or result.compact != 1:
        raise CensusMismatch(
            f"found {result.noncompact} non-compact and {result.compact} compact components, "
            f"expected {expected} and 1"
        )
    if result.short_sets != 2 ** (n - 1) - 1:
        raise CensusMismatch(f"found {result.short_sets} short sets, expected {2 ** (n - 1) - 1}")
    logger.info(f"census for n={n}: {len(components)} components")
    return result


# --- samplers for fixed points -----------------------------------------------------------

def _balanced(rng: np.random.Generator, weights: np.ndarray) -> np.ndarray:
    """A random complex vector x with sum x_i weights_i = 0 (zero when fewer than two entries)."""
    if weights.size < 2:
        return np.zeros(weights.size, dtype=complex)
    x = rng.standard_normal(weights.size) + 1j * rng.standard_normal(weights.size)
    return x - (x @ weights) * np.conj(weights) / np.sum(np.abs(weights) ** 2)


def _fixed_sample(alpha, subset: SubsetMask, seed: int, with_a: bool,
                  options: Optional[SolverOptions]) -> HyperConfig:
    alpha = np.asarray(alpha, dtype=float)
    if epsilon(subset, alpha) >= 0 or subset.size < 2:
        raise NotStable(f"{subset} is not a short set of size at least 2", str(subset))
    rng = np.random.default_rng(seed)
    inside = subset.as_bool()
    n = alpha.size
    lead = np.sqrt(2 * alpha) * np.exp(2j * np.pi * rng.random(n))
    p = np.zeros((n, 2), dtype=complex)
    q = np.zeros((n, 2), dtype=complex)
    q[inside, 0] = lead[inside]
    q[~inside, 1] = lead[~inside]
    p[inside, 1] = _balanced(rng, lead[inside])
    if with_a:
        p[~inside, 0] = _balanced(rng, lead[~inside])
    options = options or SolverOptions(tol=SAMPLE_TOL)
    return kempf_ness_normalize(HyperConfig(p, q, alpha), options).config


def sample_x_s_point(alpha, subset: SubsetMask, seed: int = 0,
                     options: Optional[SolverOptions] = None) -> HyperConfig:
    """A level-set point of X_S: p vanishes off S."""
    return _fixed_sample(alpha, subset, seed, False, options)


def sample_z_s_point(alpha, subset: SubsetMask, seed: int = 0,
                     options: Optional[SolverOptions] = None) -> HyperConfig:
    return _fixed_sample(alpha, subset, seed, True, options)


def sample_polygon_point(alpha, seed: int = 0, options: Optional[SolverOptions] = None) -> HyperConfig:
    """A level-set point of M(alpha) from random q and p = 0."""
    alpha = np.asarray(alpha, dtype=float)
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((alpha.size, 2)) + 1j * rng.standard_normal((alpha.size, 2))
    cfg = HyperConfig(np.zeros_like(q), q, alpha)
    verdict = is_alpha_stable(cfg)
    if not verdict:
        raise NotStable(f"M(alpha) is empty: {verdict.reason}", str(verdict.subset))
    return kempf_ness_normalize(cfg, options or SolverOptions(tol=SAMPLE_TOL)).config
