"""
Hyperpolygon configurations (p, q) in T*C^{2n} and their combinatorics.

A configuration holds n row covectors p_i = (a_i, b_i), n column vectors
q_i = (c_i, d_i)^T and the weight vector alpha. This module provides both
moment maps, the subset sums eps_S, the short-set census, straightness and
the alpha-stability oracle, samplers for the complex level set, the circle
action with its moment map phi, and the Euclidean polygon read off from a
p = 0 point.
"""
import functools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from . import algebra
from .errors import (
    EnumerationTooLarge,
    NonGeneric,
    NotOnLevelSet,
    NotStable,
    SamplerFailed,
    ZeroVector,
)

logger = logging.getLogger(__name__)

ENUMERATION_CAP = 24
GENERICITY_MARGIN = 1e-8
PROP_TOL = 1e-9
P_ZERO_TOL = 1e-9
Q_ZERO_TOL = 1e-14
_CHUNK = 1 << 16


@dataclass(frozen=True)
class SubsetMask:
    """A subset S of {1, ..., n} stored as a bitmask (bit i is index i, 0-based)."""

    bits: int
    n: int

    @classmethod
    def from_indices(cls, indices: Sequence[int], n: int) -> "SubsetMask":
        bits = 0
        for i in indices:
            if not 0 <= i < n:
                raise ValueError(f"index {i} out of range for n = {n}")
            bits |= 1 << int(i)
        return cls(bits, n)

    @classmethod
    def from_labels(cls, labels: Sequence[int], n: int) -> "SubsetMask":
        """Build from 1-based labels, as shown in reports."""
        return cls.from_indices([int(i) - 1 for i in labels], n)

    def indices(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.n) if self.bits >> i & 1)

    def labels(self) -> Tuple[int, ...]:
        return tuple(i + 1 for i in self.indices())

    def complement(self) -> "SubsetMask":
        return SubsetMask(((1 << self.n) - 1) ^ self.bits, self.n)

    @property
    def size(self) -> int:
        return bin(self.bits).count("1")

    def as_bool(self) -> np.ndarray:
        return np.array([bool(self.bits >> i & 1) for i in range(self.n)])

    def __contains__(self, i: int) -> bool:
        return bool(self.bits >> i & 1)

    def __str__(self) -> str:
        return "{" + ",".join(str(i) for i in self.labels()) + "}"


@dataclass(frozen=True, eq=False)
class WeightVector:
    """alpha = (alpha_1, ..., alpha_n) with positive entries and n >= 4."""

    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float).reshape(-1)
        if alpha.size < 4:
            raise ValueError(f"need at least 4 weights, got {alpha.size}")
        if not np.all(np.isfinite(alpha)) or np.any(alpha <= 0):
            raise ValueError("weights must be finite and positive")
        object.__setattr__(self, "alpha", alpha)

    @property
    def n(self) -> int:
        return self.alpha.size

    def is_generic(self, margin: float = GENERICITY_MARGIN) -> bool:
        return min_abs_epsilon(self.alpha)[0] > margin


@dataclass(eq=False)
class HyperConfig:
    """A point (p, q) of T*C^{2n} together with its weight vector."""

    p: np.ndarray
    q: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        self.p = np.array(self.p, dtype=complex).reshape(-1, 2)
        self.q = np.array(self.q, dtype=complex).reshape(-1, 2)
        self.alpha = np.array(self.alpha, dtype=float).reshape(-1)
        if not (self.p.shape == self.q.shape and self.p.shape[0] == self.alpha.size):
            raise ValueError(
                f"shape mismatch: p {self.p.shape}, q {self.q.shape}, alpha {self.alpha.shape}"
            )

    @property
    def n(self) -> int:
        return self.alpha.size

    def copy(self) -> "HyperConfig":
        return HyperConfig(self.p.copy(), self.q.copy(), self.alpha.copy())

    def scale(self) -> float:
        return max(1.0, float(np.abs(self.q).max(initial=0.0)), float(np.abs(self.p).max(initial=0.0)))


@dataclass
class ShortCensus:
    n: int
    generic: bool
    min_abs_epsilon: float
    shorts: np.ndarray = field(repr=False)
    sprime: np.ndarray = field(repr=False)

    def short_sets(self) -> List[SubsetMask]:
        return [SubsetMask(int(b), self.n) for b in self.shorts]

    def sprime_sets(self) -> List[SubsetMask]:
        return [SubsetMask(int(b), self.n) for b in self.sprime]


@dataclass
class StabilityVerdict:
    stable: bool
    subset: Optional[SubsetMask] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.stable


# --- moment maps ------------------------------------------------------------------

def mu_real(cfg: HyperConfig) -> Tuple[np.ndarray, np.ndarray]:
    """(i/2) sum (q q* - p* p)_0 read in R^3, and the scalars (|q_i|^2 - |p_i|^2) / 2."""
    qq = np.einsum("ia,ib->ab", cfg.q, np.conj(cfg.q))
    pp = np.einsum("ia,ib->ab", np.conj(cfg.p), cfg.p)
    herm = algebra.traceless_part(qq - pp)
    scalars = 0.5 * (np.sum(np.abs(cfg.q) ** 2, axis=1) - np.sum(np.abs(cfg.p) ** 2, axis=1))
    return algebra.hermitian_to_vector(herm), scalars


def mu_complex(cfg: HyperConfig) -> Tuple[np.ndarray, np.ndarray]:
    """-sum (q_i p_i)_0 and the scalars sqrt(-1) p_i q_i."""
    qp = np.einsum("ia,ib->ab", cfg.q, cfg.p)
    scalars = 1j * np.einsum("ia,ia->i", cfg.p, cfg.q)
    return -algebra.traceless_part(qp), scalars


def real_residual(cfg: HyperConfig) -> float:
    su2, scalars = mu_real(cfg)
    return float(max(np.abs(su2).max(), np.abs(scalars - cfg.alpha).max()))


def complex_residual(cfg: HyperConfig) -> float:
    matrix, scalars = mu_complex(cfg)
    return float(max(np.abs(matrix).max(), np.abs(scalars).max()))


# --- weights ------------------------------------------------------------------------

def epsilon(subset: SubsetMask, alpha: Sequence[float]) -> float:
    alpha = np.asarray(alpha, dtype=float)
    inside = subset.as_bool()
    return float(alpha[inside].sum() - alpha[~inside].sum())


def _epsilon_chunk(alpha: np.ndarray, start: int, stop: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    masks = np.arange(start, stop, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(alpha.size, dtype=np.int64)) & 1
    eps = bits @ (2.0 * alpha) - alpha.sum()
    return masks, eps, bits.sum(axis=1)


def _check_cap(n: int):
    if n > ENUMERATION_CAP:
        raise EnumerationTooLarge(n, ENUMERATION_CAP)


@functools.lru_cache(maxsize=256)
def _min_abs_epsilon_cached(alpha: Tuple[float, ...]) -> Tuple[float, int]:
    arr = np.asarray(alpha)
    best, best_mask = np.inf, 0
    for start in range(0, 1 << arr.size, _CHUNK):
        masks, eps, _ = _epsilon_chunk(arr, start, min(start + _CHUNK, 1 << arr.size))
        k = int(np.argmin(np.abs(eps)))
        if abs(eps[k]) < best:
            best, best_mask = float(abs(eps[k])), int(masks[k])
    return best, best_mask


def min_abs_epsilon(alpha: Sequence[float]) -> Tuple[float, SubsetMask]:
    alpha = np.asarray(alpha, dtype=float)
    _check_cap(alpha.size)
    value, mask = _min_abs_epsilon_cached(tuple(float(a) for a in alpha))
    return value, SubsetMask(mask, alpha.size)


def ensure_generic(alpha: Sequence[float], margin: float = GENERICITY_MARGIN) -> float:
    value, subset = min_abs_epsilon(alpha)
    if value <= margin:
        raise NonGeneric(value, str(subset))
    return value


def short_census(
    alpha: Sequence[float],
    margin: float = GENERICITY_MARGIN,
    strict: bool = True,
    threads: int = 1,
) -> ShortCensus:
    """Enumerate every subset; shorts exclude the empty set, sprime keeps |S| >= 2."""
    alpha = np.asarray(alpha, dtype=float)
    n = alpha.size
    _check_cap(n)
    ranges = [(s, min(s + _CHUNK, 1 << n)) for s in range(0, 1 << n, _CHUNK)]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        chunks = list(pool.map(lambda r: _epsilon_chunk(alpha, *r), ranges))

    shorts, sprime = [], []
    min_abs, min_mask = np.inf, 0
    for masks, eps, sizes in chunks:
        k = int(np.argmin(np.abs(eps)))
        if abs(eps[k]) < min_abs:
            min_abs, min_mask = float(abs(eps[k])), int(masks[k])
        short = (eps < 0) & (masks != 0)
        shorts.append(masks[short])
        sprime.append(masks[short & (sizes >= 2)])

    generic = min_abs > margin
    if not generic and strict:
        raise NonGeneric(min_abs, str(SubsetMask(min_mask, n)))
    census = ShortCensus(n, generic, min_abs, np.concatenate(shorts), np.concatenate(sprime))
    logger.debug(f"short census for n={n}: {census.shorts.size} short, {census.sprime.size} in S'")
    return census


# --- straightness and stability ------------------------------------------------------

def _q_norms(cfg: HyperConfig) -> np.ndarray:
    return np.linalg.norm(cfg.q, axis=1)


def maximal_straight_sets(cfg: HyperConfig, tol: float = PROP_TOL) -> List[SubsetMask]:
    """Classes of indices whose q_i are projectively proportional, |c_i d_j - d_i c_j| <= tol |q_i||q_j|."""
    norms = _q_norms(cfg)
    floor = Q_ZERO_TOL * max(1.0, float(norms.max()))
    for i, norm in enumerate(norms):
        if norm <= floor:
            raise ZeroVector(i)
    classes: List[List[int]] = []
    for i in range(cfg.n):
        for members in classes:
            j = members[0]
            det = cfg.q[i, 0] * cfg.q[j, 1] - cfg.q[i, 1] * cfg.q[j, 0]
            if abs(det) <= tol * norms[i] * norms[j]:
                members.append(i)
                break
        else:
            classes.append([i])
    return [SubsetMask.from_indices(members, cfg.n) for members in classes]


def p_negligible(cfg: HyperConfig, indices: Sequence[int]) -> bool:
    floor = P_ZERO_TOL * max(1.0, float(np.abs(cfg.q).max()))
    return all(np.abs(cfg.p[j]).max() < floor for j in indices)


def is_alpha_stable(
    cfg: HyperConfig,
    tol: float = PROP_TOL,
    margin: float = GENERICITY_MARGIN,
) -> StabilityVerdict:
    ensure_generic(cfg.alpha, margin)
    try:
        straight = maximal_straight_sets(cfg, tol)
    except ZeroVector as e:
        return StabilityVerdict(False, SubsetMask.from_indices([e.index], cfg.n), f"q_{e.index + 1} = 0")
    for subset in straight:
        if p_negligible(cfg, subset.complement().indices()) and epsilon(subset, cfg.alpha) > 0:
            return StabilityVerdict(False, subset, f"straight set {subset} is long with p = 0 off it")
    return StabilityVerdict(True)


def require_stable(cfg: HyperConfig, tol: float = PROP_TOL, margin: float = GENERICITY_MARGIN) -> None:
    verdict = is_alpha_stable(cfg, tol, margin)
    if not verdict:
        raise NotStable(verdict.reason, str(verdict.subset) if verdict.subset else None)


# --- samplers -------------------------------------------------------------------------

def annihilator_system(q: np.ndarray) -> np.ndarray:
    """Rows of sum t_i q_i (d_i, -c_i) = 0: the (0,0), (0,1) and (1,0) entries."""
    c, d = q[:, 0], q[:, 1]
    return np.vstack([c * d, c ** 2, d ** 2])


def sample_complex_level(
    alpha: Sequence[float],
    seed: int,
    p_scale: float = 1.0,
    max_retries: int = 32,
    margin: float = GENERICITY_MARGIN,
) -> HyperConfig:
    """A stable point of the complex zero level, with p_i = t_i (d_i, -c_i)."""
    alpha = np.asarray(alpha, dtype=float)
    n = alpha.size
    ensure_generic(alpha, margin)
    rng = np.random.default_rng(seed)
    for attempt in range(max_retries):
        q = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
        basis = scipy.linalg.null_space(annihilator_system(q))
        if basis.shape[1] != n - 3:
            logger.debug(f"attempt {attempt}: annihilator system has rank deficiency")
            continue
        z = rng.standard_normal(n - 3) + 1j * rng.standard_normal(n - 3)
        t = basis @ z
        t *= p_scale / max(float(np.abs(t).max()), 1e-300)
        p = t[:, None] * np.stack([q[:, 1], -q[:, 0]], axis=1)
        cfg = HyperConfig(p, q, alpha)
        if complex_residual(cfg) < 1e-12 * cfg.scale() ** 2 and is_alpha_stable(cfg, margin=margin):
            return cfg
        logger.debug(f"attempt {attempt} rejected")
    raise SamplerFailed(max_retries)


# --- circle action -------------------------------------------------------------------

def circle_act(lam: complex, cfg: HyperConfig) -> HyperConfig:
    if abs(abs(lam) - 1.0) > 1e-12:
        raise ValueError(f"|lambda| must be 1, got {abs(lam)}")
    return HyperConfig(lam * cfg.p, cfg.q.copy(), cfg.alpha.copy())


def phi(cfg: HyperConfig) -> float:
    return 0.5 * float(np.sum(np.abs(cfg.p) ** 2))


# --- the polygon space M(alpha) --------------------------------------------------------

def euclidean_sides(cfg: HyperConfig, tol: float = 1e-8) -> np.ndarray:
    if not p_negligible(cfg, range(cfg.n)):
        raise NotOnLevelSet(float(np.abs(cfg.p).max()), "p = 0")
    residual = real_residual(cfg)
    if residual > tol:
        raise NotOnLevelSet(residual)
    return np.array([algebra.hopf(q) for q in cfg.q])


def config_from_sides(sides: np.ndarray, alpha: Optional[Sequence[float]] = None) -> HyperConfig:
    """A p = 0 configuration whose Hopf sides are the given vectors."""
    sides = np.asarray(sides, dtype=float)
    lengths = np.linalg.norm(sides, axis=1)
    q = np.zeros((len(sides), 2), dtype=complex)
    for i, (s, r) in enumerate(zip(sides, lengths)):
        c2 = r + s[2]
        if c2 <= 1e-15 * max(1.0, r):
            q[i] = (0.0, np.sqrt(2.0 * r))
        else:
            c = np.sqrt(c2)
            q[i] = (c, (s[0] + 1j * s[1]) / c)
    alpha = lengths if alpha is None else np.asarray(alpha, dtype=float)
    return HyperConfig(np.zeros_like(q), q, alpha)


def quadrilateral_from_diagonal(alpha: Sequence[float], ell: float, theta: float) -> Optional[np.ndarray]:
    """The n = 4 polygon with |s_1 + s_2| = ell, bent by theta about the diagonal; None if infeasible."""
    a1, a2, a3, a4 = (float(a) for a in alpha)
    z1 = (ell ** 2 + a1 ** 2 - a2 ** 2) / (2.0 * ell)
    z3 = -(ell ** 2 + a3 ** 2 - a4 ** 2) / (2.0 * ell)
    r1sq, r3sq = a1 ** 2 - z1 ** 2, a3 ** 2 - z3 ** 2
    if r1sq < 0 or r3sq < 0:
        return None
    r1, r3 = np.sqrt(r1sq), np.sqrt(r3sq)
    diagonal = np.array([0.0, 0.0, ell])
    s1 = np.array([r1 * np.cos(theta), r1 * np.sin(theta), z1])
    s3 = np.array([r3, 0.0, z3])
    return np.array([s1, diagonal - s1, s3, -diagonal - s3])


def diagonal_range(alpha: Sequence[float], tol: float = 1e-10, samples: int = 2048) -> Tuple[float, float]:
    """Attainable |s_1 + s_2| over closed quadrilaterals, found by bisection on feasibility."""
    alpha = np.asarray(alpha, dtype=float)

    def feasible(ell: float) -> bool:
        return ell > 0 and quadrilateral_from_diagonal(alpha, ell, 0.0) is not None

    grid = np.linspace(0.0, alpha.sum(), samples)[1:]
    hits = [ell for ell in grid if feasible(ell)]
    if not hits:
        raise ValueError("the polygon space is empty for these weights")

    def bisect(good: float, bad: float) -> float:
        while abs(good - bad) > tol:
            mid = 0.5 * (good + bad)
            if feasible(mid):
                good = mid
            else:
                bad = mid
        return good

    return bisect(hits[0], 0.0), bisect(hits[-1], float(alpha.sum()))


# --- dimension -------------------------------------------------------------------

def _to_real(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.concatenate([p.real.ravel(), p.imag.ravel(), q.real.ravel(), q.imag.ravel()])


def _from_real(x: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    k = 2 * n
    p = (x[:k] + 1j * x[k:2 * k]).reshape(n, 2)
    q = (x[2 * k:3 * k] + 1j * x[3 * k:]).reshape(n, 2)
    return p, q


def _mu_hk_real(x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    p, q = _from_real(x, alpha.size)
    cfg = HyperConfig(p, q, alpha)
    su2, scalars = mu_real(cfg)
    matrix, cscalars = mu_complex(cfg)
    entries = np.array([matrix[0, 0], matrix[0, 1], matrix[1, 0]])
    return np.concatenate([su2, scalars, entries.real, entries.imag, cscalars.real, cscalars.imag])


def _infinitesimal_action(cfg: HyperConfig) -> np.ndarray:
    n = cfg.n
    generators = []
    for k in range(3):
        xi = algebra.su2_embed(np.eye(3)[k])
        generators.append(_to_real(cfg.p @ xi, -(xi @ cfg.q.T).T))
    for i in range(n):
        dp = np.zeros_like(cfg.p)
        dq = np.zeros_like(cfg.q)
        dp[i] = -1j * cfg.p[i]
        dq[i] = 1j * cfg.q[i]
        generators.append(_to_real(dp, dq))
    return np.array(generators).T


def _rank(m: np.ndarray, rtol: float) -> int:
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > rtol * max(float(s.max(initial=0.0)), 1e-300)))


def level_set_dimension(cfg: HyperConfig, h: float = 1e-4, rtol: float = 1e-8) -> int:
    """Real dimension of X(alpha) at a level-set point: 8n - rank(d mu_HK) - rank(action)."""
    x0 = _to_real(cfg.p, cfg.q)
    columns = []
    for k in range(x0.size):
        step = np.zeros_like(x0)
        step[k] = h
        columns.append((_mu_hk_real(x0 + step, cfg.alpha) - _mu_hk_real(x0 - step, cfg.alpha)) / (2 * h))
    jacobian = np.array(columns).T
    return x0.size - _rank(jacobian, rtol) - _rank(_infinitesimal_action(cfg), rtol)
