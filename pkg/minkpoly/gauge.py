"""
The gauge group K = (U(2) x U(1)^n)/U(1) and its complexification.

Elements are stored as an SU(2) or SL(2, C) matrix A together with n scalars
e_i; the pair (A, e) and (-A, -e) act identically. The module holds the
action itself, the Kempf-Ness solver that moves a stable point of the complex
level set onto the real one, the local charts around circle-fixed points and
the isotropy-weight fit on top of them.
"""
import enum
import itertools
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from . import algebra
from .errors import (
    FitFailed,
    IndexDegenerate,
    NoConvergence,
    NotFixed,
    NotOnComplexLevel,
)
from .hyperpolygon import (
    HyperConfig,
    SubsetMask,
    circle_act,
    complex_residual,
    maximal_straight_sets,
    mu_real,
    p_negligible,
    phi,
    require_stable,
)

logger = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-8
WEIGHT_RANGE = range(-4, 5)


@dataclass(eq=False)
class GaugeElement:
    A: np.ndarray
    e: np.ndarray
    compact: bool = True

    def __post_init__(self):
        self.A = np.array(self.A, dtype=complex).reshape(2, 2)
        self.e = np.array(self.e, dtype=complex).reshape(-1)

    @property
    def n(self) -> int:
        return self.e.size

    @classmethod
    def identity(cls, n: int) -> "GaugeElement":
        return cls(np.eye(2), np.ones(n))

    @classmethod
    def random_compact(cls, n: int, rng: np.random.Generator) -> "GaugeElement":
        v = rng.standard_normal(4)
        v /= np.linalg.norm(v)
        a, b = v[0] + 1j * v[1], v[2] + 1j * v[3]
        A = np.array([[a, -np.conj(b)], [b, np.conj(a)]])
        return cls(A, np.exp(1j * rng.uniform(0.0, 2 * np.pi, n)))

    @classmethod
    def random_complex(cls, n: int, rng: np.random.Generator, scale: float = 0.5) -> "GaugeElement":
        x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        A = scipy.linalg.expm(scale * algebra.traceless_part(x))
        e = np.exp(scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n)))
        return cls(A, e, compact=False)

    def compose(self, other: "GaugeElement") -> "GaugeElement":
        """g.compose(h) acts as g first, then h."""
        return GaugeElement(self.A @ other.A, self.e * other.e, self.compact and other.compact)

    __matmul__ = compose

    def inverse(self) -> "GaugeElement":
        return GaugeElement(np.linalg.inv(self.A), 1.0 / self.e, self.compact)

    def is_well_formed(self, tol: float = 1e-12) -> bool:
        if abs(np.linalg.det(self.A) - 1.0) > tol * max(1.0, float(np.abs(self.A).max()) ** 2):
            return False
        if np.any(self.e == 0):
            return False
        if self.compact:
            return bool(
                np.allclose(algebra.adjoint(self.A) @ self.A, np.eye(2), atol=tol)
                and np.allclose(np.abs(self.e), 1.0, atol=tol)
            )
        return True

    def equivalent(self, other: "GaugeElement", tol: float = 1e-10) -> bool:
        """Equality in the quotient by (A, e) ~ (-A, -e)."""
        for sign in (1.0, -1.0):
            if np.allclose(self.A, sign * other.A, atol=tol) and np.allclose(self.e, sign * other.e, atol=tol):
                return True
        return False


def act(cfg: HyperConfig, g: GaugeElement) -> HyperConfig:
    """(p, q) . [A; e] = ((e_i^-1 p_i A)_i, (A^-1 q_i e_i)_i)."""
    if g.n != cfg.n:
        raise ValueError(f"gauge element has {g.n} scalars, configuration has n = {cfg.n}")
    p = (cfg.p @ g.A) / g.e[:, None]
    q = (cfg.q @ np.linalg.inv(g.A).T) * g.e[:, None]
    return HyperConfig(p, q, cfg.alpha.copy())


@dataclass
class GaugeInvariants:
    phi: float
    p_norms: np.ndarray
    q_norms: np.ndarray

    def close_to(self, other: "GaugeInvariants", tol: float = 1e-7) -> bool:
        return (
            abs(self.phi - other.phi) <= tol
            and np.allclose(self.p_norms, other.p_norms, atol=tol)
            and np.allclose(self.q_norms, other.q_norms, atol=tol)
        )


def gauge_invariants(cfg: HyperConfig) -> GaugeInvariants:
    return GaugeInvariants(phi(cfg), np.linalg.norm(cfg.p, axis=1), np.linalg.norm(cfg.q, axis=1))


# --- Kempf-Ness ------------------------------------------------------------------

@dataclass
class SolverOptions:
    tol: float = 1e-8
    max_iters: int = 500
    damping: float = 1.0
    armijo: float = 1e-4
    min_step: float = 1e-10


@dataclass
class KempfNessResult:
    config: HyperConfig
    gauge: GaugeElement
    residual: float
    iterations: int


def _residual_vector(cfg: HyperConfig) -> np.ndarray:
    su2, scalars = mu_real(cfg)
    return np.concatenate([su2, scalars - cfg.alpha])


def _jacobian(cfg: HyperConfig) -> np.ndarray:
    """Derivative of the residual along (H, s) -> (exp H, exp s) at the identity.

    With W_i = q_i q_i* + p_i* p_i the su(2) part moves by sum(-{dH, W_i} + 2 ds_i W_i)_0
    and the scalars by -tr(dH W_i) + ds_i tr W_i.
    """
    n = cfg.n
    W = np.einsum("ia,ib->iab", cfg.q, np.conj(cfg.q)) + np.einsum("ia,ib->iab", np.conj(cfg.p), cfg.p)
    trW = np.real(np.trace(W, axis1=1, axis2=2))
    jac = np.zeros((3 + n, 3 + n))
    for k in range(3):
        dH = algebra.vector_to_hermitian(np.eye(3)[k])
        anti = dH @ W + W @ dH
        jac[:3, k] = algebra.hermitian_to_vector(algebra.traceless_part(-anti.sum(axis=0)))
        jac[3:, k] = -np.real(np.einsum("ab,iba->i", dH, W))
    for i in range(n):
        jac[:3, 3 + i] = algebra.hermitian_to_vector(algebra.traceless_part(2.0 * W[i]))
        jac[3 + i, 3 + i] = trW[i]
    return jac


def _step_element(x: np.ndarray) -> GaugeElement:
    H = algebra.vector_to_hermitian(x[:3])
    return GaugeElement(scipy.linalg.expm(H), np.exp(x[3:]), compact=False)


def _line_search(cfg: HyperConfig, direction: np.ndarray, slope: float, f0: float,
                 options: SolverOptions) -> Optional[Tuple[HyperConfig, GaugeElement, float]]:
    step = options.damping
    while step >= options.min_step:
        g = _step_element(step * direction)
        trial = act(cfg, g)
        r = _residual_vector(trial)
        f1 = float(r @ r)
        if np.isfinite(f1) and f1 <= f0 + options.armijo * step * slope:
            return trial, g, f1
        step *= 0.5
    return None


def kempf_ness_normalize(
    cfg: HyperConfig,
    options: Optional[SolverOptions] = None,
    level_tol: float = 1e-10,
) -> KempfNessResult:
    """Move a stable point of the complex zero level onto mu_R = (0, alpha) along its K^C orbit."""
    options = options or SolverOptions()
    require_stable(cfg)
    drift = complex_residual(cfg)
    if drift > level_tol * cfg.scale() ** 2:
        raise NotOnComplexLevel(drift)

    current = cfg
    total = GaugeElement.identity(cfg.n)
    total.compact = False
    for iteration in range(options.max_iters + 1):
        r = _residual_vector(current)
        residual = float(np.abs(r).max())
        if residual < options.tol:
            logger.debug(f"Kempf-Ness converged in {iteration} iterations (residual {residual:.3e})")
            return KempfNessResult(current, total, residual, iteration)
        if iteration == options.max_iters:
            break
        f0 = float(r @ r)
        jac = _jacobian(current)
        newton = np.linalg.lstsq(jac, -r, rcond=None)[0]
        found = _line_search(current, newton, -2.0 * f0, f0, options)
        if found is None:
            gradient = 2.0 * jac.T @ r
            logger.debug(f"iteration {iteration}: Newton step rejected, trying gradient step")
            found = _line_search(current, -gradient, -float(gradient @ gradient), f0, options)
        if found is None:
            break
        current, g, _ = found
        total = total.compose(g)

    residual = float(np.abs(_residual_vector(current)).max())
    logger.warning(f"Kempf-Ness stalled with residual {residual:.3e}")
    raise NoConvergence(options.max_iters, residual)


# --- charts at circle-fixed points --------------------------------------------------

class ChartKind(enum.Enum):
    XS = "XS"
    POLYGON = "polygon"


@dataclass
class ChartCoords:
    indices: Tuple[int, ...]
    z: np.ndarray
    w: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.z, self.w])


@dataclass(eq=False)
class Chart:
    """Coordinates (z_i, w_i) around a fixed point, reported as offsets from it.

    ``roles`` holds the 0-based indices playing 1, 2, n (XS) or 1, 2, 3, n
    (polygon). Where ``flipped`` is set the normal form is q_i = (w, 1),
    p_i = (z, -z w); elsewhere q_i = (1, w), p_i = (-z w, z).
    """

    kind: ChartKind
    alpha: np.ndarray
    roles: Tuple[int, ...]
    indices: Tuple[int, ...]
    flipped: np.ndarray
    base_z: np.ndarray
    base_w: np.ndarray
    frame: GaugeElement
    radius: float
    subset: Optional[SubsetMask] = None

    def evaluate(self, cfg: HyperConfig) -> ChartCoords:
        _, z, w = _normal_form(cfg, self.kind, self.roles, self.indices, self.flipped)
        return ChartCoords(self.indices, z - self.base_z, w - self.base_w)

    def point(self, dz: Sequence[complex], dw: Sequence[complex]) -> HyperConfig:
        """The normal-form point of the complex level set at the given offsets."""
        z = self.base_z + np.asarray(dz, dtype=complex)
        w = self.base_w + np.asarray(dw, dtype=complex)
        builder = _xs_point if self.kind is ChartKind.XS else _polygon_point
        p, q = builder(self, z, w)
        return HyperConfig(p, q, self.alpha.copy())


def _sign_fix(A: np.ndarray) -> float:
    a = A[0, 0]
    if a.real < 0 or (a.real == 0 and a.imag < 0):
        return -1.0
    return 1.0


def _frame(cfg: HyperConfig, kind: ChartKind, roles: Tuple[int, ...]) -> Tuple[np.ndarray, Dict[int, complex]]:
    q, p = cfg.q, cfg.p
    if kind is ChartKind.XS:
        i1, _, i_n = roles
        P = algebra.pairing(p[i1], q[i_n])
        D = q[i1, 0] * q[i_n, 1] - q[i1, 1] * q[i_n, 0]
        scale = max(1.0, float(np.abs(q).max()), float(np.abs(p).max()))
        if abs(P) <= DEGENERACY_TOL * scale ** 2 or abs(D) <= DEGENERACY_TOL * scale ** 2:
            raise IndexDegenerate(f"normalisation entries vanish for roles {tuple(r + 1 for r in roles)}")
        e_n = 1.0 / np.sqrt(P * D)
        fixed = {i1: e_n * P, i_n: e_n}
    else:
        i1, i2, _, i_n = roles
        base = np.column_stack([q[i1], q[i_n]])
        D = np.linalg.det(base)
        scale = max(1.0, float(np.abs(q).max()))
        if abs(D) <= DEGENERACY_TOL * scale ** 2:
            raise IndexDegenerate(f"q_{i1 + 1} and q_{i_n + 1} are proportional")
        k1, k_n = np.linalg.solve(base, q[i2])
        if min(abs(k1), abs(k_n)) <= DEGENERACY_TOL:
            raise IndexDegenerate(f"q_{i2 + 1} is proportional to q_{i1 + 1} or q_{i_n + 1}")
        e2 = 1.0 / np.sqrt(k1 * k_n * D)
        fixed = {i1: e2 * k1, i2: e2, i_n: e2 * k_n}
    A = np.column_stack([fixed[i1] * q[i1], fixed[i_n] * q[i_n]])
    sign = _sign_fix(A)
    return sign * A, {i: sign * v for i, v in fixed.items()}


def _normal_form(cfg: HyperConfig, kind: ChartKind, roles: Tuple[int, ...],
                 indices: Tuple[int, ...], flipped: np.ndarray) -> Tuple[GaugeElement, np.ndarray, np.ndarray]:
    A, fixed = _frame(cfg, kind, roles)
    A_inv = np.linalg.inv(A)
    e = np.ones(cfg.n, dtype=complex)
    e[list(fixed)] = list(fixed.values())
    z = np.zeros(len(indices), dtype=complex)
    w = np.zeros(len(indices), dtype=complex)

    def coordinate(i: int, flip: bool) -> Tuple[complex, complex, complex]:
        x, y = A_inv @ cfg.q[i]
        pa = cfg.p[i] @ A
        pivot = y if flip else x
        if abs(pivot) <= DEGENERACY_TOL * max(1.0, abs(x), abs(y)):
            raise IndexDegenerate(f"index {i + 1} leaves the chart")
        if flip:
            return 1.0 / y, y * pa[0], x / y
        return 1.0 / x, x * pa[1], y / x

    if kind is ChartKind.XS:
        e[roles[1]] = coordinate(roles[1], False)[0]
    for k, (i, flip) in enumerate(zip(indices, flipped)):
        e[i], z[k], w[k] = coordinate(i, bool(flip))
    return GaugeElement(A, e, compact=False), z, w


def _xs_point(chart: Chart, z: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n = chart.alpha.size
    i1, i2, i_n = chart.roles
    inner, outer = ~chart.flipped, chart.flipped
    r2 = -1.0 - z[inner].sum() + (z[outer] * w[outer] ** 2).sum()
    r1 = ((w[outer] * z[outer]).sum() - (z[inner] * w[inner]).sum()) / r2
    r3 = r1 ** 2 * r2 + (z[inner] * w[inner] ** 2).sum() - z[outer].sum()
    p = np.zeros((n, 2), dtype=complex)
    q = np.zeros((n, 2), dtype=complex)
    q[i1], p[i1] = (1, 0), (0, 1)
    q[i2], p[i2] = (1, r1), (-r1 * r2, r2)
    q[i_n], p[i_n] = (0, 1), (r3, 0)
    _fill_coordinates(p, q, chart, z, w)
    return p, q


def _polygon_point(chart: Chart, z: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n = chart.alpha.size
    i1, i2, _, i_n = chart.roles
    # index 3 is the first chart coordinate and the only flipped one
    z3, w3, zr, wr = z[0], w[0], z[1:], w[1:]
    r2 = w3 * z3 - (zr * wr).sum()
    r1 = -r2 + z3 * w3 ** 2 - zr.sum()
    r3 = r2 - z3 + (zr * wr ** 2).sum()
    p = np.zeros((n, 2), dtype=complex)
    q = np.zeros((n, 2), dtype=complex)
    q[i1], p[i1] = (1, 0), (0, r1)
    q[i2], p[i2] = (1, 1), (-r2, r2)
    q[i_n], p[i_n] = (0, 1), (r3, 0)
    _fill_coordinates(p, q, chart, z, w)
    return p, q


def _fill_coordinates(p: np.ndarray, q: np.ndarray, chart: Chart, z: np.ndarray, w: np.ndarray):
    for i, flip, zi, wi in zip(chart.indices, chart.flipped, z, w):
        if flip:
            q[i], p[i] = (wi, 1), (zi, -zi * wi)
        else:
            q[i], p[i] = (1, wi), (-zi * wi, zi)


def _xs_roles(cfg: HyperConfig, subset: SubsetMask) -> Tuple[Tuple[int, ...], Tuple[int, ...], np.ndarray]:
    floor = DEGENERACY_TOL * cfg.scale()
    inside = [i for i in subset.indices() if np.abs(cfg.p[i]).max() > floor]
    outside = subset.complement().indices()
    if len(inside) < 2 or not outside:
        raise IndexDegenerate(f"X_S chart needs two indices of {subset} with b_i != 0 and a nonempty complement")
    roles = (inside[0], inside[1], outside[0])
    indices = tuple(i for i in range(cfg.n) if i not in roles)
    flipped = np.array([i not in subset for i in indices])
    return roles, indices, flipped


def _polygon_roles(cfg: HyperConfig) -> Tuple[Tuple[int, ...], Tuple[int, ...], np.ndarray]:
    for roles in itertools.permutations(range(cfg.n), 4):
        rest = tuple(i for i in range(cfg.n) if i not in roles)
        indices = (roles[2],) + rest
        flipped = np.array([True] + [False] * len(rest))
        try:
            _normal_form(cfg, ChartKind.POLYGON, roles, indices, flipped)
        except IndexDegenerate:
            continue
        return roles, indices, flipped
    raise IndexDegenerate("no admissible choice of normalisation indices")


def chart_at_fixed_point(cfg: HyperConfig, kind: ChartKind, subset: Optional[SubsetMask] = None) -> Chart:
    if kind is ChartKind.POLYGON:
        if not p_negligible(cfg, range(cfg.n)):
            raise NotFixed("p does not vanish; not a point of M(alpha)")
        roles, indices, flipped = _polygon_roles(cfg)
    else:
        straight = maximal_straight_sets(cfg)
        if len(straight) != 2:
            raise NotFixed(f"expected two straight classes, found {len(straight)}")
        if subset is None:
            subset = next(s for s in straight if not p_negligible(cfg, s.indices()))
        if {s.bits for s in straight} != {subset.bits, subset.complement().bits}:
            raise NotFixed(f"straight classes do not split as {subset} and its complement")
        if not p_negligible(cfg, subset.complement().indices()):
            raise NotFixed(f"p does not vanish off {subset}")
        roles, indices, flipped = _xs_roles(cfg, subset)

    frame, z, w = _normal_form(cfg, kind, roles, indices, flipped)
    chart = Chart(kind, cfg.alpha.copy(), roles, indices, flipped, z, w, frame, 0.0, subset)
    if kind is ChartKind.XS:
        r2 = -1.0 - z[~flipped].sum()
        chart.radius = 0.5 * min(1.0, abs(r2))
    else:
        k = np.linalg.solve(np.column_stack([cfg.q[roles[0]], cfg.q[roles[3]]]), cfg.q[roles[1]])
        chart.radius = 0.5 * min(1.0, float(np.abs(k).min()))
    logger.debug(f"chart {kind.value} with roles {tuple(r + 1 for r in roles)}")
    return chart


# --- isotropy weights -------------------------------------------------------------

@dataclass
class IsotropyReport:
    weights: Counter
    coordinates: List[Tuple[str, int]] = field(default_factory=list)
    residual: float = 0.0
    note: str = ""


def _fit_weight(ratios: np.ndarray, lams: np.ndarray) -> Tuple[int, float]:
    errors = {k: float(np.abs(ratios - lams ** k).max()) for k in WEIGHT_RANGE}
    k = min(errors, key=errors.get)
    return k, errors[k]


def measure_isotropy_weights(
    cfg: HyperConfig,
    kind: ChartKind,
    subset: Optional[SubsetMask] = None,
    offset: float = 1e-2,
    seed: int = 0,
    angles: Sequence[float] = (0.7, 1.9, 2.6),
) -> IsotropyReport:
    """Fit lambda^k to the chart coordinates of lambda . x near the fixed point."""
    chart = chart_at_fixed_point(cfg, kind, subset)
    rng = np.random.default_rng(seed)
    m = len(chart.indices)
    dz, dw = (offset * np.exp(2j * np.pi * rng.random(m)) for _ in range(2))
    near = chart.point(dz, dw)
    start = chart.evaluate(near).as_vector()

    lams = np.exp(1j * np.asarray(angles, dtype=float))
    moved = np.array([chart.evaluate(circle_act(lam, near)).as_vector() for lam in lams])
    ratios = moved / start

    labels = [f"z_{i + 1}" for i in chart.indices] + [f"w_{i + 1}" for i in chart.indices]
    coordinates, worst = [], 0.0
    for label, column in zip(labels, ratios.T):
        k, err = _fit_weight(column, lams)
        coordinates.append((label, k))
        worst = max(worst, err)
    if worst > 1e-6:
        raise FitFailed(worst)

    weights = Counter(k for _, k in coordinates if k != 0)
    note = ""
    if kind is ChartKind.POLYGON:
        note = (
            f"M(alpha) point: measured weight +1 with multiplicity {cfg.n - 3}; "
            "the '(n-1)-|S|' multiplicity wording attaches no S to this component"
        )
    return IsotropyReport(weights, coordinates, worst, note)
