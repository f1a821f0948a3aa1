"""
Small exact-size linear algebra shared by the whole toolkit.

Complex 2-vectors (the q_i), complex 2-covectors (the p_i) and 2x2 complex
matrices are plain numpy arrays of shapes (2,), (2,) and (2, 2). Minkowski
vectors are real arrays of shape (3,) read as (x, y, t), with the inner
product v∘w = -x x' - y y' + t t'.

Identifications used throughout:

* su(1,1):  (x, y, t) -> 1/2 [[-i t, x + i y], [x - i y, i t]]
* su(2):    (v1, v2, v3) -> i/2 [[v3, v1 - i v2], [v1 + i v2, -v3]]

With the su(2) convention the side attached to a vector q is its Hopf image,
whose Euclidean length is |q|^2 / 2; so |q|^2 = 2 alpha gives a side of
length alpha.
"""
import enum
from dataclasses import dataclass
from typing import Union

import numpy as np

ArrayLike = Union[np.ndarray, list, tuple]

ETA = np.diag([-1.0, -1.0, 1.0])
IDENTITY2 = np.eye(2, dtype=complex)

# light-like when |v∘v| <= LIGHTLIKE_TOL * (1 + |v|_E^2)
LIGHTLIKE_TOL = 1e-10


class CausalClass(enum.Enum):
    LIGHT_LIKE = "light-like"
    FUTURE = "time-like-future"
    PAST = "time-like-past"
    SPACE_LIKE = "space-like"


# --- complex 2-vectors and 2x2 matrices -------------------------------------

def pairing(covector: ArrayLike, vector: ArrayLike) -> complex:
    """Row covector times column vector."""
    return complex(np.dot(np.asarray(covector), np.asarray(vector)))


def outer(vector: ArrayLike, covector: ArrayLike) -> np.ndarray:
    """Column vector times row covector, a 2x2 complex matrix."""
    return np.outer(np.asarray(vector, dtype=complex), np.asarray(covector, dtype=complex))


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def traceless_part(m: ArrayLike) -> np.ndarray:
    """M - (tr M / 2) I; the (.)_0 of the moment-map formulas."""
    m = np.asarray(m, dtype=complex)
    tr = np.trace(m, axis1=-2, axis2=-1)
    return m - 0.5 * tr[..., None, None] * IDENTITY2


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


# --- Minkowski 3-space ---------------------------------------------------------

def mink_inner(v: ArrayLike, w: ArrayLike) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    return -v[..., 0] * w[..., 0] - v[..., 1] * w[..., 1] + v[..., 2] * w[..., 2]


def mink_norm(v: ArrayLike) -> np.ndarray:
    return np.sqrt(np.abs(mink_inner(v, v)))


def mink_cross(v: ArrayLike, w: ArrayLike) -> np.ndarray:
    """Determinant of the rows (-e1, -e2, e3), v, w."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    x = -(v[..., 1] * w[..., 2] - v[..., 2] * w[..., 1])
    y = v[..., 0] * w[..., 2] - v[..., 2] * w[..., 0]
    t = v[..., 0] * w[..., 1] - v[..., 1] * w[..., 0]
    return np.stack([x, y, t], axis=-1)


def causal_class(v: ArrayLike, tol: float = LIGHTLIKE_TOL) -> CausalClass:
    v = np.asarray(v, dtype=float)
    s = float(mink_inner(v, v))
    if abs(s) <= tol * (1.0 + float(np.dot(v, v))):
        return CausalClass.LIGHT_LIKE
    if s < 0:
        return CausalClass.SPACE_LIKE
    return CausalClass.FUTURE if v[2] > 0 else CausalClass.PAST


# --- Lie algebra identifications ----------------------------------------------

def su11_embed(v: ArrayLike) -> np.ndarray:
    x, y, t = (float(c) for c in v)
    return 0.5 * np.array([[-1j * t, x + 1j * y], [x - 1j * y, 1j * t]], dtype=complex)


def su11_unembed(m: np.ndarray) -> np.ndarray:
    return np.array([2.0 * m[0, 1].real, 2.0 * m[0, 1].imag, -2.0 * m[0, 0].imag])


def su2_embed(v: ArrayLike) -> np.ndarray:
    v1, v2, v3 = (float(c) for c in v)
    return 0.5j * np.array([[v3, v1 - 1j * v2], [v1 + 1j * v2, -v3]], dtype=complex)


def su2_unembed(m: np.ndarray) -> np.ndarray:
    """Inverse of su2_embed on traceless anti-Hermitian matrices."""
    h = -2j * np.asarray(m)
    return np.array([h[..., 1, 0].real, h[..., 1, 0].imag, h[..., 0, 0].real]).T


def hermitian_to_vector(h: np.ndarray) -> np.ndarray:
    """Read a traceless Hermitian H = -2i X as the R^3 vector of X."""
    return np.array([h[1, 0].real, h[1, 0].imag, h[0, 0].real])


def vector_to_hermitian(v: ArrayLike) -> np.ndarray:
    v1, v2, v3 = (float(c) for c in v)
    return np.array([[v3, v1 - 1j * v2], [v1 + 1j * v2, -v3]], dtype=complex)


def hopf(q: ArrayLike) -> np.ndarray:
    """Euclidean side of a column vector q: the R^3 image of (i/2)(q q*)_0."""
    c, d = np.asarray(q, dtype=complex)
    cross = d * np.conj(c)
    return np.array([cross.real, cross.imag, 0.5 * (abs(c) ** 2 - abs(d) ** 2)])


# --- SU(1,1) isometries --------------------------------------------------------

@dataclass(frozen=True)
class Su11Isometry:
    """An orientation-preserving isometry of R^{2,1} stored as a flattened 3x3 matrix."""

    matrix: np.ndarray

    @classmethod
    def identity(cls) -> "Su11Isometry":
        return cls(np.eye(3))

    def apply(self, v: ArrayLike) -> np.ndarray:
        return np.asarray(v, dtype=float) @ self.matrix.T

    def __matmul__(self, other: "Su11Isometry") -> "Su11Isometry":
        # (g @ h).apply(v) == g.apply(h.apply(v))
        return Su11Isometry(self.matrix @ other.matrix)

    def inverse(self) -> "Su11Isometry":
        return Su11Isometry(ETA @ self.matrix.T @ ETA)

    def is_isometry(self, tol: float = 1e-12) -> bool:
        g = self.matrix
        return (
            np.allclose(g.T @ ETA @ g, ETA, atol=tol * max(1.0, float(np.abs(g).max()) ** 2))
            and abs(np.linalg.det(g) - 1.0) <= tol * max(1.0, float(np.abs(g).max()) ** 3)
            and g[2, 2] > 0
        )


def rotation(theta: float) -> Su11Isometry:
    c, s = np.cos(theta), np.sin(theta)
    return Su11Isometry(np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]))


def boost(phi: float) -> Su11Isometry:
    ch, sh = np.cosh(phi), np.sinh(phi)
    return Su11Isometry(np.array([[1.0, 0.0, 0.0], [0.0, ch, sh], [0.0, sh, ch]]))


def apply(g: Su11Isometry, v: ArrayLike) -> np.ndarray:
    return g.apply(v)
