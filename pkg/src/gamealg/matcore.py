"""Dense complex matrix toolkit: norms, spectral projections and nearest-matrix roundings.

Matrices are plain ``numpy`` arrays of shape ``(d, d)``; nothing here mutates its
inputs.  The rounding helpers return the explicit proof constants alongside so
callers (and tests) can check the distance guarantees numerically.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

PSD_CLAMP = 1e-10
TRACE_TOL = 1e-9
SPECTRAL_TIE = 1e-12


class SubspaceRoundingError(np.linalg.LinAlgError):
    """Raised when a compressed operator is too close to singular to take its polar part."""

    def __init__(self, sigma: float, tol: float):
        super().__init__(
            f"subspace rounding ill-conditioned: singular value {sigma:.3e} < tol {tol:.3e}"
        )
        self.sigma = sigma
        self.tol = tol


class Norms(NamedTuple):
    op: float
    frobenius: float
    little_frobenius: float


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def identity(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex)


def op_norm(a) -> float:
    return float(np.linalg.norm(a, 2))


def frobenius(a) -> float:
    return float(np.linalg.norm(a, "fro"))


def little_frobenius(a) -> float:
    a = np.asarray(a)
    return frobenius(a) / np.sqrt(a.shape[0])


def norms(a) -> Norms:
    a = as_matrix(a)
    return Norms(op_norm(a), frobenius(a), little_frobenius(a))


@dataclass(frozen=True)
class SpectralData:
    """Eigen-decomposition of a self-adjoint matrix with eigenvalues in descending order."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def spectral_decomposition(a) -> SpectralData:
    a = as_matrix(a)
    h = (a + dagger(a)) / 2
    w, v = np.linalg.eigh(h)
    # eigh is ascending; flip while keeping the routine's order among ties
    order = np.argsort(-w, kind="stable")
    return SpectralData(w[order], v[:, order])


@dataclass(frozen=True, eq=False)
class DensityFactor:
    """Square root ``lam`` of a density matrix, so that ``rho = lam^* lam`` and tr(lam^2) = 1.

    Build through :func:`density_factor`, which validates and clamps numerical noise.
    """

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def spectrum(self) -> SpectralData:
        return spectral_decomposition(self.matrix)

    def rho(self) -> np.ndarray:
        return self.matrix @ self.matrix


def density_factor(lam, normalize: bool = False) -> DensityFactor:
    """Validate ``lam`` as a density factor.

    Eigenvalues in ``[-1e-10, 0)`` are clamped to zero; anything more negative is rejected.
    With ``normalize`` the result is rescaled so that tr(lam^2) = 1.
    """
    lam = as_matrix(lam)
    if np.max(np.abs(lam - dagger(lam))) > 1e-10:
        raise ValueError("density factor must be self-adjoint")
    spec = spectral_decomposition(lam)
    w = spec.eigenvalues.copy()
    if w.min() < -PSD_CLAMP:
        raise ValueError(f"density factor has negative eigenvalue {w.min():.3e}")
    w[w < 0] = 0.0
    if normalize:
        total = np.sqrt(np.sum(w**2))
        if total == 0:
            raise ValueError("cannot normalize the zero matrix")
        w = w / total
    if abs(np.sum(w**2) - 1.0) > TRACE_TOL:
        raise ValueError(f"tr(lam^2) = {np.sum(w**2):.12f}, expected 1")
    if np.all(w == spec.eigenvalues) and not normalize:
        m = (lam + dagger(lam)) / 2
    else:
        m = SpectralData(w, spec.eigenvectors).reconstruct()
    return DensityFactor(m)


def maximally_mixed_factor(d: int) -> DensityFactor:
    return DensityFactor(identity(d) / np.sqrt(d))


def _factor_matrix(lam) -> np.ndarray:
    return lam.matrix if isinstance(lam, DensityFactor) else np.asarray(lam, dtype=complex)


def rho_seminorm(a, lam) -> float:
    """State-induced seminorm ``||A lam||_F``."""
    a = np.asarray(a, dtype=complex)
    m = _factor_matrix(lam)
    if a.shape != m.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {m.shape}")
    return frobenius(a @ m)


def nearest_self_adjoint(x) -> np.ndarray:
    x = as_matrix(x)
    return (x + dagger(x)) / 2


def nearest_unitary(x, tol: float = 1e-9) -> np.ndarray:
    """Unitary factor ``U V`` of the SVD ``X = U S V``.

    For rank-deficient ``X`` the result depends on how the SVD completes its bases;
    the distance bound ``||X - W||_f <= ||X^*X - 1||_f`` does not.
    """
    x = as_matrix(x)
    u, s, vh = np.linalg.svd(x)
    if s[0] > 1 + tol:
        raise ValueError(f"nearest_unitary requires ||X||_op <= 1, got {s[0]:.6g}")
    return u @ vh


def sign_round_diagonal(x) -> np.ndarray:
    """Entrywise sign with the tie ``0 -> +1``."""
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0, 1.0, -1.0)


def involution_constant(c: float) -> float:
    """Explicit constant of the involution rounding: (1 + 1/sqrt 2)(C + 1) + 1/2."""
    return (1 + 1 / np.sqrt(2)) * (c + 1) + 0.5


def involution_residual(x) -> float:
    """max(||X - X^*||_f, ||X^2 - 1||_f)."""
    x = np.asarray(x, dtype=complex)
    d = x.shape[0]
    return max(little_frobenius(x - dagger(x)), little_frobenius(x @ x - identity(d)))


def round_to_involution(x, c: float | None = None, tol: float = 1e-9) -> np.ndarray:
    """Nearest self-adjoint involution: symmetrize, diagonalize, sign-round the eigenvalues."""
    x = as_matrix(x)
    if c is not None and op_norm(x) > c + tol:
        raise ValueError(f"||X||_op = {op_norm(x):.6g} exceeds C = {c}")
    spec = spectral_decomposition(nearest_self_adjoint(x))
    return SpectralData(sign_round_diagonal(spec.eigenvalues), spec.eigenvectors).reconstruct()


def projection_residual(p) -> float:
    p = np.asarray(p, dtype=complex)
    return max(little_frobenius(p - dagger(p)), little_frobenius(p @ p - p))


def nearest_projection(p, c0: float | None = None, tol: float = 1e-9) -> np.ndarray:
    """Orthogonal projection obtained by rounding the involution ``1 - 2P``."""
    p = as_matrix(p)
    if c0 is not None and op_norm(p) > c0 + tol:
        raise ValueError(f"||P||_op = {op_norm(p):.6g} exceeds C0 = {c0}")
    d = p.shape[0]
    z = round_to_involution(identity(d) - 2 * p)
    return (identity(d) - z) / 2


def projection_constant(c0: float) -> float:
    return 2 * involution_constant(2 * c0 + 1)


def spectral_projection_geq(lam, t: float) -> np.ndarray:
    """Projection onto eigenvectors of ``lam`` with eigenvalue >= t (within 1e-12)."""
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    spec = spectral_decomposition(_factor_matrix(lam))
    keep = spec.eigenvalues >= t - SPECTRAL_TIE
    v = spec.eigenvectors[:, keep]
    return v @ dagger(v)


def projection_basis(p) -> np.ndarray:
    """Orthonormal columns spanning the image of an orthogonal projection."""
    spec = spectral_decomposition(p)
    return spec.eigenvectors[:, spec.eigenvalues > 0.5]


def unitary_part_on_subspace(m, p, tol: float = 1e-6) -> np.ndarray:
    """Polar unitary of ``P M P`` inside Im(P), returned as an operator on the full space."""
    m = as_matrix(m)
    b = projection_basis(p)
    if b.shape[1] == 0:
        raise ValueError("projection is zero")
    k = dagger(b) @ m @ b
    u, s, vh = np.linalg.svd(k)
    if s[-1] < tol:
        raise SubspaceRoundingError(float(s[-1]), tol)
    return b @ (u @ vh) @ dagger(b)


def threshold_layers(lam) -> list[tuple[float, float, np.ndarray]]:
    """Piecewise-constant layers of alpha -> chi_{>= sqrt(alpha)}(lam).

    Returns ``(alpha_k, width_k, P_k)`` for the distinct squared positive eigenvalues
    ``alpha_1 > alpha_2 > ...``; ``P_k`` is constant on ``(alpha_{k+1}, alpha_k]`` and
    ``width_k = alpha_k - alpha_{k+1}`` (with a trailing zero).
    """
    spec = spectral_decomposition(_factor_matrix(lam))
    w = np.clip(spec.eigenvalues, 0, None)
    alphas: list[float] = []
    for a in w**2:
        if a <= 0:
            continue
        if alphas and abs(alphas[-1] - a) <= SPECTRAL_TIE:
            continue
        alphas.append(float(a))
    layers = []
    for k, a in enumerate(alphas):
        nxt = alphas[k + 1] if k + 1 < len(alphas) else 0.0
        keep = w**2 >= a - SPECTRAL_TIE
        v = spec.eigenvectors[:, keep]
        layers.append((a, a - nxt, v @ dagger(v)))
    return layers


def layer_integral(lam) -> np.ndarray:
    """Exact value of the integral of chi_{>= sqrt(alpha)}(lam) over alpha >= 0; equals lam^2."""
    m = _factor_matrix(lam)
    total = np.zeros_like(m)
    for _, width, p in threshold_layers(m):
        total = total + width * p
    return total


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_hermitian(d: int, rng: np.random.Generator, op: float | None = 1.0) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = (z + dagger(z)) / 2
    if op is not None:
        h = h * (op / op_norm(h))
    return h


def unitary_from_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(i t H)`` for self-adjoint ``H`` via its eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * t * w)) @ dagger(v)


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"dim": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        dim = int(obj.get("dim", re.shape[0]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix: {exc}") from exc
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise ValueError(f"matrix shape does not match dim={dim}")
    return re + 1j * im
