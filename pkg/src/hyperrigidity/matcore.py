"""Dense complex matrix substrate.

Every matrix is a 2-d ``numpy`` array of dtype ``complex128``. Zero-sized
shapes such as ``(0, n)`` are legal and behave as empty sums.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-10


class NotHermitianError(ValueError):
    """Raised when a matrix expected to be Hermitian is not, within tolerance."""

    def __init__(self, asymmetry: float, tol: float):
        super().__init__(f"matrix is not Hermitian: ||M - M*|| = {asymmetry:.3e} > {tol:.3e}")
        self.asymmetry = asymmetry


class NotPositiveError(ValueError):
    """Raised when a matrix expected to be positive semidefinite is not."""

    def __init__(self, min_eigenvalue: float, tol: float):
        super().__init__(f"matrix is not PSD: min eigenvalue {min_eigenvalue:.3e} < -{tol:.3e}")
        self.min_eigenvalue = min_eigenvalue


@dataclass(frozen=True)
class Tolerance:
    """Single tolerance policy used by every comparison in the package.

    ``value`` is relative: a residual passes when it is at most
    ``value * max(1, scale)``.
    """

    value: float = DEFAULT_TOL

    def bound(self, scale: float = 1.0) -> float:
        return self.value * max(1.0, float(scale))

    def accepts(self, residual: float, scale: float = 1.0) -> bool:
        return residual <= self.bound(scale)


def tolerance(tol: float | Tolerance | None = None) -> Tolerance:
    """Coerce a per-call override into a :class:`Tolerance`."""
    if tol is None:
        return Tolerance()
    if isinstance(tol, Tolerance):
        return tol
    if tol < 0:
        raise ValueError(f"tolerance must be non-negative, got {tol}")
    return Tolerance(float(tol))


def as_cmatrix(data, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Return ``data`` as a finite complex 2-d array, optionally checking its shape."""
    m = np.array(data, dtype=np.complex128)
    if m.ndim == 1 and shape is not None and m.size == 0:
        m = m.reshape(shape)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got ndim={m.ndim}")
    if shape is not None and m.shape != tuple(shape):
        raise ValueError(f"expected shape {tuple(shape)}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.complex128)


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def adjoint(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def op_norm(m: np.ndarray) -> float:
    """Largest singular value; 0 for empty matrices."""
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def batched_op_norm(ms: np.ndarray) -> np.ndarray:
    """Operator norms of a stack of matrices with shape ``(k, r, c)``."""
    if ms.shape[0] == 0:
        return np.zeros(0)
    if ms.shape[1] == 0 or ms.shape[2] == 0:
        return np.zeros(ms.shape[0])
    return np.linalg.svd(ms, compute_uv=False)[:, 0]


def hermitian_defect(m: np.ndarray) -> float:
    return op_norm(m - adjoint(m))


def herm_eig(m: np.ndarray, tol: float | Tolerance | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, U)`` with eigenvalues in descending order and
    ``M = U diag(eigenvalues) U*``.
    """
    t = tolerance(tol)
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got {m.shape}")
    asym = hermitian_defect(m)
    if not t.accepts(asym, op_norm(m)):
        raise NotHermitianError(asym, t.bound(op_norm(m)))
    if m.shape[0] == 0:
        return np.zeros(0), zeros(0, 0)
    w, u = np.linalg.eigh((m + adjoint(m)) / 2)
    order = np.argsort(-w, kind="stable")
    return w[order], u[:, order]


def min_eigenvalue(m: np.ndarray, tol: float | Tolerance | None = None) -> float:
    """Smallest eigenvalue of a Hermitian matrix (``+inf`` for the empty matrix)."""
    w, _ = herm_eig(m, tol)
    return float(w[-1]) if w.size else float("inf")


def is_psd(m: np.ndarray, tol: float | Tolerance | None = None) -> bool:
    t = tolerance(tol)
    return min_eigenvalue(m, t) >= -t.bound(op_norm(m))


def psd_sqrt(m: np.ndarray, tol: float | Tolerance | None = None) -> np.ndarray:
    """Positive square root; eigenvalues in ``[-tol, 0)`` are clamped to zero."""
    t = tolerance(tol)
    w, u = herm_eig(m, t)
    if w.size and w[-1] < -t.bound(op_norm(m)):
        raise NotPositiveError(float(w[-1]), t.bound(op_norm(m)))
    root = np.sqrt(np.clip(w, 0.0, None))
    return (u * root) @ adjoint(u)


def psd_inv_sqrt(m: np.ndarray, tol: float | Tolerance | None = None) -> np.ndarray:
    """Inverse positive square root of a positive definite matrix."""
    t = tolerance(tol)
    w, u = herm_eig(m, t)
    if w.size and w[-1] <= t.bound(op_norm(m)):
        raise NotPositiveError(float(w[-1]), t.bound(op_norm(m)))
    return (u / np.sqrt(w)) @ adjoint(u)


def block_diag(blocks) -> np.ndarray:
    """Block-diagonal matrix; blocks may be rectangular or empty."""
    blocks = list(blocks)
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = zeros(rows, cols)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def offsets(sizes) -> list[int]:
    """Start offsets for consecutive segments, with the total appended."""
    out = [0]
    for s in sizes:
        out.append(out[-1] + int(s))
    return out


def random_cmatrix(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    g = random_cmatrix(rng, n, n)
    return (g + adjoint(g)) / 2


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    if n == 0:
        return zeros(0, 0)
    q, r = np.linalg.qr(random_cmatrix(rng, n, n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_isometry(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """A ``rows x cols`` matrix with orthonormal columns (requires cols <= rows)."""
    if cols > rows:
        raise ValueError("an isometry needs cols <= rows")
    return random_unitary(rng, rows)[:, :cols]
