"""Finite-dimensional realizations of the abstract generator.

Every operator exposes `apply`, `shifted_solve` (resolvent action),
`adjoint_apply` and optional spectral data; handles are immutable after
assembly and safe to share between threads (the lazy LU cache is
idempotent).
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DataError, ParameterError, SingularityError

_DENSE_SVD_LIMIT = 512


class LinearOperator:
    """Complex linear operator with resolvent solves."""

    dimension = 0
    spectral_data = None

    def apply(self, x):
        raise NotImplementedError

    def adjoint_apply(self, x):
        raise NotImplementedError

    def shifted_solve(self, lam, b):
        """Solve (lam*I - A) x = b."""
        raise NotImplementedError

    def fingerprint(self):
        raise NotImplementedError

    def _check_dim(self, x):
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dimension,):
            raise DataError(
                f"vector of shape {x.shape} fed to operator of dimension "
                f"{self.dimension}"
            )
        return x


class DiagonalOperator(LinearOperator):
    """Multiplication by a fixed eigenvalue vector."""

    def __init__(self, eigenvalues):
        eig = np.atleast_1d(np.asarray(eigenvalues, dtype=complex))
        if eig.size == 0:
            raise ParameterError("eigenvalue list must be non-empty")
        self._eig = eig
        self.dimension = eig.size

    @property
    def spectral_data(self):
        return self._eig

    def apply(self, x):
        return self._eig * self._check_dim(x)

    def adjoint_apply(self, x):
        return np.conj(self._eig) * self._check_dim(x)

    def shifted_solve(self, lam, b):
        b = self._check_dim(b)
        shifts = lam - self._eig
        bad = np.abs(shifts) < 1e-14 * max(1.0, abs(lam))
        if bad.any():
            raise SingularityError(
                f"shift {lam} coincides with eigenvalue "
                f"{self._eig[np.argmax(bad)]}"
            )
        return b / shifts

    def fingerprint(self):
        digest = hashlib.sha256(np.ascontiguousarray(self._eig).tobytes())
        return f"diag-{self.dimension}-{digest.hexdigest()[:16]}"


class MatrixOperator(LinearOperator):
    """Dense matrix operator with cached LU factorizations per shift."""

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ParameterError(f"square matrix required, got shape {m.shape}")
        self._m = m
        self.dimension = m.shape[0]
        self._lu_cache = {}

    @property
    def matrix(self):
        return self._m

    def apply(self, x):
        return self._m @ self._check_dim(x)

    def adjoint_apply(self, x):
        return self._m.conj().T @ self._check_dim(x)

    def shifted_solve(self, lam, b):
        b = self._check_dim(b)
        key = complex(lam)
        fac = self._lu_cache.get(key)
        if fac is None:
            shifted = key * np.eye(self.dimension) - self._m
            try:
                fac = sla.lu_factor(shifted)
            except sla.LinAlgError as exc:
                raise SingularityError(f"shift {lam} is singular") from exc
            self._lu_cache[key] = fac
        x = sla.lu_solve(fac, b)
        if not np.all(np.isfinite(x)):
            raise SingularityError(f"shift {lam} is numerically singular")
        return x

    def fingerprint(self):
        digest = hashlib.sha256(np.ascontiguousarray(self._m).tobytes())
        return f"matrix-{self.dimension}-{digest.hexdigest()[:16]}"


@dataclass(frozen=True, eq=False)
class DampingProfile:
    """Samples of a nonnegative damping coefficient on the interior mesh."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if np.any(v < 0.0):
            idx = int(np.argmax(v < 0.0))
            raise ParameterError(f"damping sample {idx} is negative ({v[idx]})")
        object.__setattr__(self, "values", v)

    @property
    def is_active(self):
        return bool(np.any(self.values > 0.0))


def interior_mesh(n, length):
    """Interior nodes x_j = j*h, j = 1..n, of [0, length] with h = length/(n+1)."""
    h = length / (n + 1)
    return np.arange(1, n + 1) * h


def constant_damping(n, length, value):
    return DampingProfile(np.full(n, float(value)))


def indicator_damping(n, length, x_lo, x_hi, value=1.0):
    """Damping `value` on [x_lo, x_hi], zero elsewhere."""
    x = interior_mesh(n, length)
    return DampingProfile(np.where((x >= x_lo) & (x <= x_hi), float(value), 0.0))


def bump_damping(n, length, center, width, value=1.0):
    """Smooth compactly-supported bump of height `value` around `center`."""
    x = interior_mesh(n, length)
    s = (x - center) / (width / 2.0)
    out = np.zeros(n)
    inside = np.abs(s) < 1.0
    out[inside] = value * np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return DampingProfile(out)


def diagonal_operator(eigenvalues):
    """Diagonal operator from an eigenvalue list."""
    return DiagonalOperator(eigenvalues)


def dirichlet_laplacian_1d(n, length):
    """Positive definite matrix of -d2/dx2 with Dirichlet ends (3-point stencil).

    Eigenvalues are (4/h^2) sin^2(k*pi*h/(2*length)), k = 1..n, h = length/(n+1).
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    h = length / (n + 1)
    main = np.full(n, 2.0 / h ** 2)
    off = np.full(n - 1, -1.0 / h ** 2)
    return np.diag(main) + np.diag(off, 1) + np.diag(off, -1)


def dirichlet_laplacian_eigenvalues(n, length):
    """Closed-form spectrum of dirichlet_laplacian_1d."""
    h = length / (n + 1)
    k = np.arange(1, n + 1)
    return (4.0 / h ** 2) * np.sin(k * np.pi * h / (2.0 * length)) ** 2


def damped_schrodinger_1d(n, length, damping):
    """Operator -(i*Laplacian_h + diag(a)) on the interior mesh.

    With a >= 0 the numerical range lies in the closed left half plane;
    any nonempty damping region in 1D stabilizes every mode.
    """
    if n < 3:
        raise ParameterError(f"n must be >= 3, got {n}")
    if isinstance(damping, DampingProfile):
        a = damping.values
    else:
        a = DampingProfile(np.asarray(damping, dtype=float)).values
    if a.shape != (n,):
        raise DataError(f"damping needs {n} samples, got {a.shape}")
    lap = dirichlet_laplacian_1d(n, length)   # positive definite -d2/dx2
    return MatrixOperator(-(1j * (-lap) + np.diag(a)))


class BlockSystemOperator(LinearOperator):
    """Block operator [[0, I], [-A, -D]] acting on stacked pairs (v, u).

    `A` must be symmetric positive definite and `D` symmetric positive
    semidefinite; both are given as dense real matrices.
    """

    def __init__(self, a_matrix, damping_matrix):
        a = np.asarray(a_matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ParameterError(f"A must be square, got shape {a.shape}")
        n = a.shape[0]
        if not np.allclose(a, a.T, rtol=1e-12, atol=1e-12):
            raise ParameterError("A must be symmetric")
        if np.min(sla.eigvalsh(a)) <= 0.0:
            raise ParameterError("A must be positive definite")
        d = np.asarray(damping_matrix, dtype=float)
        if d.shape != (n, n):
            raise DataError(f"damping shape {d.shape} does not match A {a.shape}")
        if not np.allclose(d, d.T, rtol=1e-12, atol=1e-12):
            raise ParameterError("damping must be symmetric")
        if np.min(sla.eigvalsh(d)) < -1e-12:
            raise ParameterError("damping must be positive semidefinite")
        self.a_part = a
        self.damping = d
        self.block_size = n
        self.dimension = 2 * n
        full = np.zeros((2 * n, 2 * n), dtype=complex)
        full[:n, n:] = np.eye(n)
        full[n:, :n] = -a
        full[n:, n:] = -d
        self._full = MatrixOperator(full)
        self._sqrt_a = None

    @property
    def matrix(self):
        return self._full.matrix

    def apply(self, x):
        return self._full.apply(x)

    def adjoint_apply(self, x):
        return self._full.adjoint_apply(x)

    def shifted_solve(self, lam, b):
        return self._full.shifted_solve(lam, b)

    def fingerprint(self):
        return "block-" + self._full.fingerprint()

    def sqrt_a(self):
        """Symmetric square root of A (for the half-power norm)."""
        if self._sqrt_a is None:
            w, v = sla.eigh(self.a_part)
            self._sqrt_a = (v * np.sqrt(w)) @ v.T
        return self._sqrt_a

    def half_norm(self, x):
        """|| A^{1/2} x ||_2 on the first-block coordinates."""
        x = np.asarray(x, dtype=complex)
        return float(np.linalg.norm(self.sqrt_a() @ x))


def block_operator(a_part, damping):
    """Assemble the second-order-in-structure block operator.

    `a_part` may be a LinearOperatorHandle with dense matrix or a plain
    array; `damping` is a matrix, a DampingProfile (multiplication
    operator) or None for the undamped case.
    """
    if isinstance(a_part, MatrixOperator):
        a = a_part.matrix.real
    else:
        a = np.asarray(a_part, dtype=float)
    n = a.shape[0]
    if damping is None:
        d = np.zeros((n, n))
    elif isinstance(damping, DampingProfile):
        d = np.diag(damping.values)
    else:
        d = np.asarray(damping, dtype=float)
    return BlockSystemOperator(a, d)


def spectrum(op):
    """Eigenvalues of the operator (stored for diagonal, dense otherwise)."""
    if op.spectral_data is not None:
        return np.array(op.spectral_data)
    return sla.eigvals(op.matrix)


def dissipativity_check(op, trials=64, seed=0):
    """Max of Re<Ax, x> over random complex unit vectors.

    Nonpositive (up to rounding) for dissipative discretizations; a
    positive value certifies non-dissipativity.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(trials):
        x = rng.standard_normal(op.dimension) + 1j * rng.standard_normal(op.dimension)
        x /= np.linalg.norm(x)
        worst = max(worst, float(np.vdot(x, op.apply(x)).real))
    return worst


def numerical_abscissa(op):
    """Exact sup of Re<Ax, x> over unit vectors: largest eigenvalue of the
    Hermitian part."""
    if isinstance(op, DiagonalOperator):
        return float(np.max(op.spectral_data.real))
    m = op.matrix
    return float(np.max(sla.eigvalsh((m + m.conj().T) / 2.0)))


def resolvent_scan(op, mu_grid):
    """||(i*mu*I - A)^{-1}||_2 for each real mu in the grid.

    Diagonal operators use the exact formula; dense matrices up to
    512x512 use full SVD; larger ones use iterative estimation of the
    smallest singular value (tolerance 1e-6).
    """
    mu_grid = np.atleast_1d(np.asarray(mu_grid, dtype=float))
    out = np.empty(mu_grid.shape)
    if isinstance(op, DiagonalOperator):
        eig = op.spectral_data
        for i, mu in enumerate(mu_grid):
            gap = np.min(np.abs(1j * mu - eig))
            if gap == 0.0:
                raise SingularityError(f"i*mu is in the spectrum at mu={mu}")
            out[i] = 1.0 / gap
        return out
    m = op.matrix
    eye = np.eye(op.dimension)
    for i, mu in enumerate(mu_grid):
        shifted = 1j * mu * eye - m
        if op.dimension <= _DENSE_SVD_LIMIT:
            smin = float(sla.svdvals(shifted)[-1])
        else:
            smin = _iterative_smallest_singular(shifted)
        if smin == 0.0:
            raise SingularityError(f"i*mu is in the spectrum at mu={mu}")
        out[i] = 1.0 / smin
    return out


def _iterative_smallest_singular(m, tol=1e-6, max_iter=200, seed=0):
    """Inverse iteration on M^H M for the smallest singular value."""
    fac = sla.lu_factor(m)
    fac_h = sla.lu_factor(m.conj().T)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(m.shape[0]) + 1j * rng.standard_normal(m.shape[0])
    x /= np.linalg.norm(x)
    est = np.inf
    for _ in range(max_iter):
        y = sla.lu_solve(fac_h, sla.lu_solve(fac, x))
        ny = np.linalg.norm(y)
        new_est = 1.0 / np.sqrt(ny)
        x = y / ny
        if abs(new_est - est) <= tol * new_est:
            return new_est
        est = new_est
    return est
