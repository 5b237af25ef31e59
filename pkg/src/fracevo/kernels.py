"""Weakly singular kernels and their product-integration quadrature.

All quadrature here integrates the singular factor t^{beta-1} exactly
against piecewise-linear data on a uniform grid, so the rules are exact
for piecewise-linear inputs and never evaluate a kernel at its
singularity.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ParameterError
from .special import gamma_fn


@dataclass(frozen=True)
class FractionalParams:
    """Derivative order alpha in (0,1) and tempering rate eta >= 0."""

    alpha: float
    eta: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.eta < 0.0:
            raise ParameterError(f"eta must be >= 0, got {self.eta}")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k*dt, k = 0..n_steps."""

    dt: float
    n_steps: int

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 1:
            raise ParameterError(f"n_steps must be >= 1, got {self.n_steps}")

    @property
    def times(self):
        return np.arange(self.n_steps + 1) * self.dt

    @property
    def horizon(self):
        return self.n_steps * self.dt


@dataclass(frozen=True, eq=False)
class KernelSamples:
    """Samples of g_beta on t_1..t_n of a grid (never at the t=0 singularity)."""

    beta: float
    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.beta <= 0.0:
            raise ParameterError(f"beta must be positive, got {self.beta}")
        if len(self.values) != self.grid.n_steps:
            raise DataError(
                f"expected {self.grid.n_steps} samples at t_1..t_n, "
                f"got {len(self.values)}"
            )
        if np.any(self.values <= 0.0):
            raise DataError("kernel samples must be positive for t > 0")
        if self.beta < 1.0 and np.any(np.diff(self.values) > 0.0):
            raise DataError("kernel samples must decrease for beta < 1")


def g_kernel(beta, t):
    """Power kernel g_beta(t) = t^{beta-1}/Gamma(beta) for t > 0, else 0."""
    if beta <= 0.0:
        raise ParameterError(f"beta must be positive, got {beta}")
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0.0
    out[pos] = t[pos] ** (beta - 1.0) / gamma_fn(beta)
    return out if out.ndim else float(out)


def kernel_samples(beta, grid):
    """KernelSamples of g_beta on grid points t_1..t_n."""
    times = grid.times[1:]
    return KernelSamples(beta=beta, grid=grid, values=g_kernel(beta, times))


def _pwl_arrays(beta, n):
    """Endpoint coefficients of exact integration of g_beta against
    piecewise-linear data.

    With a_m = (m^b - (m-1)^b)/b and b_m = (m^{b+1} - (m-1)^{b+1})/(b+1),
    interval m (distance (m-1)h..mh from the evaluation point) contributes
    h^b/Gamma(b) * [A_m u_{far} + B_m u_{near}] where A_m = b_m - (m-1)a_m
    and B_m = m*a_m - b_m.
    """
    m = np.arange(1, n + 1, dtype=float)
    a = (m ** beta - (m - 1) ** beta) / beta
    b = (m ** (beta + 1) - (m - 1) ** (beta + 1)) / (beta + 1)
    return b - (m - 1) * a, m * a - b


def _product_integral_at(beta, samples, dt, k):
    """int_0^{t_k} g_beta(t_k - s) * pwl[samples](s) ds, samples at t_0..t_k."""
    far, near = _pwl_arrays(beta, k)
    scale = dt ** beta / gamma_fn(beta)
    return scale * (np.dot(far[:k], samples[k - 1::-1]) + np.dot(near[:k], samples[k:0:-1]))


def convolve_kernel(beta, u, grid):
    """(g_beta * u)(t_k) for every grid point, exact for piecewise-linear u.

    `u` is either an array of samples at t_0..t_n (shape (n+1,) or
    (n+1, d)), or a KernelSamples carrying singular data g_gamma; the
    latter case uses two-sided product integration split at the midpoint
    so the data singularity at t=0 is also integrated analytically.
    """
    if beta <= 0.0:
        raise ParameterError(f"beta must be positive, got {beta}")
    if isinstance(u, KernelSamples):
        return _convolve_two_kernels(beta, u, grid)
    u = np.asarray(u)
    n = grid.n_steps
    if u.shape[0] != n + 1:
        raise DataError(f"expected {n + 1} samples on the grid, got {u.shape[0]}")
    far, near = _pwl_arrays(beta, n)
    scale = grid.dt ** beta / gamma_fn(beta)
    out = np.zeros_like(u, dtype=np.result_type(u, float))
    for k in range(1, n + 1):
        out[k] = scale * (far[:k] @ u[k - 1::-1] + near[:k] @ u[k:0:-1])
    return out


def _convolve_two_kernels(beta, kern, grid):
    """(g_beta * g_gamma)(t_k) with both singular endpoints handled exactly.

    The integral over [0, t_k] is split at t_{k//2}; on each half the
    singular factor nearest its endpoint is integrated analytically
    against the piecewise-linear interpolant of the other, which is
    smooth there.  The k=1 value uses the exact Beta-function identity.
    """
    gam = kern.beta
    dt = grid.dt
    n = grid.n_steps
    if kern.grid != grid:
        raise DataError("kernel samples live on a different grid")
    tg = grid.times
    g_beta_samples = g_kernel(beta, tg[1:])
    g_gamma_samples = kern.values
    out = np.zeros(n + 1)
    for k in range(1, n + 1):
        if k == 1:
            out[1] = dt ** (beta + gam - 1.0) / gamma_fn(beta + gam)
            continue
        p = k // 2
        # left half: g_gamma kept exact, pwl data are g_beta(t_{k-p}..t_k)
        left = _product_integral_at(gam, g_beta_samples[k - p - 1:k], dt, p)
        # right half: g_beta kept exact, pwl data are g_gamma(t_p..t_k)
        right = _product_integral_at(beta, g_gamma_samples[p - 1:k], dt, k - p)
        out[k] = left + right
    return out


def l1_weights(alpha, n, dt):
    """Nodal weights w_0..w_n of the discrete Caputo derivative at t_n.

    Derived from exact integration of (t_n - s)^{-alpha} against the
    piecewise-linear interpolant; the weights sum to zero.
    """
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must be in (0, 1), got {alpha}")
    if dt <= 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    b = l1_coefficients(alpha, n)
    scale = 1.0 / (gamma_fn(2.0 - alpha) * dt ** alpha)
    w = np.empty(n + 1)
    w[n] = scale * b[0]
    if n > 1:
        w[1:n] = scale * (b[n - 1:0:-1] - b[n - 2::-1])
    w[0] = -scale * b[n - 1]
    return w


def l1_coefficients(alpha, n):
    """b_k = (k+1)^{1-alpha} - k^{1-alpha}, k = 0..n-1 (decreasing in k)."""
    k = np.arange(n + 1, dtype=float)
    return np.diff(k ** (1.0 - alpha))


def tempered_derivative(u, params, grid):
    """Discrete tempered Caputo derivative of sampled u at every grid point.

    Product quadrature of (t-s)^{-alpha} e^{-eta(t-s)} u'(s) with
    piecewise-linear u: the power factor is integrated analytically per
    subinterval and the smooth exponential is taken at the subinterval
    midpoint.  With eta = 0 the arithmetic path is identical to the L1
    Caputo derivative.
    """
    if not isinstance(params, FractionalParams):
        params = FractionalParams(*params)
    u = np.asarray(u)
    n = grid.n_steps
    if u.shape[0] != n + 1:
        raise DataError(f"expected {n + 1} samples on the grid, got {u.shape[0]}")
    if u.shape[0] < 2:
        raise DataError("at least 2 samples are needed")
    alpha, eta = params.alpha, params.eta
    dt = grid.dt
    b = l1_coefficients(alpha, n)
    # e^{-eta * tau} at lag-interval midpoints tau = (m - 1/2) dt, m = 1..n
    damp = np.exp(-eta * (np.arange(1, n + 1) - 0.5) * dt)
    weights = b * damp
    scale = 1.0 / (gamma_fn(2.0 - alpha) * dt ** alpha)
    du = np.diff(u, axis=0)
    out = np.zeros_like(u, dtype=np.result_type(u, float))
    for k in range(1, n + 1):
        out[k] = scale * (weights[:k] @ du[k - 1::-1])
    return out


def caputo_l1_derivative(u, alpha, grid):
    """Discrete Caputo derivative: tempered derivative with eta = 0."""
    return tempered_derivative(u, FractionalParams(alpha, 0.0), grid)
