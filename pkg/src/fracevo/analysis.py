"""Decay-rate extraction from trajectory norms.

Exponential rates come from least squares on log-norm vs time,
polynomial rates from log-norm vs log-time; both report the regression
residual and an empirical constant witnessing the corresponding decay
bound.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, ParameterError

EXPONENTIAL = "exponential"
POLYNOMIAL = "polynomial"


@dataclass(frozen=True)
class DecayReport:
    """Fitted decay model for one norm history."""

    kind: str
    rate: float
    window: tuple
    residual: float
    bound_constant: float

    def __post_init__(self):
        if self.window[0] >= self.window[1]:
            raise DataError(f"empty fit window {self.window}")


@dataclass(frozen=True)
class BoundWitness:
    """Empirical decay-bound check: sup constant and tail trend."""

    kind: str
    rate: float
    constant: float
    tail_slope: float

    def is_flat(self, tol=0.05):
        """True when the normalized quantity shows no growth trend."""
        return self.tail_slope <= tol


def _window_mask(times, window):
    lo, hi = window
    return (times >= lo) & (times <= hi)


def _validated(times, norms, window, min_points):
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if times.shape != norms.shape:
        raise DataError("times and norms must have equal length")
    mask = _window_mask(times, window)
    if mask.sum() < min_points:
        raise DataError(
            f"need at least {min_points} samples in window {window}, "
            f"got {int(mask.sum())}"
        )
    if np.any(norms[mask] <= 0.0):
        raise DataError(
            "nonpositive norms inside the fit window (likely underflow; "
            "shorten the horizon)"
        )
    return times, norms, mask


def default_exponential_window(times):
    """Last half of the horizon in linear time."""
    t_hi = float(times[-1])
    return (t_hi / 2.0, t_hi)


def default_polynomial_window(times):
    """Last half of the horizon in log time."""
    positive = times[times > 0.0]
    lo = float(positive[0])
    hi = float(positive[-1])
    return (float(np.sqrt(lo * hi)), hi)


def fit_exponential_rate(times, norms, window=None, min_points=10):
    """Least-squares exponential decay rate of a norm history.

    Returns a DecayReport with rate = -slope of log||u|| vs t over the
    window and the witness sup_t e^{rate*t} ||u(t)|| / ||u(0)||.
    """
    times = np.asarray(times, dtype=float)
    if window is None:
        window = default_exponential_window(times)
    times, norms, mask = _validated(times, norms, window, min_points)
    t, y = times[mask], np.log(norms[mask])
    slope, intercept = np.polyfit(t, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * t + intercept)) ** 2)))
    rate = float(-slope)
    with np.errstate(over="ignore"):
        witness = float(np.max(np.exp(rate * times) * norms / norms[0]))
    return DecayReport(kind=EXPONENTIAL, rate=rate, window=tuple(window),
                       residual=residual, bound_constant=witness)


def fit_polynomial_rate(times, norms, window=None, min_points=10):
    """Least-squares algebraic decay exponent of a norm history.

    Returns a DecayReport with rate = -slope of log||u|| vs log t over
    the window and the witness sup_t (1 + t^rate) ||u(t)|| / ||u(0)||.
    The window must sit in the algebraic tail (lower edge >= 1).
    """
    times = np.asarray(times, dtype=float)
    if window is None:
        window = default_polynomial_window(times)
    if window[0] < 1.0:
        raise ParameterError(
            f"polynomial fits need a window inside the tail (t_lo >= 1), "
            f"got {window}"
        )
    times, norms, mask = _validated(times, norms, window, min_points)
    x, y = np.log(times[mask]), np.log(norms[mask])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    rate = float(-slope)
    witness = float(np.max((1.0 + times ** rate) * norms / norms[0]))
    return DecayReport(kind=POLYNOMIAL, rate=rate, window=tuple(window),
                       residual=residual, bound_constant=witness)


def verify_decay_bound_arrays(times, norms, kind, rate, norm0=None,
                              tail_fraction=0.1):
    """Bound witness for a norm history against a prescribed decay model.

    The normalized quantity is q(t) = f(t) ||u(t)|| / ||u(0)|| with
    f = e^{rate t} for the exponential model and f = 1 + t^rate for the
    polynomial one.  Returns its sup over the grid together with the
    log-log slope of q over the last decade of t (flat or negative slope
    means the bound constant has stabilized).
    """
    if kind not in (EXPONENTIAL, POLYNOMIAL):
        raise ParameterError(f"unknown decay model {kind!r}")
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if times.shape != norms.shape:
        raise DataError("times and norms must have equal length")
    if norm0 is None:
        norm0 = norms[0]
    if norm0 == 0.0:
        return BoundWitness(kind=kind, rate=rate, constant=0.0, tail_slope=0.0)
    if kind == EXPONENTIAL:
        with np.errstate(over="ignore"):
            q = np.exp(rate * times) * norms / norm0
    else:
        q = (1.0 + np.maximum(times, 0.0) ** rate) * norms / norm0
    constant = float(np.max(q))
    tail = times >= tail_fraction * times[-1]
    tail &= (q > 0.0) & (times > 0.0)
    if tail.sum() >= 3:
        slope = float(np.polyfit(np.log(times[tail]), np.log(q[tail]), 1)[0])
    else:
        slope = 0.0
    return BoundWitness(kind=kind, rate=rate, constant=constant,
                        tail_slope=slope)


def verify_decay_bound(traj, kind, rate, channel="state"):
    """Bound witness for a trajectory object.

    `channel` selects the norm history: "state" uses the plain state
    norms; "convolution" (integro-differential runs only) uses the
    half-power norms of the convolution component, normalized by the
    initial state norm as the theory prescribes.
    """
    if channel == "state":
        norms = traj.norms_x if hasattr(traj, "norms_x") else traj.norms
        norm0 = norms[0]
    elif channel == "convolution":
        if not hasattr(traj, "norms_xhalf"):
            raise ParameterError(
                "convolution channel needs an integro-differential trajectory"
            )
        norms = traj.norms_xhalf
        norm0 = traj.norms_x[0]
    else:
        raise ParameterError(f"unknown channel {channel!r}")
    return verify_decay_bound_arrays(traj.times, norms, kind, rate, norm0=norm0)
