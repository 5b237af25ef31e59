"""Run configuration: JSON schema, validation, and builders.

A run configuration is a single JSON object; every invariant of the
inner domain types is re-checked at load time and violations are
reported with the path of the offending field.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, FracevoError
from .kernels import FractionalParams, TimeGrid
from .operators import (DampingProfile, block_operator, bump_damping,
                        constant_damping, damped_schrodinger_1d,
                        diagonal_operator, dirichlet_laplacian_1d,
                        indicator_damping, interior_mesh)

OPERATOR_KINDS = ("diagonal", "schrodinger1d", "integrodiff")
SOLVERS = ("spectral", "l1", "volterra", "subordination")
INITIAL_PRESETS = ("ones", "first_eigenvector", "random")
FIT_MODELS = ("exp", "poly")
DAMPING_PROFILES = ("constant", "indicator", "bump")

DEFAULT_TRAJECTORY_FILE = "trajectory.csv"
DEFAULT_MANIFEST_FILE = "manifest.json"


@dataclass(frozen=True)
class RunConfig:
    """Validated, normalized run description (round-trips through JSON)."""

    operator: dict
    fractional: dict
    initial: dict
    grid: dict
    solver: str
    fit: dict | None = None
    resolvent: dict | None = None
    components: tuple = (0,)
    output: dict = field(default_factory=lambda: {
        "trajectory": DEFAULT_TRAJECTORY_FILE,
        "manifest": DEFAULT_MANIFEST_FILE,
    })
    tolerances: dict = field(default_factory=lambda: {
        "ml_rtol": 1e-8, "wright_abstol": 1e-10,
    })

    def to_dict(self):
        out = {
            "operator": dict(self.operator),
            "fractional": dict(self.fractional),
            "initial": dict(self.initial),
            "grid": dict(self.grid),
            "solver": self.solver,
            "components": list(self.components),
            "output": dict(self.output),
            "tolerances": dict(self.tolerances),
        }
        if self.fit is not None:
            out["fit"] = dict(self.fit)
        if self.resolvent is not None:
            out["resolvent"] = dict(self.resolvent)
        return out


def save_config(config, path):
    with open(path, "w") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_config(path):
    """Parse and validate a JSON run configuration file."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("<file>", f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"malformed JSON: {exc}")
    return parse_config(raw)


def _require(raw, key, path):
    if key not in raw:
        raise ConfigError(f"{path}{key}", "missing required field")
    return raw[key]


def _number(value, path, lo=None, hi=None, strict_lo=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    v = float(value)
    if lo is not None and (v <= lo if strict_lo else v < lo):
        cmp = ">" if strict_lo else ">="
        raise ConfigError(path, f"must be {cmp} {lo}, got {v}")
    if hi is not None and v > hi:
        raise ConfigError(path, f"must be <= {hi}, got {v}")
    return v


def _complex_entry(value, path):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(p, (int, float)) and not isinstance(p, bool)
                    for p in value)):
        return complex(value[0], value[1])
    raise ConfigError(path, f"expected number or [re, im] pair, got {value!r}")


def _parse_operator(raw):
    kind = _require(raw, "kind", "operator.")
    if kind not in OPERATOR_KINDS:
        raise ConfigError("operator.kind", f"must be one of {OPERATOR_KINDS}")
    out = {"kind": kind}
    if kind == "diagonal":
        eigs = _require(raw, "eigenvalues", "operator.")
        if not isinstance(eigs, list) or not eigs:
            raise ConfigError("operator.eigenvalues", "must be a non-empty list")
        parsed = [_complex_entry(e, f"operator.eigenvalues[{i}]")
                  for i, e in enumerate(eigs)]
        out["eigenvalues"] = [[z.real, z.imag] for z in parsed]
        return out
    n = _require(raw, "n", "operator.")
    if not isinstance(n, int) or isinstance(n, bool) or n < 3:
        raise ConfigError("operator.n", f"must be an integer >= 3, got {n!r}")
    out["n"] = n
    out["length"] = _number(_require(raw, "length", "operator."),
                            "operator.length", lo=0.0, strict_lo=True)
    out["damping"] = _parse_damping(_require(raw, "damping", "operator."), n)
    return out


def _parse_damping(raw, n):
    if not isinstance(raw, dict):
        raise ConfigError("operator.damping", "must be an object")
    if "values" in raw:
        values = raw["values"]
        if not isinstance(values, list) or len(values) != n:
            raise ConfigError("operator.damping.values",
                              f"must be a list of {n} samples")
        for i, v in enumerate(values):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"operator.damping.values[{i}]",
                                  f"expected a number, got {v!r}")
            if v < 0:
                raise ConfigError(f"operator.damping.values[{i}]",
                                  f"damping must be >= 0, got {v}")
        return {"values": [float(v) for v in values]}
    profile = _require(raw, "profile", "operator.damping.")
    if profile not in DAMPING_PROFILES:
        raise ConfigError("operator.damping.profile",
                          f"must be one of {DAMPING_PROFILES}")
    out = {"profile": profile}
    if profile == "constant":
        out["value"] = _number(_require(raw, "value", "operator.damping."),
                               "operator.damping.value", lo=0.0)
    elif profile == "indicator":
        out["x_lo"] = _number(_require(raw, "x_lo", "operator.damping."),
                              "operator.damping.x_lo")
        out["x_hi"] = _number(_require(raw, "x_hi", "operator.damping."),
                              "operator.damping.x_hi")
        if out["x_lo"] >= out["x_hi"]:
            raise ConfigError("operator.damping.x_lo", "needs x_lo < x_hi")
        out["value"] = _number(raw.get("value", 1.0),
                               "operator.damping.value", lo=0.0)
    else:
        out["center"] = _number(_require(raw, "center", "operator.damping."),
                                "operator.damping.center")
        out["width"] = _number(_require(raw, "width", "operator.damping."),
                               "operator.damping.width", lo=0.0, strict_lo=True)
        out["value"] = _number(raw.get("value", 1.0),
                               "operator.damping.value", lo=0.0)
    return out


def _parse_grid(raw):
    if not isinstance(raw, dict):
        raise ConfigError("grid", "must be an object")
    if "dt" in raw:
        dt = _number(_require(raw, "dt", "grid."), "grid.dt",
                     lo=0.0, strict_lo=True)
        horizon = _number(_require(raw, "horizon", "grid."), "grid.horizon",
                          lo=0.0, strict_lo=True)
        n_steps = int(round(horizon / dt))
        if n_steps < 1:
            raise ConfigError("grid.horizon", "horizon shorter than one step")
        if n_steps > 10 ** 6:
            raise ConfigError("grid.dt", f"grid of {n_steps} steps exceeds the "
                              "10^6 step cap; use a log grid with the spectral "
                              "solver")
        return {"dt": dt, "horizon": horizon}
    if "t_start" in raw or "t_stop" in raw:
        t0 = _number(_require(raw, "t_start", "grid."), "grid.t_start",
                     lo=0.0, strict_lo=True)
        t1 = _number(_require(raw, "t_stop", "grid."), "grid.t_stop",
                     lo=0.0, strict_lo=True)
        if t0 >= t1:
            raise ConfigError("grid.t_start", "needs t_start < t_stop")
        ppd = raw.get("points_per_decade", 24)
        if isinstance(ppd, bool) or not isinstance(ppd, int) or ppd < 2:
            raise ConfigError("grid.points_per_decade",
                              f"must be an integer >= 2, got {ppd!r}")
        return {"t_start": t0, "t_stop": t1, "points_per_decade": ppd}
    raise ConfigError("grid", "needs either dt/horizon or t_start/t_stop")


def parse_config(raw):
    """Validate a raw dict into a RunConfig."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    operator = _parse_operator(_require(raw, "operator", ""))

    frac_raw = _require(raw, "fractional", "")
    alpha = _number(_require(frac_raw, "alpha", "fractional."),
                    "fractional.alpha")
    if not 0.0 < alpha < 1.0:
        raise ConfigError("fractional.alpha", f"must be in (0, 1), got {alpha}")
    eta = _number(frac_raw.get("eta", 0.0), "fractional.eta", lo=0.0)
    fractional = {"alpha": alpha, "eta": eta}

    init_raw = raw.get("initial", {"preset": "ones"})
    preset = init_raw.get("preset", "ones")
    if preset not in INITIAL_PRESETS:
        raise ConfigError("initial.preset", f"must be one of {INITIAL_PRESETS}")
    seed = init_raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("initial.seed", f"must be a nonnegative integer, got {seed!r}")
    initial = {"preset": preset, "seed": seed}

    grid = _parse_grid(_require(raw, "grid", ""))

    solver = _require(raw, "solver", "")
    if solver not in SOLVERS:
        raise ConfigError("solver", f"must be one of {SOLVERS}")
    kind = operator["kind"]
    if solver in ("spectral", "subordination") and kind != "diagonal":
        raise ConfigError("solver", f"{solver} requires a diagonal operator "
                          "(pass precomputed eigenvalues)")
    if kind == "integrodiff" and solver != "volterra":
        raise ConfigError("solver", "integrodiff runs use the convolution-"
                          "quadrature scheme; set solver to 'volterra'")
    if "dt" not in grid and solver not in ("spectral", "subordination"):
        raise ConfigError("grid", f"log grids require the spectral or "
                          f"subordination solver, not {solver}")

    fit = None
    if "fit" in raw and raw["fit"] is not None:
        fit_raw = raw["fit"]
        model = _require(fit_raw, "model", "fit.")
        if model not in FIT_MODELS:
            raise ConfigError("fit.model", f"must be one of {FIT_MODELS}")
        fit = {"model": model}
        if "window" in fit_raw:
            win = fit_raw["window"]
            if (not isinstance(win, list) or len(win) != 2
                    or not all(isinstance(w, (int, float)) for w in win)
                    or win[0] >= win[1]):
                raise ConfigError("fit.window", f"must be [lo, hi] with lo < hi")
            fit["window"] = [float(win[0]), float(win[1])]

    resolvent = None
    if "resolvent" in raw and raw["resolvent"] is not None:
        r = raw["resolvent"]
        mu_min = _number(_require(r, "mu_min", "resolvent."), "resolvent.mu_min")
        mu_max = _number(_require(r, "mu_max", "resolvent."), "resolvent.mu_max")
        if mu_min >= mu_max:
            raise ConfigError("resolvent.mu_min", "needs mu_min < mu_max")
        num = r.get("num", 401)
        if isinstance(num, bool) or not isinstance(num, int) or num < 2:
            raise ConfigError("resolvent.num", f"must be an integer >= 2, got {num!r}")
        resolvent = {"mu_min": mu_min, "mu_max": mu_max, "num": num}

    components = raw.get("components", [0])
    if (not isinstance(components, list)
            or not all(isinstance(c, int) and not isinstance(c, bool) and c >= 0
                       for c in components)):
        raise ConfigError("components", "must be a list of nonnegative indices")

    output = raw.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("output", "must be an object")
    output = {
        "trajectory": str(output.get("trajectory", DEFAULT_TRAJECTORY_FILE)),
        "manifest": str(output.get("manifest", DEFAULT_MANIFEST_FILE)),
    }

    tolerances = raw.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise ConfigError("tolerances", "must be an object")
    tolerances = {
        "ml_rtol": _number(tolerances.get("ml_rtol", 1e-8),
                           "tolerances.ml_rtol", lo=0.0, strict_lo=True),
        "wright_abstol": _number(tolerances.get("wright_abstol", 1e-10),
                                 "tolerances.wright_abstol", lo=0.0,
                                 strict_lo=True),
    }

    return RunConfig(operator=operator, fractional=fractional, initial=initial,
                     grid=grid, solver=solver, fit=fit, resolvent=resolvent,
                     components=tuple(components), output=output,
                     tolerances=tolerances)


# ---------------------------------------------------------------------------
# builders


def build_operator(config):
    """Instantiate the operator described by the configuration."""
    spec = config.operator
    kind = spec["kind"]
    try:
        if kind == "diagonal":
            eigs = [complex(re, im) for re, im in spec["eigenvalues"]]
            return diagonal_operator(eigs)
        n, length = spec["n"], spec["length"]
        damping = _build_damping(spec["damping"], n, length)
        if kind == "schrodinger1d":
            return damped_schrodinger_1d(n, length, damping)
        return block_operator(dirichlet_laplacian_1d(n, length), damping)
    except FracevoError:
        raise
    except Exception as exc:   # pragma: no cover - defensive
        raise ConfigError("operator", str(exc))


def _build_damping(spec, n, length):
    if "values" in spec:
        return DampingProfile(np.asarray(spec["values"], dtype=float))
    profile = spec["profile"]
    if profile == "constant":
        return constant_damping(n, length, spec["value"])
    if profile == "indicator":
        return indicator_damping(n, length, spec["x_lo"], spec["x_hi"],
                                 spec["value"])
    return bump_damping(n, length, spec["center"], spec["width"], spec["value"])


def build_initial(config, op, seed_override=None):
    """Initial state vector for the configured preset (seeded, reproducible)."""
    preset = config.initial["preset"]
    seed = config.initial["seed"] if seed_override is None else seed_override
    kind = config.operator["kind"]
    dim = op.block_size if kind == "integrodiff" else op.dimension
    if preset == "ones":
        return np.ones(dim, dtype=complex)
    if preset == "first_eigenvector":
        if kind == "diagonal":
            vec = np.zeros(dim, dtype=complex)
            vec[0] = 1.0
            return vec
        x = interior_mesh(config.operator["n"], config.operator["length"])
        mode = np.sin(np.pi * x / config.operator["length"])
        return (mode / np.linalg.norm(mode)).astype(complex)
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return vec / np.linalg.norm(vec)


def build_times(config):
    """TimeGrid for uniform specs, explicit array for log grids."""
    grid = config.grid
    if "dt" in grid:
        return TimeGrid(dt=grid["dt"], n_steps=int(round(grid["horizon"] / grid["dt"])))
    decades = np.log10(grid["t_stop"]) - np.log10(grid["t_start"])
    num = max(2, int(round(decades * grid["points_per_decade"])) + 1)
    return np.logspace(np.log10(grid["t_start"]), np.log10(grid["t_stop"]), num)


def build_fractional(config):
    return FractionalParams(config.fractional["alpha"], config.fractional["eta"])
