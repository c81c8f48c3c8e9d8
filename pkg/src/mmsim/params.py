"""Model constants and solver settings.

All quantities are in price units, lots and seconds.  A configuration file is
flat UTF-8 text, one ``key = value`` pair per line, ``#`` starts a comment,
and keys must match the field names of :class:`MarketParams` or
:class:`SolverGrid` exactly.  Unknown keys are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

__all__ = [
    "MarketParams",
    "SolverGrid",
    "ConfigParseError",
    "ValidationError",
    "default_params",
    "default_grid",
    "validate",
    "load_config",
    "render_config",
]


@dataclass(frozen=True)
class MarketParams:
    """Market-model constants.

    sigma        midprice volatility, price units per sqrt(second)
    nu           long-term midprice drift, price units per second
    zeta         mean-reversion rate of the short-term drift, 1/second
    eta          diffusion volatility of the short-term drift
    eps_plus     upward drift jump per arriving buy market order
    eps_minus    downward drift jump per arriving sell market order
    lambda_plus  buy market-order intensity, 1/second
    lambda_minus sell market-order intensity, 1/second
    delta        bid-ask spread
    varphi       terminal inventory penalty, price units per lot^2
    phi          running inventory penalty, price units per lot^2 per second
    rho          probability that an eligible resting order is filled
                 non-adversely, in [0, 1]
    q_max        inventory bound in lots (position stays in [-q_max, q_max])
    horizon      strategy window length, seconds
    dt           simulation step, seconds
    n_dt         steps per window (n_dt * dt == horizon)
    """

    sigma: float = 0.005
    nu: float = 0.0
    zeta: float = 0.05
    eta: float = 0.001
    eps_plus: float = 0.002
    eps_minus: float = 0.002
    lambda_plus: float = 0.5833
    lambda_minus: float = 0.5833
    delta: float = 0.01
    varphi: float = 0.01
    phi: float = 0.0
    rho: float = 0.2
    q_max: int = 7
    horizon: float = 120.0
    dt: float = 1.0
    n_dt: int = 120


@dataclass(frozen=True)
class SolverGrid:
    """Discretization of the short-term-drift axis and solver substepping.

    The grid is symmetric (alpha_min == -alpha_max) with an odd point count
    so that alpha = 0 is a node.  ``substeps`` explicit substeps are taken
    per dt to keep the scheme stable.
    """

    alpha_min: float = -0.04
    alpha_max: float = 0.04
    n_alpha: int = 51
    substeps: int = 2


def default_params() -> MarketParams:
    """Baseline parameter set used throughout the package."""
    return MarketParams()


def default_grid() -> SolverGrid:
    """Grid wide enough to hold ~5 stationary standard deviations of alpha."""
    return SolverGrid()


def stationary_alpha_std(params: MarketParams) -> float:
    """Stationary standard deviation of the mean-reverting drift process."""
    if params.zeta <= 0:
        return math.inf
    var_rate = (
        params.eta**2
        + params.lambda_plus * params.eps_plus**2
        + params.lambda_minus * params.eps_minus**2
    )
    return math.sqrt(var_rate / (2.0 * params.zeta))


class ConfigParseError(ValueError):
    """Raised for malformed or unknown configuration entries."""


class ValidationError(ValueError):
    """Raised when a parameter set violates its invariants."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def validate(params: MarketParams, grid: SolverGrid | None = None) -> list[str]:
    """Check every invariant; return a list of problems (empty means valid).

    Never raises: any violation, including nonsensical field contents, is
    reported as an entry in the returned list.
    """
    problems: list[str] = []

    for name in ("sigma", "zeta", "eta", "eps_plus", "eps_minus",
                 "lambda_plus", "lambda_minus", "phi", "varphi"):
        value = getattr(params, name)
        if not _finite(value) or value < 0:
            problems.append(f"NegativeParameter: {name} = {value!r} must be >= 0")
    if not _finite(params.nu):
        problems.append(f"NegativeParameter: nu = {params.nu!r} must be finite")
    if not _finite(params.delta) or params.delta <= 0:
        problems.append(f"SpreadNonPositive: delta = {params.delta!r} must be > 0")
    if not _finite(params.rho) or not 0.0 <= params.rho <= 1.0:
        problems.append(f"RhoOutOfRange: rho = {params.rho!r} must lie in [0, 1]")
    if params.q_max < 1:
        problems.append(f"NegativeParameter: q_max = {params.q_max!r} must be >= 1")
    if not _finite(params.dt) or params.dt <= 0:
        problems.append(f"NegativeParameter: dt = {params.dt!r} must be > 0")
    if not _finite(params.horizon) or params.horizon <= 0:
        problems.append(f"NegativeParameter: horizon = {params.horizon!r} must be > 0")
    if params.n_dt < 1:
        problems.append(f"NegativeParameter: n_dt = {params.n_dt!r} must be >= 1")
    elif _finite(params.dt) and params.dt > 0 and _finite(params.horizon):
        if abs(params.n_dt * params.dt - params.horizon) > 1e-9 * max(1.0, params.horizon):
            problems.append(
                "InconsistentHorizon: n_dt * dt = "
                f"{params.n_dt * params.dt!r} does not equal horizon = {params.horizon!r}"
            )

    if grid is not None:
        if not _finite(grid.alpha_max) or grid.alpha_max <= 0:
            problems.append(f"GridAsymmetric: alpha_max = {grid.alpha_max!r} must be > 0")
        elif grid.alpha_min != -grid.alpha_max:
            problems.append(
                f"GridAsymmetric: alpha_min = {grid.alpha_min!r} "
                f"must equal -alpha_max = {-grid.alpha_max!r}"
            )
        if grid.n_alpha < 11 or grid.n_alpha % 2 == 0:
            problems.append(
                f"GridTooCoarse: n_alpha = {grid.n_alpha!r} must be odd and >= 11"
            )
        if grid.substeps < 1:
            problems.append(f"GridTooCoarse: substeps = {grid.substeps!r} must be >= 1")

    return problems


def _finite(value: float) -> bool:
    try:
        return math.isfinite(value)
    except TypeError:
        return False


_PARAM_FIELDS = {f.name for f in fields(MarketParams)}
_GRID_FIELDS = {f.name for f in fields(SolverGrid)}
_INT_KEYS = {"q_max", "n_dt", "n_alpha", "substeps"}


def load_config(text: str) -> tuple[MarketParams, SolverGrid]:
    """Parse a key=value document; missing keys fall back to the defaults.

    ``n_dt`` is derived from horizon/dt when not given explicitly, so that a
    dt or horizon override alone keeps the parameter set consistent.  The
    result is validated and a :class:`ValidationError` raised on failure.
    """
    overrides: dict[str, float | int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _PARAM_FIELDS and key not in _GRID_FIELDS:
            raise ConfigParseError(f"line {lineno}: unknown key {key!r}")
        if key in overrides:
            raise ConfigParseError(f"line {lineno}: duplicate key {key!r}")
        try:
            overrides[key] = int(value) if key in _INT_KEYS else float(value)
        except ValueError as exc:
            raise ConfigParseError(f"line {lineno}: bad value for {key!r}: {value!r}") from exc

    param_kwargs = {k: v for k, v in overrides.items() if k in _PARAM_FIELDS}
    grid_kwargs = {k: v for k, v in overrides.items() if k in _GRID_FIELDS}

    if "n_dt" not in param_kwargs and ("dt" in param_kwargs or "horizon" in param_kwargs):
        defaults = default_params()
        dt = param_kwargs.get("dt", defaults.dt)
        horizon = param_kwargs.get("horizon", defaults.horizon)
        if dt > 0 and horizon > 0:
            param_kwargs["n_dt"] = round(horizon / dt)

    params = MarketParams(**param_kwargs)
    grid = SolverGrid(**grid_kwargs)
    problems = validate(params, grid)
    if problems:
        raise ValidationError(problems)
    return params, grid


def render_config(params: MarketParams, grid: SolverGrid | None = None) -> str:
    """Serialize a parameter set in the config-file format (round-trips)."""
    lines = [f"{f.name} = {getattr(params, f.name)!r}" for f in fields(MarketParams)]
    if grid is not None:
        lines += [f"{f.name} = {getattr(grid, f.name)!r}" for f in fields(SolverGrid)]
    return "\n".join(lines) + "\n"
