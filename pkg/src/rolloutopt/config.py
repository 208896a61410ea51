"""JSON run configuration and result document schemas.

Configs are single JSON documents; unknown fields are rejected so typos
surface as errors instead of silently falling back to defaults.  Every
document the CLI writes validates against one of the ``*Doc`` models.
"""

from typing import List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing_extensions import Annotated

from . import adaptation, arum, lasting, optimizer, retention
from .exceptions import ParameterError

U64_MAX = 2**64 - 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# -- curves -----------------------------------------------------------------------------


class ExpPowerSpec(_Strict):
    family: Literal["exp_power"]
    k: float = Field(2.0, gt=0)


class PolyCapSpec(_Strict):
    family: Literal["poly_cap"]
    k: float = Field(2.0, gt=0)


class InversePowerSpec(_Strict):
    family: Literal["inverse_power"]
    k: float = Field(1.0, gt=0)


class ScaledExpPowerSpec(_Strict):
    family: Literal["scaled_exp_power"]
    scale: float = Field(..., gt=0, le=1)
    k: float = Field(2.0, gt=0)


class TabulatedSpec(_Strict):
    family: Literal["tabulated"]
    x: List[float]
    p: List[float]


CurveSpec = Annotated[
    Union[ExpPowerSpec, PolyCapSpec, InversePowerSpec, ScaledExpPowerSpec, TabulatedSpec],
    Field(discriminator="family"),
]


class LinearCostSpec(_Strict):
    family: Literal["linear"]
    slope: float = Field(1.0, gt=0)


class PowerCostSpec(_Strict):
    family: Literal["power"]
    coeff: float = Field(1.0, gt=0)
    exponent: float = Field(1.0, ge=1)


class NormalSpec(_Strict):
    family: Literal["normal"]
    mean: float = 0.0
    sd: float = Field(1.0, gt=0)


class UniformSpec(_Strict):
    family: Literal["uniform"]
    lo: float
    hi: float


class ExponentialSpec(_Strict):
    family: Literal["exponential"]
    rate: float = Field(1.0, gt=0)


class LogisticSpec(_Strict):
    family: Literal["logistic"]
    loc: float = 0.0
    scale: float = Field(1.0, gt=0)


class ArumCfg(_Strict):
    u0: float = Field(..., gt=0)
    cost: Annotated[Union[LinearCostSpec, PowerCostSpec], Field(discriminator="family")] = LinearCostSpec(
        family="linear"
    )
    noise: Annotated[
        Union[NormalSpec, UniformSpec, ExponentialSpec, LogisticSpec], Field(discriminator="family")
    ] = NormalSpec(family="normal")


# -- everything else ------------------------------------------------------------------------


class RevenueCfg(_Strict):
    family: Literal["identity", "power", "affine", "log_shifted"] = "identity"
    delta: float = Field(0.9, gt=0, lt=1)
    a: float = Field(1.0, gt=0)
    intercept: float = Field(0.0, ge=0)
    slope: float = Field(1.0, gt=0)


class ClockCfg(_Strict):
    family: Literal["constant", "power"] = "constant"
    c: float = Field(1.0, gt=0)
    a: float = Field(0.5, ge=0)


class DecayCfg(_Strict):
    family: Literal["linear", "power"] = "linear"
    exponent: float = Field(1.0, gt=0)


class LastingCfg(_Strict):
    epsilon: float = Field(0.0, ge=0)
    decay: DecayCfg = DecayCfg()


class GridCfg(_Strict):
    min: float = Field(0.001, gt=0)
    max: float
    step: float = Field(0.001, gt=0)

    @model_validator(mode="after")
    def _ordered(self):
        if not self.min < self.max:
            raise ValueError("grid.min must be < grid.max")
        return self


class ScheduleCfg(_Strict):
    x: Optional[float] = Field(None, gt=0)
    z: Optional[int] = Field(None, ge=1)
    increments: Optional[List[Annotated[float, Field(ge=0)]]] = None

    @model_validator(mode="after")
    def _one_form(self):
        equal = self.x is not None and self.z is not None
        if equal == (self.increments is not None) or (self.x is None) != (self.z is None):
            raise ValueError("schedule needs either both x and z, or increments")
        return self


class SimulationCfg(_Strict):
    n_users: int = Field(100_000, ge=0)
    seed: int = Field(0, ge=0, le=U64_MAX)
    arms: int = Field(64, ge=0)
    arm_max: float = Field(2.0, gt=0)
    n_per_arm: int = Field(100_000, ge=30)
    chain: bool = False
    n_jobs: int = 1


class OutputCfg(_Strict):
    dir: str = "out"
    formats: List[Literal["json", "csv"]] = ["json", "csv"]


class RateCfg(_Strict):
    A: float = Field(1.0, gt=0)
    points: int = Field(512, ge=2)


class RunConfig(_Strict):
    curve: Optional[CurveSpec] = None
    arum: Optional[ArumCfg] = None
    revenue: RevenueCfg = RevenueCfg()
    clock: ClockCfg = ClockCfg()
    lasting: LastingCfg = LastingCfg()
    grid: Optional[GridCfg] = None
    schedule: Optional[ScheduleCfg] = None
    simulation: SimulationCfg = SimulationCfg()
    output: OutputCfg = OutputCfg()
    sweep_rate: RateCfg = RateCfg()
    z_max: int = Field(optimizer.Z_MAX, ge=1)

    @model_validator(mode="after")
    def _one_model(self):
        if (self.curve is None) == (self.arum is None):
            raise ValueError("exactly one of 'curve' and 'arum' must be given")
        return self


# -- builders -------------------------------------------------------------------------------


def build_arum(cfg):
    cost = (
        arum.LinearCost(cfg.cost.slope)
        if cfg.cost.family == "linear"
        else arum.PowerCost(cfg.cost.coeff, cfg.cost.exponent)
    )
    n = cfg.noise
    noise = {
        "normal": lambda: arum.NormalNoise(n.mean, n.sd),
        "uniform": lambda: arum.UniformNoise(n.lo, n.hi),
        "exponential": lambda: arum.ExponentialNoise(n.rate),
        "logistic": lambda: arum.LogisticNoise(n.loc, n.scale),
    }[n.family]()
    return arum.ArumSpec(cfg.u0, cost, noise)


def build_curve(cfg):
    """Retention curve described by ``cfg`` (ARUM configs become ArumDerived)."""
    if cfg.arum is not None:
        return retention.ArumDerived(build_arum(cfg.arum))
    c = cfg.curve
    if c.family == "exp_power":
        return retention.ExpPower(c.k)
    if c.family == "poly_cap":
        return retention.PolyCap(c.k)
    if c.family == "inverse_power":
        return retention.InversePower(c.k)
    if c.family == "scaled_exp_power":
        return retention.ScaledExpPower(c.scale, c.k)
    return retention.Tabulated(tuple(c.x), tuple(c.p))


def build_revenue(cfg):
    r = cfg.revenue
    fn = {
        "identity": optimizer.IdentityRevenue,
        "power": lambda: optimizer.PowerRevenue(r.a),
        "affine": lambda: optimizer.AffineRevenue(r.intercept, r.slope),
        "log_shifted": optimizer.LogShiftedRevenue,
    }[r.family]()
    return optimizer.RevenueModel(fn, r.delta)


def build_clock(cfg):
    c = cfg.clock
    return adaptation.ConstantClock(c.c) if c.family == "constant" else adaptation.PowerClock(c.c, c.a)


def build_effect(cfg):
    d = cfg.lasting.decay
    decay = lasting.LinearDecay() if d.family == "linear" else lasting.PowerDecay(d.exponent)
    return lasting.LastingEffect(cfg.lasting.epsilon, decay)


def build_grid(cfg, curve, step=None):
    if cfg.grid is None:
        return optimizer.default_sweep_grid(curve, step or 0.001)
    g = cfg.grid
    step = step or g.step
    n = int(np.floor((g.max - g.min) / step + 1e-9)) + 1
    grid = g.min + step * np.arange(n)
    if grid[-1] > curve.domain_max:
        raise ParameterError(f"grid.max={g.max} exceeds the curve's domain_max={curve.domain_max}")
    return grid


# -- result documents -----------------------------------------------------------------------


class ClassifyDoc(_Strict):
    command: Literal["classify"] = "classify"
    curvature: Literal["LogConcave", "LogConvex", "Neither", "DiscontinuousLogConcaveTail"]
    evidence: float
    max_second_diff: float
    min_second_diff: float
    worst_x: float
    jump_at_zero: float


class OptimizeDoc(_Strict):
    command: Literal["optimize"] = "optimize"
    x: float
    z: int
    A: float
    value: float
    one_step_shortcut_used: bool
    grid_size: int
    n_capped: int
    best_capped: bool


class SimulateDoc(_Strict):
    command: Literal["simulate"] = "simulate"
    seed: int
    n_users: int
    mode: Literal["direct", "arum"]
    periods: int
    final_survivors: int
    final_fraction: float
    final_ci_95: List[float]


class FittedCurveDoc(_Strict):
    x: List[float]
    p: List[float]


class EstimateDoc(_Strict):
    command: Literal["estimate"] = "estimate"
    seed: int
    arms: int
    n_per_arm: int
    wide_ci_warning: bool
    fitted_curve: FittedCurveDoc
    optimization: Optional[OptimizeDoc] = None


class SweepRateDoc(_Strict):
    command: Literal["sweep-rate"] = "sweep-rate"
    A: float
    points: int
    inelastic: bool
    rate_monotone: bool
    survival_nonincreasing: bool


RESULT_DOCS = {
    "classify": ClassifyDoc,
    "optimize": OptimizeDoc,
    "simulate": SimulateDoc,
    "estimate": EstimateDoc,
    "sweep-rate": SweepRateDoc,
}
