"""Classical well-mixed SIR dynamics for comparing outbreak thresholds with the behavioural ratio.

    dS/dt = -beta S I / N
    dI/dt =  beta S I / N - gamma I
    dR/dt =  gamma I
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import DEFAULT_TOLERANCE, RegimeClass, _check_real, classify_regime
from .errors import StepTooLarge, ValidationError

CONSERVATION_TOL = 1e-6
NEGATIVITY_TOL = 1e-9


@dataclass(frozen=True)
class SirParams:
    beta: float
    gamma: float
    population: float
    i0: float
    s0: float | None = None
    r0_init: float = 0.0

    def __post_init__(self):
        for name in ("beta", "gamma", "population"):
            value = _check_real(name, getattr(self, name))
            if value <= 0:
                raise ValidationError(f"{name} must be positive, got {value!r}", key=name)
            object.__setattr__(self, name, value)
        i0 = _check_real("i0", self.i0)
        r_init = _check_real("r0_init", self.r0_init)
        s0 = self.population - i0 - r_init if self.s0 is None else _check_real("s0", self.s0)
        if min(i0, r_init, s0) < 0:
            raise ValidationError("initial compartments must be nonnegative", key="i0")
        if abs(s0 + i0 + r_init - self.population) > 1e-9 * self.population:
            raise ValidationError("s0 + i0 + r0_init must equal the population", key="s0")
        object.__setattr__(self, "i0", i0)
        object.__setattr__(self, "r0_init", r_init)
        object.__setattr__(self, "s0", s0)


@dataclass(frozen=True)
class SirTrajectory:
    times: np.ndarray
    s: np.ndarray
    i: np.ndarray
    r: np.ndarray

    def peak(self) -> tuple[float, float]:
        """Time and height of the infectious peak."""
        idx = int(np.argmax(self.i))
        return float(self.times[idx]), float(self.i[idx])

    def conservation_drift(self, population: float) -> float:
        return float(np.max(np.abs(self.s + self.i + self.r - population)) / population)


def basic_reproduction_number(p: SirParams) -> float:
    return p.beta / p.gamma


def _rhs(y: np.ndarray, beta: float, gamma: float, n: float) -> np.ndarray:
    s, i, _ = y
    infection = beta * s * i / n
    recovery = gamma * i
    return np.array([-infection, infection - recovery, recovery])


def integrate_sir(p: SirParams, t_max: float, step: float) -> SirTrajectory:
    """Fixed-step classical RK4, sampled every ``step``.

    Raises :class:`StepTooLarge` if the run loses conservation beyond 1e-6
    relative, goes negative beyond -1e-9 N, or breaks the monotonicity of S
    and R; no values are clipped.
    """
    step = _check_real("step", step)
    t_max = _check_real("t_max", t_max)
    if step <= 0:
        raise ValidationError("step must be positive", key="step")
    if t_max < step:
        raise ValidationError("t_max must be at least one step", key="t_max")
    n_steps = int(math.floor(t_max / step + 1e-9))
    beta, gamma, n = p.beta, p.gamma, p.population
    out = np.empty((n_steps + 1, 3))
    y = np.array([p.s0, p.i0, p.r0_init], dtype=float)
    out[0] = y
    h = step
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(1, n_steps + 1):
            k1 = _rhs(y, beta, gamma, n)
            k2 = _rhs(y + 0.5 * h * k1, beta, gamma, n)
            k3 = _rhs(y + 0.5 * h * k2, beta, gamma, n)
            k4 = _rhs(y + h * k3, beta, gamma, n)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(y)):
                raise StepTooLarge(f"solution blew up at t = {j * step:g}; shrink the step")
            out[j] = y
    times = np.arange(n_steps + 1) * step
    traj = SirTrajectory(times, out[:, 0].copy(), out[:, 1].copy(), out[:, 2].copy())

    drift = traj.conservation_drift(n)
    if drift > CONSERVATION_TOL:
        raise StepTooLarge(f"conservation drift {drift:.3g} exceeds {CONSERVATION_TOL:g}; shrink the step")
    if out.min() < -NEGATIVITY_TOL * n:
        raise StepTooLarge(f"compartment went negative ({out.min():.3g}); shrink the step")
    slack = NEGATIVITY_TOL * n
    if np.any(np.diff(traj.s) > slack) or np.any(np.diff(traj.r) < -slack):
        raise StepTooLarge("S must not increase and R must not decrease; shrink the step")
    return traj


def final_size_residual(r0: float, s_inf_fraction: float, s0_fraction: float = 1.0) -> float:
    """Residual of ``s_inf = s0 * exp(-R0 (1 - s_inf))`` with fractions of N.

    The usual textbook form takes ``s0_fraction = 1``.
    """
    return s_inf_fraction - s0_fraction * math.exp(-r0 * (1.0 - s_inf_fraction))


@dataclass(frozen=True)
class ThresholdReport:
    r0: float
    effective_r0: float
    outbreak_grows: bool
    behavioral_regime: RegimeClass
    aligned: bool


def _side(x: float, tol: float) -> int:
    if abs(x - 1.0) <= tol:
        return 0
    return 1 if x > 1.0 else -1


def threshold_report(p: SirParams, behavioral_r: float, tol: float = DEFAULT_TOLERANCE) -> ThresholdReport:
    """Compare which side of 1 the SIR growth number and the behavioural ratio fall on.

    Only the sides are compared; no numerical mapping between the two is implied.
    """
    r0 = basic_reproduction_number(p)
    effective = r0 * p.s0 / p.population
    regime = classify_regime(behavioral_r, tol)
    aligned = _side(effective, tol) == _side(behavioral_r, tol)
    return ThresholdReport(r0, effective, effective > 1.0, regime, aligned)
