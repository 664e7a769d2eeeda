"""Closed-form evaluation of the branching diffusion model.

An initiating act of valence ``w`` reaches ``b`` agents at depth 1.  Every
further layer forms with expected factor ``b*q`` and each agent at depth
``k`` carries impact ``w * alpha**(k-1)``.  The expected total over ``d``
hops is a geometric series in the effective ratio ``r = b*alpha*q``::

    T = w * b * sum_{j<d} r**j = w * b * M

where ``M`` is the network multiplier relative to the dyadic baseline
``w * b``.
"""

from __future__ import annotations

import enum
import math
import numbers
from fractions import Fraction
from dataclasses import dataclass
from typing import Sequence

from .errors import DivergentHorizon, InfeasibleLever, ModelOverflow, ValidationError

DEFAULT_TOLERANCE = 1e-9

# |1 - r| below this is summed term by term; the closed form divides by 1 - r.
NEAR_CRITICAL = 1e-9
# Between NEAR_CRITICAL and this band the expm1/log1p form avoids cancellation.
_CANCELLATION_BAND = 1e-2


def _check_real(name: str, value, *, finite: bool = True) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ValidationError(f"{name} must be a real number, got {value!r}", key=name)
    value = float(value)
    if math.isnan(value) or (finite and math.isinf(value)):
        raise ValidationError(f"{name} must be finite, got {value!r}", key=name)
    return value


def _check_depth(d, name: str = "d") -> int:
    if isinstance(d, bool) or not isinstance(d, numbers.Integral):
        raise ValidationError(f"{name} must be an integer, got {d!r}", key=name)
    if d < 1:
        raise ValidationError(f"{name} must be >= 1, got {d}", key=name)
    return int(d)


def check_b(b) -> float:
    b = _check_real("b", b)
    if b < 1.0:
        raise ValidationError(f"b must be >= 1, got {b!r}", key="b")
    return b


def check_alpha(alpha, name: str = "alpha") -> float:
    alpha = _check_real(name, alpha)
    if not 0.0 < alpha <= 1.0:
        raise ValidationError(f"{name} must lie in (0, 1], got {alpha!r}", key=name)
    return alpha


def check_q(q, name: str = "q") -> float:
    q = _check_real(name, q)
    if not 0.0 <= q <= 1.0:
        raise ValidationError(f"{name} must lie in [0, 1], got {q!r}", key=name)
    return q


@dataclass(frozen=True)
class ModelParams:
    """Valence ``w``, branching ``b``, attenuation ``alpha``, compliance ``q``, horizon ``d``."""

    w: float
    b: float
    alpha: float
    q: float
    d: int

    def __post_init__(self):
        object.__setattr__(self, "w", _check_real("w", self.w))
        object.__setattr__(self, "b", check_b(self.b))
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        object.__setattr__(self, "q", check_q(self.q))
        object.__setattr__(self, "d", _check_depth(self.d))

    @property
    def ratio(self) -> float:
        return effective_ratio(self)

    def replace(self, **changes) -> "ModelParams":
        fields = {"w": self.w, "b": self.b, "alpha": self.alpha, "q": self.q, "d": self.d}
        fields.update(changes)
        return ModelParams(**fields)


class Regime(str, enum.Enum):
    SUBCRITICAL = "Subcritical"
    CRITICAL = "Critical"
    SUPERCRITICAL = "Supercritical"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class RegimeClass:
    regime: Regime
    tolerance: float

    def __str__(self) -> str:
        return self.regime.value


def effective_ratio(p: ModelParams) -> float:
    """Return ``r = b * alpha * q``, correctly rounded from the exact product of the three floats."""
    return float(Fraction(p.b) * Fraction(p.alpha) * Fraction(p.q))


def _check_ratio(r) -> float:
    r = _check_real("r", r)
    if r < 0:
        raise ValidationError(f"r must be >= 0, got {r!r}", key="r")
    return r


def classify_regime(r: float, tol: float = DEFAULT_TOLERANCE) -> RegimeClass:
    r = _check_ratio(r)
    tol = _check_real("tol", tol)
    if tol < 0:
        raise ValidationError("tol must be >= 0", key="tol")
    if abs(r - 1.0) <= tol:
        regime = Regime.CRITICAL
    elif r < 1.0:
        regime = Regime.SUBCRITICAL
    else:
        regime = Regime.SUPERCRITICAL
    return RegimeClass(regime, tol)


def _direct_geometric_sum(r: float, d: int) -> float:
    return math.fsum(r**j for j in range(d))


def geometric_sum(r: float, d: int) -> float:
    """Return ``sum_{j<d} r**j`` for ``r >= 0``.

    Raises :class:`ModelOverflow` carrying ``d*log(r)`` when the sum does not
    fit in a float.
    """
    if r == 1.0:
        return float(d)
    gap = r - 1.0
    if abs(gap) < NEAR_CRITICAL:
        return _direct_geometric_sum(r, d)
    try:
        if abs(gap) < _CANCELLATION_BAND:
            total = math.expm1(d * math.log1p(gap)) / gap
        else:
            total = (r**d - 1.0) / gap
    except OverflowError:
        raise ModelOverflow(d * math.log(r)) from None
    if not math.isfinite(total):
        raise ModelOverflow(d * math.log(r))
    return total


def _scaled(scale: float, m: float, r: float, d: int) -> float:
    value = scale * m
    if not math.isfinite(value):
        log_mag = d * math.log(r) if r > 1.0 else math.log(abs(scale)) + math.log(m)
        raise ModelOverflow(log_mag)
    return value


def network_multiplier(p: ModelParams) -> float:
    """Total impact divided by the dyadic baseline; ``d`` at criticality."""
    return geometric_sum(effective_ratio(p), p.d)


def total_responsibility(p: ModelParams) -> float:
    """Expected total impact ``w*b*M`` attributable to the initiator over ``d`` hops."""
    r = effective_ratio(p)
    return _scaled(p.w * p.b, geometric_sum(r, p.d), r, p.d)


def dyadic_baseline(p: ModelParams) -> float:
    return p.w * p.b


def infinite_horizon_multiplier(r: float, tol: float = DEFAULT_TOLERANCE) -> float:
    """Limit of the multiplier as ``d -> inf``; only defined for subcritical ``r``."""
    r = _check_ratio(r)
    if r >= 1.0 - tol:
        raise DivergentHorizon(f"multiplier diverges as d -> inf for r = {r:.6g} >= 1")
    return 1.0 / (1.0 - r)


def infinite_horizon_total(p: ModelParams, tol: float = DEFAULT_TOLERANCE) -> float:
    return dyadic_baseline(p) * infinite_horizon_multiplier(effective_ratio(p), tol)


@dataclass(frozen=True)
class HopLayer:
    k: int
    expected_count: float
    per_agent_impact: float
    layer_total: float


@dataclass(frozen=True)
class HopBreakdown:
    per_depth: tuple[HopLayer, ...]
    total: float

    def layer_totals(self) -> list[float]:
        return [layer.layer_total for layer in self.per_depth]


def hop_breakdown(p: ModelParams) -> HopBreakdown:
    """Per-depth expected counts ``b**k q**(k-1)`` and their impact contributions."""
    layers = []
    aq = p.alpha * p.q
    r = effective_ratio(p)
    for k in range(1, p.d + 1):
        try:
            count = p.b**k * p.q ** (k - 1)
            layer_total = p.w * p.b**k * aq ** (k - 1)
        except OverflowError:
            raise ModelOverflow(p.d * math.log(r)) from None
        if not (math.isfinite(count) and math.isfinite(layer_total)):
            raise ModelOverflow(p.d * math.log(r))
        layers.append(HopLayer(k, count, p.w * p.alpha ** (k - 1), layer_total))
    return HopBreakdown(tuple(layers), total_responsibility(p))


def capture_share_first_k(r: float, d: int | None, k: int) -> float:
    """Fraction of the total carried by hops ``1..k``.

    ``d=None`` requests the infinite-horizon share ``1 - r**k`` (subcritical only).
    """
    r = _check_ratio(r)
    k = _check_depth(k, "K")
    if d is None:
        if r >= 1.0:
            raise DivergentHorizon(f"infinite-horizon share undefined for r = {r:.6g} >= 1")
        return -math.expm1(k * math.log(r)) if r > 0 else 1.0
    d = _check_depth(d)
    if k > d:
        raise ValidationError(f"K must satisfy 1 <= K <= d, got K={k}, d={d}", key="K")
    if k == d:
        return 1.0
    if r == 1.0:
        return k / d
    return geometric_sum(r, k) / geometric_sum(r, d)


def remaining_share_after_k(r: float, d: int, k: int) -> float:
    """Fraction of the total carried by hops ``k+1..d`` (complement of the first-k share)."""
    r = _check_ratio(r)
    d = _check_depth(d)
    k = _check_depth(k, "K")
    if k > d:
        raise ValidationError(f"K must satisfy 1 <= K <= d, got K={k}, d={d}", key="K")
    if k == d:
        return 0.0
    return r**k * geometric_sum(r, d - k) / geometric_sum(r, d)


def tail_share_last_k(r: float, d: int | None, k: int) -> float:
    """Fraction of the total carried by the last ``k`` layers when ``r > 1``.

    ``d=None`` returns the large-horizon limit ``1 - r**-k``.
    """
    r = _check_ratio(r)
    k = _check_depth(k, "K")
    if r <= 1.0:
        raise ValidationError(f"tail share is defined for r > 1 only, got r = {r!r}", key="r")
    if d is None:
        return -math.expm1(-k * math.log(r))
    d = _check_depth(d)
    if k > d:
        raise ValidationError(f"K must satisfy 1 <= K <= d, got K={k}, d={d}", key="K")
    # (r^d - r^(d-K)) / (r^d - 1), rewritten to stay finite for large d
    return -math.expm1(-k * math.log(r)) / -math.expm1(-d * math.log(r))


def critical_perturbation_estimate(d: int, eps: float) -> tuple[float, float]:
    """Multiplier at ``r = 1 + eps``: the exact value and its second-order approximation.

    The approximation ``d + d(d-1)eps/2`` is meant for ``|eps|*d < 0.5``.
    """
    d = _check_depth(d)
    eps = _check_real("eps", eps)
    if eps <= -1.0:
        raise ValidationError("eps must exceed -1 (ratio must stay positive)", key="eps")
    if eps == 0.0:
        exact = float(d)
    else:
        exact = math.expm1(d * math.log1p(eps)) / eps
    approx = d + d * (d - 1) * eps / 2.0
    return exact, approx


def reach_count(b: float, q: float, d: int) -> float:
    """Expected number of agents reached within ``d`` hops, ignoring attenuation."""
    b = check_b(b)
    q = check_q(q)
    d = _check_depth(d)
    bq = b * q
    return _scaled(b, geometric_sum(bq, d), bq, d)


@dataclass(frozen=True)
class DepthSchedule:
    """Depth-dependent attenuation and compliance.

    ``alpha[i]`` and ``q[i]`` are the factors applied between depth ``i+1``
    and ``i+2``.  ``response[k-1]``, when given, replaces the cumulative
    attenuation at depth ``k``.
    """

    alpha: tuple[float, ...]
    q: tuple[float, ...]
    response: tuple[float, ...] | None = None

    def __post_init__(self):
        alpha = tuple(check_alpha(a, "alpha_schedule") for a in self.alpha)
        q = tuple(check_q(x, "q_schedule") for x in self.q)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "q", q)
        if self.response is not None:
            response = tuple(_check_real("response", f) for f in self.response)
            if any(f <= 0 for f in response):
                raise ValidationError("response values must be positive", key="response")
            # concavity is not checked; monotone non-increase is the only requirement
            if any(b > a for a, b in zip(response, response[1:])):
                raise ValidationError("response must be non-increasing in depth", key="response")
            object.__setattr__(self, "response", response)

    @classmethod
    def constant(cls, alpha: float, q: float, d: int) -> "DepthSchedule":
        n = max(_check_depth(d) - 1, 0)
        return cls((alpha,) * n, (q,) * n)

    def check_covers(self, d: int) -> None:
        need = d - 1
        if len(self.alpha) < need and self.response is None:
            raise ValidationError(f"alpha_schedule has {len(self.alpha)} entries, need {need}",
                                  key="alpha_schedule")
        if len(self.q) < need:
            raise ValidationError(f"q_schedule has {len(self.q)} entries, need {need}", key="q_schedule")
        if self.response is not None and len(self.response) < d:
            raise ValidationError(f"response has {len(self.response)} entries, need {d}", key="response")


def total_with_schedules(w: float, b: float, d: int, sched: DepthSchedule) -> float:
    """Expected total with depth-dependent ``alpha_k``, ``q_k`` and optional response table."""
    w = _check_real("w", w)
    b = check_b(b)
    d = _check_depth(d)
    sched.check_covers(d)
    terms = []
    reach = 1.0  # b^k * prod q_i
    atten = 1.0  # prod alpha_i
    for k in range(1, d + 1):
        if k > 1:
            reach *= sched.q[k - 2]
            if sched.response is None:
                atten *= sched.alpha[k - 2]
        reach *= b
        factor = sched.response[k - 1] if sched.response is not None else atten
        terms.append(reach * factor)
        if reach == 0.0:
            break
    total = w * math.fsum(terms)
    if not math.isfinite(total):
        raise ModelOverflow(math.log(abs(w)) + max(math.log(t) for t in terms if t > 0))
    return total


_LEVER_NAMES = ("b", "alpha", "q")


def solve_critical_lever(*, b: float | None = None, alpha: float | None = None,
                         q: float | None = None) -> tuple[str, float]:
    """Given two of ``b``, ``alpha``, ``q``, solve the third so that ``b*alpha*q == 1``.

    Returns ``(name, value)``.  Raises :class:`InfeasibleLever` when the solved
    value lies outside that parameter's domain; the value is never clamped.
    """
    given = {"b": b, "alpha": alpha, "q": q}
    missing = [name for name, v in given.items() if v is None]
    if len(missing) != 1:
        raise ValidationError("exactly two of b, alpha, q must be given")
    name = missing[0]
    product = 1.0
    for key, v in given.items():
        if key == name:
            continue
        v = _check_real(key, v)
        if v <= 0:
            raise InfeasibleLever(name, math.inf,
                                  f"{key} = {v!r} is not positive; no {name} makes the ratio critical")
        product *= v
    value = 1.0 / product
    if name == "b" and value < 1.0:
        raise InfeasibleLever(name, value)
    if name == "alpha" and not 0.0 < value <= 1.0:
        raise InfeasibleLever(name, value)
    if name == "q" and not 0.0 <= value <= 1.0:
        raise InfeasibleLever(name, value)
    return name, value


def max_depth_within_budget(r: float, budget: float) -> int | None:
    """Largest horizon ``d`` whose multiplier stays within ``budget``.

    Returns ``None`` when every horizon fits (subcritical with
    ``budget >= 1/(1-r)``).  Returns ``0`` when even ``d = 1`` exceeds it.
    """
    r = _check_ratio(r)
    budget = _check_real("budget", budget)
    if budget < 1.0:
        return 0
    if r < 1.0 and budget >= 1.0 / (1.0 - r):
        return None
    if r == 1.0:
        return int(math.floor(budget))
    d, m, term = 1, 1.0, 1.0
    while True:
        term *= r
        if m + term > budget:
            return d
        m += term
        d += 1


__all__: Sequence[str] = (
    "DEFAULT_TOLERANCE", "ModelParams", "Regime", "RegimeClass", "HopLayer", "HopBreakdown",
    "DepthSchedule", "effective_ratio", "classify_regime", "geometric_sum", "network_multiplier",
    "total_responsibility", "dyadic_baseline", "infinite_horizon_multiplier",
    "infinite_horizon_total", "hop_breakdown", "capture_share_first_k", "remaining_share_after_k",
    "tail_share_last_k", "critical_perturbation_estimate", "reach_count", "total_with_schedules",
    "solve_critical_lever", "max_depth_within_budget",
)
