"""Scenario files, reports, parameter sweeps and lever analysis.

Scenario files are line-oriented ``key = value`` text; ``#`` starts a
comment.  Recognised keys::

    label, w, b, alpha, q, d, alpha_schedule, q_schedule, response, graph, seed_node

Schedules and the response table are comma-separated reals.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import analytic as an
from .analytic import DEFAULT_TOLERANCE, DepthSchedule, ModelParams, Regime
from .errors import (DivergentHorizon, InfeasibleLever, ModelOverflow, ScenarioParseError,
                     ValidationError)
from .graph import WeightedDigraph, check_seed, graph_total, load_edgelist, neumann_convergent
from .simulate import Comparison, SimConfig, SimResult, compare_to_analytic, simulate_branching, \
    simulate_graph_cascade

SCENARIO_KEYS = ("label", "w", "b", "alpha", "q", "d", "alpha_schedule", "q_schedule", "response",
                 "graph", "seed_node")
_REQUIRED = ("b", "alpha", "q", "d")
_LIST_KEYS = ("alpha_schedule", "q_schedule", "response")
_KEY_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
DEFAULT_LABEL = "scenario"
CAPTURE_KS = (1, 3, 5)
DEFAULT_MAX_ROWS = 1_000_000


@dataclass(frozen=True)
class ScenarioSpec:
    params: ModelParams
    label: str = DEFAULT_LABEL
    alpha_schedule: tuple[float, ...] | None = None
    q_schedule: tuple[float, ...] | None = None
    response: tuple[float, ...] | None = None
    graph_path: str | None = None
    seed_node: int | None = None

    def __post_init__(self):
        check_label(self.label)
        if (self.graph_path is None) != (self.seed_node is None):
            raise ValidationError("graph and seed_node must be given together", key="seed_node")
        if self.seed_node is not None and (isinstance(self.seed_node, bool) or self.seed_node < 0):
            raise ValidationError("seed_node must be a nonnegative integer", key="seed_node")
        sched = self.schedule()
        if sched is not None:
            sched.check_covers(self.params.d)

    @property
    def has_schedule(self) -> bool:
        return any(x is not None for x in (self.alpha_schedule, self.q_schedule, self.response))

    def schedule(self) -> DepthSchedule | None:
        """Depth schedule with missing parts filled from the constant parameters."""
        if not self.has_schedule:
            return None
        n = self.params.d - 1
        alpha = self.alpha_schedule if self.alpha_schedule is not None else (self.params.alpha,) * n
        q = self.q_schedule if self.q_schedule is not None else (self.params.q,) * n
        return DepthSchedule(alpha, q, self.response)

    def replace(self, **changes) -> "ScenarioSpec":
        fields_ = {k: getattr(self, k) for k in ("params", "label", "alpha_schedule", "q_schedule",
                                                   "response", "graph_path", "seed_node")}
        fields_.update(changes)
        return ScenarioSpec(**fields_)


def check_label(label: str) -> str:
    if not isinstance(label, str) or not label or label != label.strip() or any(c in label for c in "#\n\r"):
        raise ValidationError("label must be non-empty, single-line, without '#' or surrounding spaces",
                              key="label")
    return label


# --------------------------------------------------------------------- parsing / writing

def _parse_real(key: str, text: str, line: int, col: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ScenarioParseError(f"{key}: expected a real number, got {text!r}", line, col, key) from None
    if not math.isfinite(value):
        raise ScenarioParseError(f"{key}: value must be finite", line, col, key)
    return value


def _parse_list(key: str, text: str, line: int, col: int) -> tuple[float, ...]:
    if not text:
        return ()  # a d = 1 schedule has no entries
    items = text.split(",")
    values = []
    offset = col
    for item in items:
        stripped = item.strip()
        if not stripped:
            raise ScenarioParseError(f"{key}: empty list entry", line, offset, key)
        values.append(_parse_real(key, stripped, line, offset + item.index(stripped)))
        offset += len(item) + 1
    return tuple(values)


def _parse_int(key: str, text: str, line: int, col: int) -> int:
    if not re.fullmatch(r"[+-]?\d+", text):
        raise ScenarioParseError(f"{key}: expected an integer, got {text!r}", line, col, key)
    return int(text)


def parse_scenario(text: str) -> ScenarioSpec:
    """Parse and fully validate scenario text.

    Syntax problems raise :class:`ScenarioParseError` with line and column;
    domain violations raise it too, naming the offending key.
    """
    raw: dict[str, tuple[str, int, int]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            col = len(body) - len(body.lstrip()) + 1
            raise ScenarioParseError("expected 'key = value'", lineno, col)
        key_part, value_part = body.split("=", 1)
        key = key_part.strip()
        key_col = len(key_part) - len(key_part.lstrip()) + 1
        if not _KEY_RE.match(key):
            raise ScenarioParseError(f"malformed key {key!r}", lineno, key_col)
        if key not in SCENARIO_KEYS:
            raise ScenarioParseError(f"unknown key {key!r}", lineno, key_col, key)
        if key in raw:
            raise ScenarioParseError(f"duplicate key {key!r} (first on line {raw[key][1]})", lineno, key_col, key)
        value = value_part.strip()
        value_col = len(key_part) + 2 + (len(value_part) - len(value_part.lstrip()))
        if not value and key not in _LIST_KEYS:
            raise ScenarioParseError(f"{key}: missing value", lineno, value_col, key)
        raw[key] = (value, lineno, value_col)

    last_line = max((v[1] for v in raw.values()), default=1)
    for key in _REQUIRED:
        if key not in raw:
            raise ScenarioParseError(f"missing required key {key!r}", last_line, 1, key)

    def real(key, default=None):
        if key not in raw:
            return default
        return _parse_real(key, *raw[key])

    def lst(key):
        return _parse_list(key, *raw[key]) if key in raw else None

    values = {
        "w": real("w", 1.0), "b": real("b"), "alpha": real("alpha"), "q": real("q"),
        "d": _parse_int("d", *raw["d"]),
    }
    try:
        params = ModelParams(**values)
    except ValidationError as exc:
        line, col = raw.get(exc.key, ("", last_line, 1))[1:]
        raise ScenarioParseError(str(exc), line, col, exc.key) from None

    seed_node = _parse_int("seed_node", *raw["seed_node"]) if "seed_node" in raw else None
    kwargs = dict(
        params=params,
        label=raw["label"][0] if "label" in raw else DEFAULT_LABEL,
        alpha_schedule=lst("alpha_schedule"),
        q_schedule=lst("q_schedule"),
        response=lst("response"),
        graph_path=raw["graph"][0] if "graph" in raw else None,
        seed_node=seed_node,
    )
    try:
        return ScenarioSpec(**kwargs)
    except ValidationError as exc:
        key = exc.key
        if key == "seed_node" and "seed_node" not in raw:
            key = "graph"
        line, col = raw.get(key, ("", last_line, 1))[1:]
        raise ScenarioParseError(str(exc), line, col, key) from None


def _fmt_list(values: Sequence[float]) -> str:
    return ",".join(repr(float(v)) for v in values)


def write_scenario(spec: ScenarioSpec) -> str:
    """Serialise a spec so that ``parse_scenario`` reproduces it exactly."""
    p = spec.params
    lines = [
        f"label = {spec.label}",
        f"w = {p.w!r}",
        f"b = {p.b!r}",
        f"alpha = {p.alpha!r}",
        f"q = {p.q!r}",
        f"d = {p.d}",
    ]
    if spec.alpha_schedule is not None:
        lines.append(f"alpha_schedule = {_fmt_list(spec.alpha_schedule)}")
    if spec.q_schedule is not None:
        lines.append(f"q_schedule = {_fmt_list(spec.q_schedule)}")
    if spec.response is not None:
        lines.append(f"response = {_fmt_list(spec.response)}")
    if spec.graph_path is not None:
        if "#" in spec.graph_path or spec.graph_path != spec.graph_path.strip() or "\n" in spec.graph_path:
            raise ValidationError("graph path cannot be written to a scenario file", key="graph")
        lines.append(f"graph = {spec.graph_path}")
        lines.append(f"seed_node = {spec.seed_node}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------- presets and loading

def preset_names() -> list[str]:
    root = resources.files("netimpact") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".scn"))


def preset_text(name: str) -> str:
    path = resources.files("netimpact") / "presets" / f"{name}.scn"
    if not path.is_file():
        raise ValidationError(f"unknown preset {name!r}; available: {', '.join(preset_names())}", key="preset")
    return path.read_text(encoding="utf-8")


def preset_description(name: str) -> str:
    """First comment line of a preset file."""
    for line in preset_text(name).splitlines():
        if line.startswith("#"):
            return line.lstrip("# ").strip()
    return ""


@dataclass(frozen=True)
class LoadedScenario:
    spec: ScenarioSpec
    base_dir: Path | None  # directory that relative graph paths resolve against

    def graph_file(self) -> Path | None:
        if self.spec.graph_path is None:
            return None
        path = Path(self.spec.graph_path)
        if not path.is_absolute() and self.base_dir is not None:
            path = self.base_dir / path
        return path


def load_scenario(source: str | os.PathLike) -> LoadedScenario:
    """Load a scenario from a file path, or from a shipped preset name."""
    path = Path(source)
    if path.is_file():
        return LoadedScenario(parse_scenario(path.read_text(encoding="utf-8")), path.parent)
    name = str(source)
    if name.startswith("preset:"):
        name = name[len("preset:"):]
    if name in preset_names():
        return LoadedScenario(parse_scenario(preset_text(name)), None)
    raise FileNotFoundError(f"no scenario file or preset named {str(source)!r}")


def load_graph_for(loaded: LoadedScenario) -> WeightedDigraph | None:
    path = loaded.graph_file()
    if path is None:
        return None
    g = load_edgelist(path)
    check_seed(g, loaded.spec.seed_node)
    return g


# --------------------------------------------------------------------- single-scenario report

@dataclass(frozen=True)
class GraphSection:
    seed_node: int
    nodes: int
    arcs: int
    total: float | None
    rho: float
    margin: float
    convergent: bool
    overflow: float | None = None


@dataclass(frozen=True)
class ScenarioReport:
    label: str
    params: ModelParams
    r: float
    regime: Regime
    tolerance: float
    total: float | None
    multiplier: float | None
    dyadic: float
    multiplier_inf: float | None
    total_inf: float | None
    overflow: float | None
    hops: an.HopBreakdown | None
    capture: dict[int, float] = field(default_factory=dict)
    scheduled_total: float | None = None
    graph: GraphSection | None = None


def run_scenario(spec: ScenarioSpec, tol: float = DEFAULT_TOLERANCE,
                 graph: WeightedDigraph | None = None) -> ScenarioReport:
    """Closed-form report for one scenario, plus the walk-sum section when a graph is given."""
    p = spec.params
    r = an.effective_ratio(p)
    regime = an.classify_regime(r, tol).regime
    overflow = None
    try:
        total = an.total_responsibility(p)
        multiplier = an.network_multiplier(p)
        hops = an.hop_breakdown(p)
    except ModelOverflow as exc:
        total = multiplier = hops = None
        overflow = exc.log_magnitude
    try:
        m_inf = an.infinite_horizon_multiplier(r, tol)
        t_inf = an.dyadic_baseline(p) * m_inf
    except DivergentHorizon:
        m_inf = t_inf = None
    capture = {}
    for k in CAPTURE_KS:
        if k <= p.d:
            try:
                capture[k] = an.capture_share_first_k(r, p.d, k)
            except ModelOverflow:
                pass
    scheduled = None
    sched = spec.schedule()
    if sched is not None:
        scheduled = an.total_with_schedules(p.w, p.b, p.d, sched)

    section = None
    if graph is not None:
        seed = check_seed(graph, spec.seed_node if spec.seed_node is not None else 0)
        check = neumann_convergent(p.alpha, p.q, graph, tol)
        g_over = None
        try:
            g_total = graph_total(p.w, p.alpha, p.q, graph, seed, p.d)
        except ModelOverflow as exc:
            g_total, g_over = None, exc.log_magnitude
        section = GraphSection(seed, graph.n, graph.num_arcs, g_total, check.spectral.rho, check.margin,
                               check.convergent, g_over)

    return ScenarioReport(spec.label, p, r, regime, tol, total, multiplier, an.dyadic_baseline(p), m_inf,
                          t_inf, overflow, hops, capture, scheduled, section)


def fmt6(x: float | None) -> str:
    return "-" if x is None else f"{x:.6g}"


def fmt_exact(x) -> str:
    """Shortest round-trip text for CSV cells; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def format_report(rep: ScenarioReport) -> str:
    p = rep.params
    out = [
        f"scenario: {rep.label}",
        f"  w={fmt6(p.w)}  b={fmt6(p.b)}  alpha={fmt6(p.alpha)}  q={fmt6(p.q)}  d={p.d}",
        f"  effective ratio r = b*alpha*q = {fmt6(rep.r)}  ->  {rep.regime.value}",
        f"  dyadic baseline T_dyad = {fmt6(rep.dyadic)}",
    ]
    if rep.overflow is not None:
        out.append(f"  total T overflows float range (d*log r = {fmt6(rep.overflow)})")
    else:
        out.append(f"  total T = {fmt6(rep.total)}")
        out.append(f"  multiplier M = {fmt6(rep.multiplier)}")
    if rep.multiplier_inf is not None:
        out.append(f"  infinite-horizon M_inf = {fmt6(rep.multiplier_inf)}  (T_inf = {fmt6(rep.total_inf)})")
    else:
        out.append("  infinite-horizon multiplier diverges (r >= 1)")
    if rep.scheduled_total is not None:
        out.append(f"  total with depth schedules = {fmt6(rep.scheduled_total)}")
    if rep.capture:
        shares = "  ".join(f"K={k}: {fmt6(v)}" for k, v in rep.capture.items())
        out.append(f"  capture share of first K hops: {shares}")
    if rep.hops is not None:
        out.append("")
        out.append(f"  {'k':>4} {'count C_k':>14} {'impact/agent':>14} {'layer total':>14}")
        for layer in rep.hops.per_depth:
            out.append(f"  {layer.k:>4} {fmt6(layer.expected_count):>14} {fmt6(layer.per_agent_impact):>14} "
                       f"{fmt6(layer.layer_total):>14}")
    if rep.graph is not None:
        g = rep.graph
        out.append("")
        out.append(f"  graph: {g.nodes} nodes, {g.arcs} arcs, seed {g.seed_node}")
        if g.overflow is not None:
            out.append(f"  walk-sum total overflows (log-magnitude {fmt6(g.overflow)})")
        else:
            out.append(f"  walk-sum total = {fmt6(g.total)}")
        verdict = "convergent" if g.convergent else "divergent"
        out.append(f"  spectral radius rho(A) = {fmt6(g.rho)}; Neumann margin alpha*q*rho = {fmt6(g.margin)} "
                   f"({verdict})")
    return "\n".join(out) + "\n"


ANALYZE_COLUMNS = ("label", "w", "b", "alpha", "q", "d", "r", "regime", "T", "M", "T_dyad", "M_inf", "T_inf",
                   "overflow")
SWEEP_COLUMNS = ("label", "w", "b", "alpha", "q", "d", "r", "regime", "T", "M", "overflow")


def report_row(rep: ScenarioReport) -> dict:
    p = rep.params
    return {
        "label": rep.label, "w": p.w, "b": p.b, "alpha": p.alpha, "q": p.q, "d": p.d, "r": rep.r,
        "regime": rep.regime.value, "T": rep.total, "M": rep.multiplier, "T_dyad": rep.dyadic,
        "M_inf": rep.multiplier_inf, "T_inf": rep.total_inf, "overflow": rep.overflow,
    }


def write_csv(rows: Iterable[dict], columns: Sequence[str], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt_exact(row.get(c)) for c in columns])


def analyze_csv(reports: Iterable[ScenarioReport]) -> str:
    buf = io.StringIO()
    write_csv((report_row(r) for r in reports), ANALYZE_COLUMNS, buf)
    return buf.getvalue()


# --------------------------------------------------------------------- sweeps

_AXIS_NAMES = ("w", "b", "alpha", "q", "d")
_VALIDATORS = {
    "w": lambda v: an._check_real("w", v),
    "b": an.check_b,
    "alpha": an.check_alpha,
    "q": an.check_q,
    "d": an._check_depth,
}


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple

    def __post_init__(self):
        if self.name not in _AXIS_NAMES:
            raise ValidationError(f"unknown sweep parameter {self.name!r}; choose from {_AXIS_NAMES}", key="axis")
        if not self.values:
            raise ValidationError(f"axis {self.name} has no values", key=self.name)
        values = []
        for v in self.values:
            if self.name == "d":
                if isinstance(v, float):
                    if not v.is_integer():
                        raise ValidationError(f"d axis value {v!r} is not an integer", key="d")
                    v = int(v)
            values.append(_VALIDATORS[self.name](v))
        object.__setattr__(self, "values", tuple(values))

    @classmethod
    def linear(cls, name: str, start: float, stop: float, count: int) -> "Axis":
        if count < 1:
            raise ValidationError("grid count must be >= 1", key=name)
        if count == 1:
            return cls(name, (float(start),))
        return cls(name, tuple(float(v) for v in np.linspace(start, stop, count)))

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """``name=start:stop:count`` or ``name=v1,v2,...``."""
        if "=" not in text:
            raise ValidationError(f"axis must look like name=values, got {text!r}", key="axis")
        name, spec = (s.strip() for s in text.split("=", 1))
        try:
            if ":" in spec:
                parts = spec.split(":")
                if len(parts) != 3:
                    raise ValueError
                return cls.linear(name, float(parts[0]), float(parts[1]), int(parts[2]))
            conv = int if name == "d" else float
            return cls(name, tuple(conv(v) for v in spec.split(",")))
        except ValueError:
            raise ValidationError(f"cannot parse axis values {spec!r}", key=name) from None


@dataclass(frozen=True)
class SweepSpec:
    base: ScenarioSpec
    axes: tuple[Axis, ...]
    max_rows: int = DEFAULT_MAX_ROWS

    def __post_init__(self):
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValidationError("each parameter may appear on one axis only", key="axis")
        if self.size > self.max_rows:
            raise ValidationError(f"sweep grid has {self.size} rows, above the cap of {self.max_rows}",
                                  key="max_rows")

    @property
    def size(self) -> int:
        return math.prod(len(a.values) for a in self.axes)


def sweep_rows(spec: SweepSpec, tol: float = DEFAULT_TOLERANCE) -> Iterator[dict]:
    """One row per grid point, first axis outermost."""
    base = spec.base.params
    names = [a.name for a in spec.axes]
    for combo in itertools.product(*(a.values for a in spec.axes)):
        p = base.replace(**dict(zip(names, combo)))
        r = an.effective_ratio(p)
        row = {"label": spec.base.label, "w": p.w, "b": p.b, "alpha": p.alpha, "q": p.q, "d": p.d, "r": r,
               "regime": an.classify_regime(r, tol).regime.value, "T": None, "M": None, "overflow": None}
        try:
            row["T"] = an.total_responsibility(p)
            row["M"] = an.network_multiplier(p)
        except ModelOverflow as exc:
            row["T"] = row["M"] = None
            row["overflow"] = exc.log_magnitude
        yield row


def sweep_grid(spec: SweepSpec, stream=None, tol: float = DEFAULT_TOLERANCE) -> str | None:
    """Write the sweep as CSV to ``stream``; return the text when no stream is given."""
    buf = stream if stream is not None else io.StringIO()
    write_csv(sweep_rows(spec, tol), SWEEP_COLUMNS, buf)
    return None if stream is not None else buf.getvalue()


# --------------------------------------------------------------------- levers

@dataclass(frozen=True)
class LeverResult:
    name: str
    current: float
    critical_value: float | None
    status: str  # "already subcritical", "at threshold", "feasible", "infeasible"


@dataclass(frozen=True)
class LeverReport:
    label: str
    r: float
    regime: Regime
    levers: tuple[LeverResult, ...]
    budget: float | None = None
    max_depth: int | None = None  # largest d with M_d <= budget; None = every depth fits
    depth_note: str = ""


def lever_report(spec: ScenarioSpec, budget: float | None = None, tol: float = DEFAULT_TOLERANCE) -> LeverReport:
    """Critical value of each of ``b``, ``alpha``, ``q`` with the others held fixed, and a depth cap.

    Infeasible targets are reported, never raised.
    """
    p = spec.params
    r = an.effective_ratio(p)
    regime = an.classify_regime(r, tol).regime
    current = {"b": p.b, "alpha": p.alpha, "q": p.q}
    levers = []
    for name in ("b", "alpha", "q"):
        others = {k: v for k, v in current.items() if k != name}
        try:
            _, value = an.solve_critical_lever(**others)
            feasible = True
        except InfeasibleLever as exc:
            value = exc.value if math.isfinite(exc.value) else None
            feasible = False
        if regime is Regime.SUBCRITICAL:
            status = "already subcritical"
        elif regime is Regime.CRITICAL:
            status = "at threshold"
        else:
            status = "feasible" if feasible else "infeasible"
        levers.append(LeverResult(name, current[name], value, status))

    max_depth, note = None, ""
    if budget is not None:
        max_depth = an.max_depth_within_budget(r, budget)
        if max_depth is None:
            note = "every horizon stays within budget"
        elif max_depth == 0:
            note = "budget is below the dyadic baseline; no horizon fits"
        else:
            note = f"cap depth at d <= {max_depth}"
    return LeverReport(spec.label, r, regime, tuple(levers), budget, max_depth, note)


def format_lever_report(rep: LeverReport) -> str:
    out = [f"scenario: {rep.label}", f"  r = {fmt6(rep.r)} ({rep.regime.value})",
           f"  {'lever':>6} {'current':>10} {'critical':>10}  status"]
    for lv in rep.levers:
        out.append(f"  {lv.name:>6} {fmt6(lv.current):>10} {fmt6(lv.critical_value):>10}  {lv.status}")
    if rep.budget is not None:
        shown = "unbounded" if rep.max_depth is None else str(rep.max_depth)
        out.append(f"  multiplier budget {fmt6(rep.budget)}: max depth {shown} ({rep.depth_note})")
    return "\n".join(out) + "\n"


LEVER_COLUMNS = ("label", "lever", "current", "critical", "status", "budget", "max_depth")


def lever_rows(rep: LeverReport) -> list[dict]:
    return [{"label": rep.label, "lever": lv.name, "current": lv.current, "critical": lv.critical_value,
             "status": lv.status, "budget": rep.budget, "max_depth": rep.max_depth} for lv in rep.levers]


# --------------------------------------------------------------------- simulation

@dataclass(frozen=True)
class SimulationReport:
    label: str
    mode: str  # "branching" or "graph"
    result: SimResult
    analytic: float
    comparison: Comparison


def simulate_command(spec: ScenarioSpec, cfg: SimConfig, graph: WeightedDigraph | None = None) -> SimulationReport:
    """Run the matching simulator and compare it with the analytic expectation."""
    p = spec.params
    if graph is None:
        sim = simulate_branching(p, cfg)
        analytic = an.total_responsibility(p)
        mode = "branching"
    else:
        seed = spec.seed_node if spec.seed_node is not None else 0
        sim = simulate_graph_cascade(graph, p.w, p.alpha, p.q, seed, p.d, cfg)
        analytic = graph_total(p.w, p.alpha, p.q, graph, seed, p.d)
        mode = "graph"
    return SimulationReport(spec.label, mode, sim, analytic, compare_to_analytic(sim, analytic))


def format_simulation(rep: SimulationReport) -> str:
    s = rep.result
    ref = "closed-form total" if rep.mode == "branching" else "walk-sum bound"
    out = [
        f"scenario: {rep.label} ({rep.mode} simulation, {s.trials} trials)",
        f"  mean = {fmt6(s.mean)}  std error = {fmt6(s.std_error)}  CI = [{fmt6(s.ci_low)}, {fmt6(s.ci_high)}]",
        f"  truncated trials = {s.trials_truncated}",
        f"  {ref} = {fmt6(rep.analytic)}  z = {fmt6(rep.comparison.z_score)}  -> {rep.comparison.verdict()}",
        "  per-depth mean counts: " + ", ".join(fmt6(c) for c in s.per_depth_mean_counts),
    ]
    return "\n".join(out) + "\n"


SIM_COLUMNS = ("label", "mode", "trials", "mean", "std_error", "ci_low", "ci_high", "trials_truncated",
               "analytic", "z_score", "verdict")


def simulation_row(rep: SimulationReport) -> dict:
    s = rep.result
    return {"label": rep.label, "mode": rep.mode, "trials": s.trials, "mean": s.mean, "std_error": s.std_error,
            "ci_low": s.ci_low, "ci_high": s.ci_high, "trials_truncated": s.trials_truncated,
            "analytic": rep.analytic, "z_score": rep.comparison.z_score, "verdict": rep.comparison.verdict()}
