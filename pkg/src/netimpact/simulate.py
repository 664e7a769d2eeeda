"""Seeded Monte Carlo realisations of the cascade.

Two generative models are provided:

* the branching model, whose expectation is the closed-form total, and
* an activate-once (independent cascade) model on an explicit graph, whose
  expectation never exceeds the walk sum.

Each trial draws from its own substream ``SeedSequence(master_seed,
spawn_key=(trial,))`` and trial totals are combined with ``math.fsum``, so
results are bit-identical for any number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytic import ModelParams, _check_depth, _check_real, check_alpha, check_q
from .errors import ValidationError
from .graph import WeightedDigraph, check_seed


@dataclass(frozen=True)
class SimConfig:
    trials: int
    master_seed: int = 0
    max_nodes_per_trial: int = 1_000_000
    confidence_z: float = 1.96
    workers: int = 1

    def __post_init__(self):
        for name in ("trials", "max_nodes_per_trial", "workers"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ValidationError(f"{name} must be an integer >= 1, got {value!r}", key=name)
        if not isinstance(self.master_seed, (int, np.integer)) or not 0 <= self.master_seed < 2**64:
            raise ValidationError("master_seed must be an unsigned 64-bit integer", key="master_seed")
        if not self.confidence_z > 0:
            raise ValidationError("confidence_z must be positive", key="confidence_z")


@dataclass(frozen=True)
class SimResult:
    mean: float
    std_error: float
    ci_low: float
    ci_high: float
    trials: int
    trials_truncated: int
    per_depth_mean_counts: tuple[float, ...]
    per_depth_std_errors: tuple[float, ...] = field(default=(), repr=False)

    @property
    def deterministic(self) -> bool:
        return self.std_error == 0.0

    @property
    def reliable(self) -> bool:
        return self.trials_truncated == 0


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=(int(trial),)))


class _LazyRng:
    """Defers building the trial generator until a draw is needed; deterministic trials skip it."""

    __slots__ = ("_seed", "_trial", "_gen")

    def __init__(self, master_seed: int, trial: int):
        self._seed = master_seed
        self._trial = trial
        self._gen = None

    def __getattr__(self, name):
        if self._gen is None:
            self._gen = trial_rng(self._seed, self._trial)
        return getattr(self._gen, name)


# --------------------------------------------------------------------- single trials

def branching_trial(p: ModelParams, cap: int, rng: np.random.Generator) -> tuple[float, list[int], bool]:
    """One realisation of the branching model.

    Each propagator affects ``floor(b) + Bernoulli(b - floor(b))`` fresh
    agents; depth 1 is reached unconditionally and every affected agent
    becomes a propagator with probability ``q``.  Returns the impact total,
    the per-depth counts and whether the node cap cut the trial short.
    """
    whole = math.floor(p.b)
    frac = p.b - whole
    counts = [0] * p.d
    reached = 0
    truncated = False
    propagators = 1
    for k in range(p.d):
        n_k = propagators * whole
        if frac > 0.0:
            n_k += int(rng.binomial(propagators, frac))
        if reached + n_k > cap:
            n_k = cap - reached
            truncated = True
        counts[k] = n_k
        reached += n_k
        if truncated or k == p.d - 1:
            break
        if p.q == 1.0:
            propagators = n_k
        elif p.q == 0.0:
            propagators = 0
        else:
            propagators = int(rng.binomial(n_k, p.q))
        if propagators == 0:
            break
    total = p.w * math.fsum(p.alpha**k * c for k, c in enumerate(counts) if c)
    return total, counts, truncated


def graph_cascade_trial(successors: list[list[int]], w: float, alpha: float, q: float, seed_node: int,
                        d: int, cap: int, rng: np.random.Generator) -> tuple[float, list[int], bool]:
    """One activate-once cascade from ``seed_node``.

    Out-neighbours of the seed activate unconditionally at hop 1.  A node
    activated at hop ``k`` adds ``w * alpha**(k-1)`` and attempts each of its
    arcs once, succeeding with probability ``q``, to activate still-inactive
    targets at hop ``k + 1``.
    """
    active = bytearray(len(successors))
    active[seed_node] = 1
    counts = [0] * d
    reached = 0
    truncated = False
    frontier = [seed_node]
    for k in range(d):
        nxt = []
        for u in frontier:
            targets = [t for t in successors[u] if not active[t]]
            if not targets:
                continue
            if k > 0 and q < 1.0:
                if q == 0.0:
                    continue
                hits = rng.random(len(targets)) < q
                targets = [t for t, hit in zip(targets, hits) if hit]
            for t in targets:
                if active[t]:
                    continue
                if reached >= cap:
                    truncated = True
                    break
                active[t] = 1
                reached += 1
                nxt.append(t)
            if truncated:
                break
        counts[k] = len(nxt)
        frontier = nxt
        if truncated or not frontier:
            break
    total = w * math.fsum(alpha**k * c for k, c in enumerate(counts) if c)
    return total, counts, truncated


# --------------------------------------------------------------------- batches

def _run_branching_chunk(args):
    p, cap, seed, start, stop = args
    return [branching_trial(p, cap, _LazyRng(seed, i)) for i in range(start, stop)]


def _run_graph_chunk(args):
    successors, w, alpha, q, seed_node, d, cap, seed, start, stop = args
    return [graph_cascade_trial(successors, w, alpha, q, seed_node, d, cap, _LazyRng(seed, i))
            for i in range(start, stop)]


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, math.ceil(trials / (workers * 4)))
    return [(s, min(s + size, trials)) for s in range(0, trials, size)]


def _execute(worker, make_args, cfg: SimConfig):
    spans = _chunks(cfg.trials, cfg.workers)
    if cfg.workers == 1:
        parts = [worker(make_args(s, e)) for s, e in spans]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(worker, [make_args(s, e) for s, e in spans]))
    return [row for part in parts for row in part]


def _summarise(rows, d: int, cfg: SimConfig) -> SimResult:
    n = len(rows)
    totals = [r[0] for r in rows]
    mean = math.fsum(totals) / n
    if n > 1:
        var = math.fsum((x - mean) ** 2 for x in totals) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = 0.0
    depth_means, depth_ses = [], []
    for k in range(d):
        col = [r[1][k] for r in rows]
        m = math.fsum(col) / n
        depth_means.append(m)
        depth_ses.append(math.sqrt(math.fsum((c - m) ** 2 for c in col) / (n - 1) / n) if n > 1 else 0.0)
    half = cfg.confidence_z * se
    truncated = sum(1 for r in rows if r[2])
    return SimResult(mean, se, mean - half, mean + half, n, truncated, tuple(depth_means), tuple(depth_ses))


def simulate_branching(p: ModelParams, cfg: SimConfig) -> SimResult:
    """Monte Carlo estimate of the branching-model total; its expectation is the closed form."""
    rows = _execute(_run_branching_chunk,
                    lambda s, e: (p, cfg.max_nodes_per_trial, cfg.master_seed, s, e), cfg)
    return _summarise(rows, p.d, cfg)


def simulate_graph_cascade(g: WeightedDigraph, w: float, alpha: float, q: float, seed_node: int, d: int,
                           cfg: SimConfig) -> SimResult:
    """Monte Carlo estimate of the activate-once cascade total on ``g``."""
    w = _check_real("w", w)
    alpha = check_alpha(alpha)
    q = check_q(q)
    d = _check_depth(d)
    seed_node = check_seed(g, seed_node)
    if not g.is_unit_weight():
        raise ValidationError("cascade simulation needs a unit-weight graph", key="weight")
    successors = g.successors()
    rows = _execute(_run_graph_chunk,
                    lambda s, e: (successors, w, alpha, q, seed_node, d, cfg.max_nodes_per_trial,
                                  cfg.master_seed, s, e), cfg)
    return _summarise(rows, d, cfg)


@dataclass(frozen=True)
class Comparison:
    z_score: float
    consistent: bool
    reliable: bool

    def verdict(self) -> str:
        if not self.reliable:
            return "unreliable (truncated trials)"
        return "consistent" if self.consistent else "inconsistent"


def compare_to_analytic(sim: SimResult, analytic: float, z_max: float = 4.0) -> Comparison:
    """z-score of the simulated mean against an analytic expectation.

    Deterministic runs (zero standard error) must reproduce the analytic
    value up to floating rounding.
    """
    diff = sim.mean - analytic
    if sim.deterministic:
        same = math.isclose(sim.mean, analytic, rel_tol=1e-12, abs_tol=0.0) or diff == 0.0
        z = 0.0 if same else math.copysign(math.inf, diff)
        return Comparison(z, same, sim.reliable)
    z = diff / sim.std_error
    return Comparison(z, abs(z) <= z_max, sim.reliable)
