"""Discrete-time hard-core kernel, trajectory simulation, hitting-time
sampling, and the monotone coupling.

Simulation runs on the embedded jump chain: the geometric number of
self-loop steps at each state is drawn in closed form, so the step count of
the simulated discrete chain is exact in distribution while metastable waits
cost only one draw per actual transition.  The continuous clock is recovered
analytically (divide by gamma) or, under ``embed_clock``, by an exact
Gamma(steps, 1/gamma) draw, the sum of `steps` iid Exp(gamma) holding times.

RNG: numpy's Philox counter-based 64-bit generator; stream i of a batch uses
key ``base_seed + i``, so results are reproducible regardless of parallelism.
"""
from __future__ import annotations

import math
import sys
from bisect import bisect_left
from dataclasses import dataclass, field

import numpy as np

from .configspace import ConfigurationSpace, ModelParams, leq

__all__ = [
    "TransitionKernel",
    "HittingSample",
    "CrossoverSummary",
    "build_kernel",
    "simulate_hit",
    "sample_crossover",
    "coupled_simulate",
    "continuous_mean",
    "occupation_counts",
    "make_rng",
]

DEFAULT_STEP_CAP = 10_000_000_000


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & ((1 << 128) - 1)))


class _Uniforms:
    """Buffered (0,1] uniforms from one generator."""

    def __init__(self, rng: np.random.Generator, block: int = 1 << 14):
        self.rng = rng
        self.block = block
        self.buf: list[float] = []
        self.pos = 0

    def next(self) -> float:
        if self.pos == len(self.buf):
            self.buf = (1.0 - self.rng.random(self.block)).tolist()
            self.pos = 0
        u = self.buf[self.pos]
        self.pos += 1
        return u


class TransitionKernel:
    """Sparse row structure of the Gibbs-sampler kernel.

    Off-diagonal entries: lambda_i/gamma for adding a particle at an empty,
    unblocked site i (lambda_bar on V), 1/gamma for removing one; the
    self-loop probability absorbs the rest of the row.
    """

    def __init__(self, space: ConfigurationSpace, params: ModelParams):
        self.space = space
        self.params = params
        g = space.graph
        n_sites = g.n_sites
        u_mask = space.u_mask
        lam, lam_bar, gamma = params.lam, params.lam_bar, params.gamma
        p_add_u = lam / gamma
        p_add_v = lam_bar / gamma
        p_rem = 1.0 / gamma
        nbr = space.neighbor_masks
        index = space.index

        self.row_targets: list[list[int]] = []
        self.row_probs: list[list[float]] = []
        self.row_cum: list[list[float]] = []
        self.p_move: list[float] = []
        for mask in space.configs:
            targets: list[int] = []
            probs: list[float] = []
            for site in range(n_sites):
                bit = 1 << site
                if mask & bit:
                    targets.append(index[mask ^ bit])
                    probs.append(p_rem)
                elif not (mask & nbr[site]):
                    targets.append(index[mask | bit])
                    probs.append(p_add_u if bit & u_mask else p_add_v)
            cum = []
            acc = 0.0
            for p in probs:
                acc += p
                cum.append(acc)
            self.row_targets.append(targets)
            self.row_probs.append(probs)
            self.row_cum.append(cum)
            self.p_move.append(acc)

    def __len__(self) -> int:
        return len(self.space)

    def self_loop(self, i: int) -> float:
        return 1.0 - self.p_move[i]

    def prob(self, i: int, j: int) -> float:
        if i == j:
            return self.self_loop(i)
        for t, p in zip(self.row_targets[i], self.row_probs[i]):
            if t == j:
                return p
        return 0.0

    def offdiag_coo(self):
        """(rows, cols, probs) arrays of the off-diagonal entries."""
        rows, cols, vals = [], [], []
        for i, (ts, ps) in enumerate(zip(self.row_targets, self.row_probs)):
            rows.extend([i] * len(ts))
            cols.extend(ts)
            vals.extend(ps)
        return (np.asarray(rows, dtype=np.int64),
                np.asarray(cols, dtype=np.int64),
                np.asarray(vals, dtype=np.float64))

    def check_invariants(self) -> dict[str, float]:
        """Max row-sum deviation and max relative detailed-balance defect."""
        row_dev = max(abs(self.p_move[i] + self.self_loop(i) - 1.0)
                      for i in range(len(self)))
        pi = self.space.stationary(self.params)
        db = 0.0
        for i, (ts, ps) in enumerate(zip(self.row_targets, self.row_probs)):
            for j, p in zip(ts, ps):
                if i < j:
                    back = self.prob(j, i)
                    f, b = pi[i] * p, pi[j] * back
                    if f or b:
                        db = max(db, abs(f - b) / max(f, b))
        return {"row_sum_dev": row_dev, "detailed_balance_rel": db}


def build_kernel(space: ConfigurationSpace, params: ModelParams) -> TransitionKernel:
    return TransitionKernel(space, params)


@dataclass
class HittingSample:
    steps: int
    t_hat: float
    terminal: int
    gate_events: list[tuple[int, int]] = field(default_factory=list)
    timed_out: bool = False

    def as_json_obj(self, sample_index: int) -> dict:
        return {"sample": sample_index, "steps": self.steps, "t_hat": self.t_hat,
                "terminal": self.terminal, "timed_out": self.timed_out,
                "gate_events": [[a, b] for a, b in self.gate_events]}


def simulate_hit(kernel: TransitionKernel, start: int, targets,
                 seed: int, step_cap: int = DEFAULT_STEP_CAP,
                 gate_watch=None, embed_clock: bool = False) -> HittingSample:
    """Exact simulation of the discrete chain from ``start`` to ``targets``.

    ``start`` and ``targets`` are state indices.  ``gate_watch`` is an
    iterable of (from, to) index pairs; every watched transition crossed
    before hitting is recorded in order.
    """
    target_set = set(int(t) for t in targets)
    if not target_set:
        raise ValueError("targets must be non-empty")
    rng = make_rng(seed)
    uni = _Uniforms(rng)
    gamma = kernel.params.gamma
    watch = set((int(a), int(b)) for a, b in gate_watch) if gate_watch else None

    state = int(start)
    steps = 0
    events: list[tuple[int, int]] = []
    if state in target_set:
        return HittingSample(0, 0.0, state, events)

    row_cum = kernel.row_cum
    row_targets = kernel.row_targets
    p_move = kernel.p_move
    while True:
        pm = p_move[state]
        if pm <= 0.0:
            raise RuntimeError(f"absorbing state {state} outside targets")
        u = uni.next()
        if pm < 1.0:
            holds = int(math.log(u) / math.log1p(-pm))
        else:
            holds = 0
        steps += holds + 1
        if steps > step_cap:
            t_hat = steps / gamma
            return HittingSample(steps, t_hat, state, events, timed_out=True)
        cum = row_cum[state]
        k = bisect_left(cum, uni.next() * pm)
        if k == len(cum):
            k -= 1
        nxt = row_targets[state][k]
        if watch is not None and (state, nxt) in watch:
            events.append((state, nxt))
        state = nxt
        if state in target_set:
            break
    if embed_clock:
        t_hat = float(rng.gamma(shape=steps, scale=1.0 / gamma))
    else:
        t_hat = steps / gamma
    return HittingSample(steps, t_hat, state, events)


@dataclass
class CrossoverSummary:
    n: int
    mean_steps: float
    mean_t_hat: float
    var_t_hat: float
    timeouts: int
    scaled_sorted: list[float]          # t_hat / mean(t_hat), ascending


_WORKER_ARGS = {}


def _worker_init(kernel, start, targets, step_cap, gate_watch, embed_clock, base_seed):
    _WORKER_ARGS.update(kernel=kernel, start=start, targets=targets,
                        step_cap=step_cap, gate_watch=gate_watch,
                        embed_clock=embed_clock, base_seed=base_seed)


def _worker_run(i: int) -> HittingSample:
    a = _WORKER_ARGS
    return simulate_hit(a["kernel"], a["start"], a["targets"],
                        seed=a["base_seed"] + i, step_cap=a["step_cap"],
                        gate_watch=a["gate_watch"], embed_clock=a["embed_clock"])


def sample_crossover(kernel: TransitionKernel, start: int, targets,
                     n_samples: int, base_seed: int,
                     step_cap: int = DEFAULT_STEP_CAP, gate_watch=None,
                     embed_clock: bool = False, threads: int = 1,
                     progress_every: int | None = None,
                     ) -> tuple[list[HittingSample], CrossoverSummary]:
    """Batch driver; sample i uses seed base_seed + i, merged in index order.

    ``progress_every`` emits a stderr checkpoint after that many samples
    (metastable waits can be astronomically long; timeouts are first-class).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(
                max_workers=threads, initializer=_worker_init,
                initargs=(kernel, start, targets, step_cap, gate_watch,
                          embed_clock, base_seed)) as ex:
            samples = list(ex.map(_worker_run, range(n_samples), chunksize=16))
    else:
        samples = []
        for i in range(n_samples):
            samples.append(simulate_hit(kernel, start, targets,
                                        seed=base_seed + i, step_cap=step_cap,
                                        gate_watch=gate_watch,
                                        embed_clock=embed_clock))
            if progress_every and (i + 1) % progress_every == 0:
                print(f"[sample_crossover] {i + 1}/{n_samples} samples",
                      file=sys.stderr)
    done = [s for s in samples if not s.timed_out]
    t = np.array([s.t_hat for s in done]) if done else np.zeros(0)
    mean_t = float(t.mean()) if len(t) else math.nan
    var_t = float(t.var(ddof=1)) if len(t) > 1 else math.nan
    scaled = sorted((t / mean_t).tolist()) if len(t) and mean_t > 0 else []
    summary = CrossoverSummary(
        n=n_samples,
        mean_steps=float(np.mean([s.steps for s in done])) if done else math.nan,
        mean_t_hat=mean_t,
        var_t_hat=var_t,
        timeouts=sum(1 for s in samples if s.timed_out),
        scaled_sorted=scaled,
    )
    return samples, summary


def continuous_mean(mean_steps: float, params: ModelParams) -> float:
    """E[T] = gamma E[T_hat]: convert discrete steps to continuous time."""
    return mean_steps / params.gamma


def occupation_counts(kernel: TransitionKernel, start: int, n_steps: int,
                      seed: int) -> np.ndarray:
    """Discrete-time occupation counts over a trajectory of n_steps steps."""
    rng = make_rng(seed)
    uni = _Uniforms(rng)
    counts = np.zeros(len(kernel), dtype=np.int64)
    state = int(start)
    remaining = n_steps
    row_cum, row_targets, p_move = kernel.row_cum, kernel.row_targets, kernel.p_move
    while remaining > 0:
        pm = p_move[state]
        u = uni.next()
        holds = int(math.log(u) / math.log1p(-pm)) if pm < 1.0 else 0
        stay = min(holds + 1, remaining)
        counts[state] += stay
        remaining -= stay
        if remaining == 0:
            break
        cum = row_cum[state]
        k = bisect_left(cum, uni.next() * pm)
        if k == len(cum):
            k -= 1
        state = row_targets[state][k]
    return counts


# ----------------------------------------------------------------------------
# Monotone coupling
# ----------------------------------------------------------------------------

@dataclass
class CoupledRun:
    trajectory_low: list[int]       # configuration bitmasks of the (lam1, lbar1) chain
    trajectory_high: list[int]
    violations: list[int]           # master-tick indices where the order broke


def coupled_simulate(space: ConfigurationSpace, params_low: ModelParams,
                     params_high: ModelParams, x_low: int, x_high: int,
                     horizon: int, seed: int, record: bool = True) -> CoupledRun:
    """Clock coupling of two chains with lam1 >= lam2 and lbar1 <= lbar2.

    The low chain (parameters lam1, lbar1) starts at ``x_low`` below
    ``x_high`` in the crossover order.  Both chains share death clocks; birth
    clocks on U are thinned from the low chain's (richer) stream, on V from
    the high chain's.  The violation report lists every tick after which the
    order fails (must be empty).
    """
    lam1, lb1 = params_low.lam, params_low.lam_bar
    lam2, lb2 = params_high.lam, params_high.lam_bar
    if lam1 < lam2 or lb1 > lb2:
        raise ValueError("need lam_low >= lam_high and lam_bar_low <= lam_bar_high")
    if not leq(space, x_low, x_high):
        raise ValueError("x_low must be below x_high in the crossover order")
    g = space.graph
    n = g.n_sites
    u_mask = space.u_mask
    nbr = space.neighbor_masks

    # Event table: births per site at the dominating rate, then deaths.
    rates = []
    for site in range(n):
        rates.append(lam1 if (1 << site) & u_mask else lb2)
    rates.extend([1.0] * n)
    cum = np.cumsum(rates)
    total = float(cum[-1])
    cum_list = cum.tolist()
    thin_u = lam2 / lam1
    thin_v = lb1 / lb2

    rng = make_rng(seed)
    uni = _Uniforms(rng)
    a, b = int(x_low), int(x_high)
    traj_a, traj_b = [a], [b]
    violations: list[int] = []

    def try_birth(mask: int, site: int) -> int:
        bit = 1 << site
        if mask & bit or mask & nbr[site]:
            return mask
        return mask | bit

    for tick in range(1, horizon + 1):
        ev = bisect_left(cum_list, uni.next() * total)
        if ev >= 2 * n:
            ev = 2 * n - 1
        if ev < n:
            site = ev
            if (1 << site) & u_mask:
                a = try_birth(a, site)
                if thin_u >= 1.0 or uni.next() < thin_u:
                    b = try_birth(b, site)
            else:
                b = try_birth(b, site)
                if thin_v >= 1.0 or uni.next() < thin_v:
                    a = try_birth(a, site)
        else:
            bit = 1 << (ev - n)
            a &= ~bit
            b &= ~bit
        if record:
            traj_a.append(a)
            traj_b.append(b)
        if not leq(space, a, b):
            violations.append(tick)
    return CoupledRun(traj_a, traj_b, violations)
