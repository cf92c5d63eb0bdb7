"""Monte Carlo latency under the shifted-exponential straggler model.

A job split K ways runs on N workers; each worker grinds through subtasks
sequentially, one subtask costing T0/K plus an exponential tail of rate
lam*K.  The job finishes when R_th subtasks are done across all workers,
whichever workers they came from.  The estimator returns the mean of that
completion instant over independent trials, with its standard error.

Determinism contract: trial i draws from a PCG64 stream seeded by the pair
(seed, i), so results are bit-stable for a given config, early trials are
unchanged when the trial count grows, and trials could run in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StragglerModel:
    """Shifted-exponential subtask time: T0/K + Exp(lam*K)."""

    T0: float
    lam: float
    K: int

    def __post_init__(self) -> None:
        if self.T0 < 0:
            raise ValueError(f"T0 must be >= 0, got {self.T0}")
        if self.lam <= 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")


@dataclass(frozen=True)
class SimConfig:
    N: int
    R_th: int
    model: StragglerModel
    trials: int
    seed: int

    def __post_init__(self) -> None:
        if self.N < 1 or self.R_th < 1 or self.trials < 1:
            raise ValueError(f"N, R_th, trials must all be >= 1, got {self}")


@dataclass(frozen=True)
class LatencyEstimate:
    mean: float
    stderr: float
    trials: int


def sample_subtask_time(model: StragglerModel, rng: np.random.Generator) -> float:
    """One subtask completion time: the T0/K shift plus an Exp(lam*K) tail."""
    return model.T0 / model.K + rng.standard_exponential() / (model.lam * model.K)


def simulate_once(
    N: int, R_th: int, model: StragglerModel, rng: np.random.Generator
) -> float:
    """Instant of the R_th-th subtask completion across N workers.

    Each worker's completion instants are the cumulative sums of its i.i.d.
    subtask times.  Rather than merging events one at a time, draw a block
    of subtasks per worker, take the R_th-th smallest completion overall,
    and extend any worker whose generated stream ends before that candidate
    (a worker's future completions land after its last drawn one, so once
    every stream passes the candidate no undrawn completion can change it).
    """
    shift = model.T0 / model.K
    scale = 1.0 / (model.lam * model.K)
    per = -(-R_th // N) + 3
    steps = shift + rng.standard_exponential((N, per)) * scale
    comp = np.cumsum(steps, axis=1)
    while True:
        kth = np.partition(comp.ravel(), R_th - 1)[R_th - 1]
        if comp[:, -1].min() >= kth:
            return float(kth)
        extra = shift + rng.standard_exponential((N, per)) * scale
        comp = np.concatenate([comp, comp[:, -1:] + np.cumsum(extra, axis=1)], axis=1)


def trial_latencies(cfg: SimConfig) -> np.ndarray:
    """All per-trial latency samples, one independent RNG stream per trial."""
    out = np.empty(cfg.trials)
    for i in range(cfg.trials):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((cfg.seed, i))))
        out[i] = simulate_once(cfg.N, cfg.R_th, cfg.model, rng)
    return out


def estimate_mean_latency(cfg: SimConfig) -> LatencyEstimate:
    samples = trial_latencies(cfg)
    if cfg.trials == 1:
        return LatencyEstimate(float(samples[0]), 0.0, 1)
    stderr = float(samples.std(ddof=1)) / math.sqrt(cfg.trials)
    return LatencyEstimate(float(samples.mean()), stderr, cfg.trials)
