"""Statistical model of detection under post-selection, metrics, and schedule search.

The detection model: an error hits the code block with probability epsilon,
is missed with probability delta, and an error-free block is falsely flagged
with probability gamma.  Out of N shots the correct/incorrect/flagged counts
are multinomial with p_C = (1-gamma)(1-epsilon), p_I = epsilon*delta,
p_F = 1 - p_C - p_I.  The expected post-selected success rate (0 on the
all-flagged catastrophic event) has the closed form implemented by
`expected_success`; `gamma_of_delta` is the coupling used to sweep schedules.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class DetectionModel:
    epsilon: float
    delta: float
    gamma: float
    shots: int

    def __post_init__(self):
        for name in ("epsilon", "delta", "gamma"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")

    @property
    def p_correct(self) -> float:
        return (1.0 - self.gamma) * (1.0 - self.epsilon)

    @property
    def p_incorrect(self) -> float:
        return self.epsilon * self.delta

    @property
    def p_flagged(self) -> float:
        return self.gamma + self.epsilon - self.gamma * self.epsilon - self.delta * self.epsilon


def expected_success(model: DetectionModel) -> float:
    """E[C/(C+I) if C+I>0 else 0] =
    (1-g)(1-e)(1 - (g - e(g+d) + e)^N) / (e(g+d-1) - g + 1)."""
    e, d, g, n = model.epsilon, model.delta, model.gamma, model.shots
    denom = e * (g + d - 1.0) - g + 1.0  # = p_C + p_I
    if denom <= 0.0:
        return 0.0
    p_f = g - e * (g + d) + e
    return (1.0 - g) * (1.0 - e) * (1.0 - p_f ** n) / denom


def expected_success_unlimited(model: DetectionModel) -> float:
    """The N -> infinity limit: p_C / (p_C + p_I)."""
    denom = model.p_correct + model.p_incorrect
    return model.p_correct / denom if denom > 0 else 0.0


def gamma_of_delta(delta: float) -> float:
    """False-flag rate coupled to the miss rate: 1 / (1 + exp(10 delta - 3))."""
    if not (0.0 <= delta <= 1.0):
        raise ValueError("delta must be in [0, 1]")
    return 1.0 / (1.0 + math.exp(10.0 * delta - 3.0))


def catastrophic_probability(model: DetectionModel) -> float:
    """Probability all N shots are flagged: p_F^N."""
    return model.p_flagged ** model.shots


def shots_for_failure_budget(epsilon: float, gamma: float, delta: float,
                             budget: float) -> int:
    """Smallest N with p_F^N <= budget."""
    if not (0.0 < budget < 1.0):
        raise ValueError("budget must be in (0, 1)")
    p_f = DetectionModel(epsilon, delta, gamma, 1).p_flagged
    if p_f <= 0.0 or p_f >= 1.0:
        raise ValueError(f"flag probability {p_f} admits no finite shot budget")
    if budget >= p_f:
        return 1
    return math.ceil(math.log(budget) / math.log(p_f))


def simulate_expected_success(model: DetectionModel, trials: int,
                              rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo oracle for expected_success: multinomial sampling.

    Returns (mean, standard error of the mean) over `trials` experiments.
    """
    counts = rng.multinomial(model.shots, [model.p_correct, model.p_incorrect,
                                           model.p_flagged], size=trials)
    kept = counts[:, 0] + counts[:, 1]
    vals = np.where(kept > 0, counts[:, 0] / np.maximum(kept, 1), 0.0)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(trials))


# ---------------------------------------------------------------------------
# Performance metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricSet:
    p_enc: float
    p_bare: float
    p_ideal: float
    eta_enc: float
    eta_bare: float
    nu: float | None


def metrics(p_enc: float, p_bare: float, p_ideal: float) -> MetricSet:
    """eta = p/p_ideal; nu = (p_enc - p_bare)/(p_ideal - p_bare), absent when
    the denominator vanishes."""
    if p_ideal <= 0.0:
        raise ValueError("p_ideal must be positive")
    nu = None
    if p_ideal != p_bare:
        nu = (p_enc - p_bare) / (p_ideal - p_bare)
    return MetricSet(p_enc, p_bare, p_ideal, p_enc / p_ideal, p_bare / p_ideal, nu)


def bootstrap_ci(trial_estimates, level: float = 0.95, resamples: int = 10000,
                 stream: np.random.Generator | None = None) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean of per-trial estimates."""
    vals = np.asarray(trial_estimates, dtype=float)
    if vals.size < 2:
        raise ValueError("bootstrap needs at least 2 trials")
    rng = stream if stream is not None else np.random.default_rng(0)
    idx = rng.integers(0, vals.size, size=(resamples, vals.size))
    means = vals[idx].mean(axis=1)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(means, [alpha, 1.0 - alpha])
    return float(lo), float(hi)


# ---------------------------------------------------------------------------
# Sweep points and schedule optimization
# ---------------------------------------------------------------------------

@dataclass
class SweepPoint:
    p: float
    s: int
    iterations: int
    r: int | None          # None marks the bare baseline
    shots: int
    trials: int
    success: float
    survival: float
    ci_low: float
    ci_high: float
    rejections: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 <= self.survival <= 1.0):
            raise ValueError("survival must be in [0, 1]")
        if not (self.ci_low <= self.ci_high):
            raise ValueError("CI bounds out of order")


SWEEP_CSV_COLUMNS = ["p", "s", "iterations", "r", "shots", "trials",
                     "success", "survival", "ci_low", "ci_high"]


def sweep_points_to_csv(points: list[SweepPoint], path, seed: int | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if seed is not None:
            fh.write(f"# seed={seed}\n")
        w = csv.writer(fh)
        w.writerow(SWEEP_CSV_COLUMNS)
        for pt in points:
            w.writerow([pt.p, pt.s, pt.iterations,
                        "" if pt.r is None else pt.r,
                        pt.shots, pt.trials,
                        pt.success, pt.survival, pt.ci_low, pt.ci_high])


def sweep_points_from_csv(path) -> list[SweepPoint]:
    points = []
    with open(path) as fh:
        rows = [row for row in fh if not row.startswith("#")]
    rd = csv.DictReader(rows)
    for row in rd:
        points.append(SweepPoint(
            p=float(row["p"]), s=int(row["s"]), iterations=int(row["iterations"]),
            r=int(row["r"]) if row["r"] != "" else None,
            shots=int(row["shots"]), trials=int(row["trials"]),
            success=float(row["success"]), survival=float(row["survival"]),
            ci_low=float(row["ci_low"]), ci_high=float(row["ci_high"])))
    return points


@dataclass(frozen=True)
class ScheduleChoice:
    r_star: int
    success_star: float
    nu_star: float | None
    nu_p75: float | None
    nu_mean: float | None
    eta_star: float | None


def optimal_syndrome(points: list[SweepPoint], p_bare: float | None = None,
                     p_ideal: float | None = None) -> ScheduleChoice:
    """argmax over syndrome counts (ties to the smallest r) plus nu aggregates."""
    enc = sorted((pt for pt in points if pt.r is not None), key=lambda pt: pt.r)
    if not enc:
        raise ValueError("no encoded sweep points given")
    best = max(enc, key=lambda pt: (pt.success, -pt.r))
    succ = np.array([pt.success for pt in enc])
    nu_star = nu_p75 = nu_mean = eta_star = None
    if p_ideal is not None and p_bare is not None and p_ideal != p_bare:
        def nu(p_enc):
            return (p_enc - p_bare) / (p_ideal - p_bare)
        nu_star = nu(best.success)
        nu_p75 = nu(float(np.quantile(succ, 0.75)))
        nu_mean = nu(float(succ.mean()))
        eta_star = best.success / p_ideal
    return ScheduleChoice(best.r, best.success, nu_star, nu_p75, nu_mean, eta_star)
