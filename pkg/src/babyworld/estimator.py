"""Sample-efficiency estimation: normal-time early stopping, a Gaussian
process over success rate versus demonstration count, a discrete posterior
over the minimum sufficient count with credible intervals, and the t-test
interval used for reinforcement-learning episode counts.

The GP models s(k) = 99 + signal * f(log2 k) + noise, with f a unit RBF
process; hyperparameters maximize the log marginal likelihood over bounded
ranges via a log-uniform grid refined by coordinate descent.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky
from scipy.stats import t as student_t

THRESHOLD = 99.0
FILTER_FLOOR = 95.0

LENGTH_SCALE_BOUNDS = (0.1, 10.0)    # in log2-demonstration units
SIGNAL_SCALE_BOUNDS = (0.1, 100.0)
NOISE_SCALE_BOUNDS = (1e-3, 10.0)

_JITTER = 1e-8


class NotEnoughDataError(ValueError):
    """Fewer than three runs survive the s >= 95 filter."""


class NoCrossingError(ValueError):
    """The posterior never crosses the target threshold on the grid."""


@dataclass(frozen=True)
class RunRecord:
    k: int          # demonstration count
    s: float        # best smoothed success rate, in percent
    level: str = ""
    run_id: str = ""


# --- early stopping -----------------------------------------------------------

def normal_time(curves) -> float:
    """Mean first index (1-based) at which each full-data curve exceeds 99."""
    times = []
    for idx, curve in enumerate(curves):
        crossing = next((t for t, v in enumerate(curve, start=1)
                         if v > THRESHOLD), None)
        if crossing is None:
            raise ValueError(f"curve {idx} never exceeds {THRESHOLD}: the "
                             "level was not solved with full data")
        times.append(crossing)
    return sum(times) / len(times)


def early_stopped_score(curve, normal_t: float) -> float:
    """Best smoothed value over (1-based) indices strictly below 2T."""
    count = math.ceil(2 * normal_t) - 1
    window = list(curve[:count])
    if not window:
        raise ValueError("early-stopping window is empty")
    return max(window)


# --- the GP model ----------------------------------------------------------------

def _kernel(xa: np.ndarray, xb: np.ndarray, length_scale: float,
            signal_scale: float) -> np.ndarray:
    d = xa[:, None] - xb[None, :]
    return signal_scale ** 2 * np.exp(-0.5 * (d / length_scale) ** 2)


def log_marginal_likelihood(x: np.ndarray, y: np.ndarray, length_scale: float,
                            signal_scale: float, noise_scale: float) -> float:
    n = len(x)
    cov = _kernel(x, x, length_scale, signal_scale)
    cov[np.diag_indices_from(cov)] += noise_scale ** 2
    try:
        factor = cho_factor(cov, lower=True)
    except np.linalg.LinAlgError:
        return -np.inf
    alpha = cho_solve(factor, y)
    return float(-0.5 * y @ alpha - np.log(np.diag(factor[0])).sum()
                 - 0.5 * n * math.log(2 * math.pi))


@dataclass
class GPModel:
    length_scale: float
    signal_scale: float
    noise_scale: float
    x: np.ndarray                       # log2 demonstration counts
    y: np.ndarray                       # success rates minus 99
    _factor: tuple = field(repr=False, default=None)
    _alpha: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        assert self.length_scale > 0 and self.signal_scale > 0 \
            and self.noise_scale > 0
        cov = _kernel(self.x, self.x, self.length_scale, self.signal_scale)
        cov[np.diag_indices_from(cov)] += self.noise_scale ** 2
        self._factor = cho_factor(cov, lower=True)
        self._alpha = cho_solve(self._factor, self.y)

    @property
    def lml(self) -> float:
        return log_marginal_likelihood(self.x, self.y, self.length_scale,
                                       self.signal_scale, self.noise_scale)

    def posterior(self, xq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Mean (in percent) and covariance of the latent rate at xq."""
        kq = _kernel(xq, self.x, self.length_scale, self.signal_scale)
        mean = THRESHOLD + kq @ self._alpha
        cov = _kernel(xq, xq, self.length_scale, self.signal_scale) \
            - kq @ cho_solve(self._factor, kq.T)
        return mean, cov


def _log_grid(lo: float, hi: float, n: int) -> list[float]:
    return list(np.exp(np.linspace(math.log(lo), math.log(hi), n)))


def fit_gp(records, grid_points: int = 7, descent_passes: int = 40) -> GPModel:
    """Maximum-likelihood hyperparameters by multi-start bounded search:
    a log-uniform grid refined by per-coordinate multiplicative descent."""
    kept = [r for r in records if r.s >= FILTER_FLOOR]
    if len(kept) < 3:
        raise NotEnoughDataError(
            f"{len(kept)} records survive the s >= {FILTER_FLOOR} filter; "
            "need at least 3 (not-enough, just-enough, more-than-enough)")
    x = np.array([math.log2(r.k) for r in kept])
    y = np.array([r.s - THRESHOLD for r in kept])

    bounds = (LENGTH_SCALE_BOUNDS, SIGNAL_SCALE_BOUNDS, NOISE_SCALE_BOUNDS)
    best_params, best_lml = None, -np.inf
    for ls in _log_grid(*bounds[0], grid_points):
        for sf in _log_grid(*bounds[1], grid_points):
            for se in _log_grid(*bounds[2], grid_points):
                lml = log_marginal_likelihood(x, y, ls, sf, se)
                if lml > best_lml:
                    best_params, best_lml = [ls, sf, se], lml

    step = 2.0
    for _ in range(descent_passes):
        improved = False
        for dim in range(3):
            lo, hi = bounds[dim]
            for candidate in (best_params[dim] / step, best_params[dim] * step):
                candidate = min(max(candidate, lo), hi)
                trial = list(best_params)
                trial[dim] = candidate
                lml = log_marginal_likelihood(x, y, *trial)
                if lml > best_lml:
                    best_params, best_lml = trial, lml
                    improved = True
        if not improved:
            step = math.sqrt(step)
            if step < 1.0005:
                break
    return GPModel(*best_params, x=x, y=y)


# --- the posterior over the minimum sufficient count --------------------------------

@dataclass
class KminPosterior:
    ks: np.ndarray          # dense log-scale grid over [k_1, k_M]
    weights: np.ndarray     # first-up-crossing bucket frequencies
    residual: float         # mass of paths that never cross in range


def kmin_posterior(model: GPModel, k_range: tuple[float, float],
                   grid_size: int = 256, n_samples: int = 100_000,
                   seed: int = 0, chunk: int = 10_000) -> KminPosterior:
    """Monte Carlo bucket approximation: each joint posterior sample path
    contributes to the bucket of its first up-crossing of the threshold."""
    k_lo, k_hi = k_range
    assert k_lo > 0 and k_hi > k_lo
    xq = np.linspace(math.log2(k_lo), math.log2(k_hi), grid_size)
    ks = np.exp2(xq)
    mean, cov = model.posterior(xq)
    cov[np.diag_indices_from(cov)] += _JITTER
    lower = cholesky(cov, lower=True)

    rng = np.random.default_rng(seed)
    counts = np.zeros(grid_size, dtype=np.int64)
    crossed = 0
    remaining = n_samples
    while remaining > 0:
        m = min(chunk, remaining)
        remaining -= m
        z = rng.standard_normal((grid_size, m))
        paths = mean[:, None] + lower @ z
        above = paths > THRESHOLD
        hit = above.any(axis=0)
        first = above.argmax(axis=0)
        counts += np.bincount(first[hit], minlength=grid_size)
        crossed += int(hit.sum())
    weights = counts / n_samples
    return KminPosterior(ks=ks, weights=weights,
                         residual=1.0 - crossed / n_samples)


def credible_interval(post: KminPosterior,
                      level: float = 0.99) -> tuple[float, float]:
    """Smallest grid-aligned interval holding at least `level` of the
    renormalized bucket mass, most central on ties."""
    total = post.weights.sum()
    if total <= 0:
        raise NoCrossingError("no posterior mass crosses the threshold")
    w = post.weights / total
    n = len(w)
    prefix = np.concatenate([[0.0], np.cumsum(w)])

    best = None  # (width_in_buckets, tail_imbalance, i, j)
    j = 0
    for i in range(n):
        if j < i:
            j = i
        while j < n and prefix[j + 1] - prefix[i] < level - 1e-12:
            j += 1
        if j >= n:
            break
        mass_left = prefix[i]
        mass_right = 1.0 - prefix[j + 1]
        key = (j - i, abs(mass_left - mass_right), i)
        if best is None or key < best:
            best = key
    assert best is not None
    _, _, i = best
    j = i + best[0]
    return float(post.ks[i]), float(post.ks[j])


def rl_confidence_interval(episode_counts,
                           level: float = 0.99) -> tuple[float, float]:
    """Student-t confidence interval for the mean of repeated RL runs."""
    values = np.asarray(list(episode_counts), dtype=float)
    n = len(values)
    if n < 2:
        raise ValueError("need at least 2 runs for a t interval")
    mean = values.mean()
    sd = values.std(ddof=1)
    half = student_t.ppf(0.5 + level / 2, n - 1) * sd / math.sqrt(n)
    return float(mean - half), float(mean + half)


# --- CSV interfaces ------------------------------------------------------------------

def read_results_csv(path: str) -> dict[str, list[RunRecord]]:
    """Parse the (k, s, level, run_id) results table."""
    by_level: dict[str, list[RunRecord]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            record = RunRecord(k=int(row["k"]), s=float(row["s"]),
                               level=row.get("level", ""),
                               run_id=row.get("run_id", ""))
            by_level.setdefault(record.level, []).append(record)
    return by_level


def write_results_csv(path: str, records) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "s", "level", "run_id"])
        for r in records:
            writer.writerow([r.k, r.s, r.level, r.run_id])


@dataclass
class LevelEstimate:
    level: str
    k_lo: float
    k_hi: float
    residual: float


def estimate_levels(by_level: dict[str, list[RunRecord]],
                    grid_size: int = 256, n_samples: int = 100_000,
                    seed: int = 0) -> list[LevelEstimate]:
    out = []
    for level in sorted(by_level):
        records = by_level[level]
        model = fit_gp(records)
        ks = sorted(r.k for r in records if r.s >= FILTER_FLOOR)
        post = kmin_posterior(model, (ks[0], ks[-1]), grid_size=grid_size,
                              n_samples=n_samples, seed=seed)
        k_lo, k_hi = credible_interval(post)
        out.append(LevelEstimate(level, k_lo, k_hi, post.residual))
    return out


def format_report(estimates) -> str:
    lines = [f"{'level':<16} {'k_lo':>12} {'k_hi':>12} {'residual':>9}"]
    for e in estimates:
        lines.append(f"{e.level:<16} {e.k_lo:>12.1f} {e.k_hi:>12.1f} "
                     f"{e.residual:>9.4f}")
    return "\n".join(lines)


def write_report_csv(path: str, estimates) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "k_lo", "k_hi", "residual"])
        for e in estimates:
            writer.writerow([e.level, f"{e.k_lo:.3f}", f"{e.k_hi:.3f}",
                             f"{e.residual:.6f}"])
