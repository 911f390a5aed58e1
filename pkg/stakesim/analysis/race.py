import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Tuple, Union
import numpy as np
import pandas as pd
from scipy.special import gammaln, logsumexp
from ..exceptions import DomainError

logger = logging.getLogger(__name__)

# largest race length the window search brackets up to
MAX_WINDOW = 1 << 32
# exhaustive enumeration covers 2 ** (2 * ell - 1) outcomes
MAX_EXHAUSTIVE_ELL = 6


@dataclass(frozen=True)
class RaceQuery:

    """Attacker with stake fraction alpha racing the rest of the network to ell blocks"""

    alpha: float
    ell: int

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError("alpha must lie in [0, 1], got {}".format(self.alpha))
        if int(self.ell) != self.ell or self.ell < 1:
            raise DomainError("ell must be a natural number >= 1, got {}".format(self.ell))

    def probability(self) -> float:
        return race_probability(self.alpha, self.ell)


@dataclass(frozen=True)
class SafetyPolicy:

    """Failure tolerance T, optionally derived from a lifetime budget by a union bound"""

    tolerance: float
    lifetime_blocks: int = None
    lifetime_failure: float = None

    @classmethod
    def from_lifetime(cls, blocks: int, failure: float):
        return cls(tolerance=lifetime_threshold(blocks, failure), lifetime_blocks=blocks, lifetime_failure=failure)


@dataclass(frozen=True)
class SafeWindow:
    ell: int
    p: float


@dataclass(frozen=True)
class NoSafeWindow:
    alpha: float
    reason: str = "unsafe at any window"


@dataclass(frozen=True)
class RaceEstimate:
    estimate: float
    stderr: float
    trials: int


@dataclass(frozen=True)
class UnasBound:
    rate: float
    must_defend: bool


def _query(alpha: float, ell: int) -> RaceQuery:
    q = RaceQuery(float(alpha), ell)
    return RaceQuery(q.alpha, int(q.ell))


def race_log_probability(alpha: float, ell: int) -> float:
    """log of the probability that at least ell of 2 ell - 1 Bernoulli(alpha) flips come up heads"""
    q = _query(alpha, ell)
    if q.alpha == 0.0:
        return -math.inf
    if q.alpha == 1.0:
        return 0.0
    # 2 ell - 1 fair flips: heads and tails majorities are mirror images
    if q.alpha == 0.5:
        return math.log(0.5)
    n = 2 * q.ell - 1
    i = np.arange(q.ell, n + 1, dtype=np.float64)
    terms = gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1) + i * math.log(q.alpha) + (n - i) * math.log1p(-q.alpha)
    return float(logsumexp(terms))


def race_probability(alpha: float, ell: int) -> float:
    """p_{alpha, ell}: probability that the attacker wins a race of ell blocks, evaluated in log space
    so tails far below double precision's normal range stay representable down to ~1e-308"""
    return float(math.exp(race_log_probability(alpha, ell)))


def exhaustive_race(alpha: float, ell: int) -> float:
    """Sum over all 2 ** (2 ell - 1) flip sequences with at least ell heads"""
    q = _query(alpha, ell)
    if q.ell > MAX_EXHAUSTIVE_ELL:
        raise DomainError("Exhaustive enumeration supports ell <= {}, got {}".format(MAX_EXHAUSTIVE_ELL, q.ell))
    n = 2 * q.ell - 1
    outcomes = np.arange(1 << n, dtype=np.int64)
    heads = np.zeros_like(outcomes)
    for bit in range(n):
        heads += (outcomes >> bit) & 1
    winning = heads[heads >= q.ell]
    return math.fsum(q.alpha ** int(h) * (1.0 - q.alpha) ** int(n - h) for h in winning)


def monte_carlo_race(alpha: float, ell: int, trials: int, seed: int = 0, exhaustive: bool = False) -> RaceEstimate:
    """Brute-force estimate of race_probability. With exhaustive=True the exact enumeration is
    returned with zero standard error."""
    q = _query(alpha, ell)
    if trials < 1:
        raise DomainError("trials must be at least 1, got {}".format(trials))
    if exhaustive:
        return RaceEstimate(estimate=exhaustive_race(q.alpha, q.ell), stderr=0.0, trials=trials)
    rng = np.random.default_rng(seed)
    heads = rng.binomial(2 * q.ell - 1, q.alpha, size=trials)
    est = float(np.mean(heads >= q.ell))
    return RaceEstimate(estimate=est, stderr=math.sqrt(est * (1.0 - est) / trials), trials=trials)


def min_safe_window(alpha: float, T: float) -> Union[SafeWindow, NoSafeWindow]:
    """Smallest ell with race_probability(alpha, ell) < T by exponential bracketing and binary search"""
    if not 0.0 <= alpha <= 1.0:
        raise DomainError("alpha must lie in [0, 1], got {}".format(alpha))
    if not 0.0 < T < 1.0:
        raise DomainError("T must lie in (0, 1), got {}".format(T))
    if alpha >= 0.5:
        return NoSafeWindow(alpha=alpha)
    log_t = math.log(T)
    hi = 1
    while race_log_probability(alpha, hi) >= log_t:
        if hi >= MAX_WINDOW:
            raise DomainError("No safe window below {} for alpha={} and T={}".format(MAX_WINDOW, alpha, T))
        hi *= 2
    lo = hi // 2 + 1 if hi > 1 else 1
    while lo < hi:
        mid = (lo + hi) // 2
        if race_log_probability(alpha, mid) < log_t:
            hi = mid
        else:
            lo = mid + 1
    return SafeWindow(ell=hi, p=race_probability(alpha, hi))


def lifetime_threshold(blocks: int, failure: float) -> float:
    """Per-block tolerance from a lifetime failure budget (union bound), rounded once"""
    if blocks < 1:
        raise DomainError("blocks must be at least 1, got {}".format(blocks))
    if not 0.0 <= failure <= 1.0:
        raise DomainError("failure must be a probability, got {}".format(failure))
    return float(Fraction(repr(float(failure))) / Fraction(int(blocks)))


def unas_rate_bound(D: int, lam: int) -> UnasBound:
    """Lower bound 2 - 2D / (lam + 1) on the UNaS announce rate relative to honest play, and
    whether a protocol must defend against it (D < lam / 2)"""
    if lam < 1:
        raise DomainError("lambda must be at least 1, got {}".format(lam))
    if D < 0:
        raise DomainError("D must be natural, got {}".format(D))
    return UnasBound(rate=2.0 - 2.0 * D / (lam + 1), must_defend=D < lam / 2.0)


def exp_fork_trajectory(alpha: float, x0: float, y0: float, k: int) -> Tuple[float, float]:
    """Expected attacker subtree size and honest block count after k slots of exponential forking"""
    if k < 0:
        raise DomainError("k must be natural, got {}".format(k))
    if not 0.0 <= alpha <= 1.0:
        raise DomainError("alpha must lie in [0, 1], got {}".format(alpha))
    return x0 * (1.0 + alpha) ** k, y0 + (1.0 - alpha) * k


def sweep_alpha(T: float, alphas: Iterable[float]) -> pd.DataFrame:
    """Rows (alpha, ell_star, p_at_ell_star, status) in input order. Rows with alpha >= 0.5 are
    marked unsafe and carry no window."""
    rows = []
    for a in alphas:
        w = min_safe_window(float(a), T)
        if isinstance(w, NoSafeWindow):
            rows.append({"alpha": float(a), "ell_star": None, "p_at_ell_star": math.nan, "status": w.reason})
        else:
            rows.append({"alpha": float(a), "ell_star": w.ell, "p_at_ell_star": w.p, "status": "safe"})
    df = pd.DataFrame(rows, columns=["alpha", "ell_star", "p_at_ell_star", "status"])
    df["ell_star"] = df["ell_star"].astype("Int64")
    return df


def alpha_grid(start: float, stop: float, step: float) -> List[float]:
    """Inclusive grid of alphas from start to stop"""
    if step <= 0:
        raise DomainError("step must be positive, got {}".format(step))
    if stop < start:
        raise DomainError("empty alpha range [{}, {}]".format(start, stop))
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


# window figures quoted alongside the closed form: (alpha, T, quoted ell)
QUOTED_WINDOWS = (
    (0.40, 2e-16, 816),
    (0.40, 1e-3, 148),
    (0.45, 1e-3, 663),
)
