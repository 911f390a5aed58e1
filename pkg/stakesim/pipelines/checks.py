"""Oracle-equivalence suite: closed forms against exhaustive enumeration and Monte Carlo, and the
engine against the closed forms and its own determinism contract."""
import json
import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable, List, Tuple
import numpy as np
from sqlalchemy import Boolean, Column, String
from ..analysis import (QUOTED_WINDOWS, exhaustive_race, exp_fork_trajectory, lifetime_threshold, min_safe_window,
                        monte_carlo_race, race_probability, unas_rate_bound)
from ..engine import ParticipantConfig, ProtocolConfig, SimConfig, double_spend_trials, metrics, run
from .computations import Computation

logger = logging.getLogger(__name__)

ORACLE_ALPHAS = (0.1, 0.25, 1.0 / 3.0, 0.4, 0.49)
EXACT_TOL = 1e-12
SIGMAS = 3.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _fmt(x: float) -> str:
    return "{:.6g}".format(x)


def check_race_exhaustive(seed: int, trials: int, tolerance: float) -> Tuple[bool, str]:
    worst = max(abs(race_probability(a, ell) - exhaustive_race(a, ell)) for a in ORACLE_ALPHAS for ell in range(1, 7))
    return worst <= EXACT_TOL * tolerance, "max abs error {}".format(_fmt(worst))


def check_race_symmetry(seed: int, trials: int, tolerance: float) -> Tuple[bool, str]:
    worst = max(abs(race_probability(0.5, ell) - 0.5) for ell in range(1, 1001))
    return worst <= EXACT_TOL * tolerance, "max deviation from 0.5 {}".format(_fmt(worst))


def check_race_complement(seed: int, trials: int, tolerance: float) -> Tuple[bool, str]:
    worst = max(abs(race_probability(a, ell) + race_probability(1.0 - a, ell) - 1.0)
                for a in ORACLE_ALPHAS for ell in (1, 2, 5, 20, 100))
    return worst <= EXACT_TOL * tolerance, "max abs error {}".format(_fmt(worst))


def check_race_monotone(seed: int, trials: int, tolerance: float) -> Tuple[bool, str]:
    alphas = np.linspace(0.05, 0.45, 9)
    ells = (1, 2, 3, 5, 8, 13, 21)
    grid = np.array([[race_probability(a, ell) for ell in ells] for a in alphas])
    up = bool(np.all(np.diff(grid, axis=0) > 0))
    down = bool(np.all(np.diff(grid, axis=1) < 0))
    return up and down, "increasing in alpha: {}, decreasing in ell: {}".format(up, down)


def check_race_monte_carlo(seed: int, trials: int, tolerance: float) -> Tuple[bool, str]:
    worst = 0.0
    for ell in (1, 3, 5):
        exact = race_probability(0.3, ell)
        est = monte_carlo_race(0.3, ell, max(trials, 1) * 100, seed=seed)
        sigma = math.sqrt(exact * (1.0 - exact) / est.trials)
        worst = max(worst, abs(est.estimate - exact) / sigma)
    return worst <= SIGMAS * tolerance, "worst deviation {} sigma".format(_fmt(worst))


def check_lifetime_threshold(seed: int, trials: int, tolerance: float) -> Tuple[bool, str]:
    T = lifetime_threshold(5 * 10 ** 8, 1e-7)
    return T == 2e-16, "T = {}".format(repr(T))


def check_safe_window(seed: int, trials: int, tolerance: float) -> Tuple[bool, str]:
    """The window is the first crossing below the tolerance"""
    w = min_safe_window(0.4, 2e-16)
    ok = race_probability(0.4, w.ell) < 2e-16 <= race_probability(0.4, w.ell - 1)
    return ok, "ell* = {} with p = {}".format(w.ell, _fmt(w.p))


def check_unas_bound(seed: int, trials: int, tolerance: float) -> Tuple[bool, str]:
    b = unas_rate_bound(10, 101)
    ok = abs(b.rate - (2.0 - 20.0 / 102.0)) <= EXACT_TOL * tolerance and b.must_defend
    return ok, "bound {} must defend {}".format(_fmt(b.rate), b.must_defend)


def check_fork_trajectory(seed: int, trials: int, tolerance: float) -> Tuple[bool, str]:
    x, y = exp_fork_trajectory(0.1, 1.0, 0.0, 10)
    ok = abs(x - 1.1 ** 10) <= EXACT_TOL * tolerance and abs(y - 9.0) <= EXACT_TOL * tolerance
    return ok, "x_10 = {} y_10 = {}".format(_fmt(x), _fmt(y))


def check_double_spend_race(seed: int, trials: int, tolerance: float) -> Tuple[bool, str]:
    worst = 0.0
    for attacker, network in ((3, 7), (4, 6)):
        alpha = attacker / (attacker + network)
        for z in (2, 3):
            exact = race_probability(alpha, z)
            res = double_spend_trials(attacker, network, z, trials, seed=seed)
            sigma = math.sqrt(exact * (1.0 - exact) / trials)
            worst = max(worst, abs(res.rate - exact) / sigma)
    return worst <= SIGMAS * tolerance, "worst deviation {} sigma".format(_fmt(worst))


def _small_config(seed: int) -> SimConfig:
    return SimConfig(slots=150, seed=seed, protocol=ProtocolConfig(name="oracle", success_prob=0.1),
                     participants=[ParticipantConfig(name="a", coins=3), ParticipantConfig(name="b", coins=2),
                                   ParticipantConfig(name="c", coins=1, strategy="unas", params={"depth": 2})]).validate()


def check_engine_determinism(seed: int, trials: int, tolerance: float) -> Tuple[bool, str]:
    cfg = _small_config(seed)
    first, second = run(cfg).dump(), run(cfg).dump()
    return first == second, "{} bytes".format(len(first))


def check_detector_sound(seed: int, trials: int, tolerance: float) -> Tuple[bool, str]:
    n = metrics(run(_small_config(seed))).scalars["deviations"]
    return n == 0, "{} deviations".format(n)


CHECKS: List[Tuple[str, Callable]] = [
    ("race-exhaustive", check_race_exhaustive),
    ("race-symmetry", check_race_symmetry),
    ("race-complement", check_race_complement),
    ("race-monotone", check_race_monotone),
    ("race-monte-carlo", check_race_monte_carlo),
    ("lifetime-threshold", check_lifetime_threshold),
    ("safe-window", check_safe_window),
    ("unas-bound", check_unas_bound),
    ("fork-trajectory", check_fork_trajectory),
    ("double-spend-race", check_double_spend_race),
    ("engine-determinism", check_engine_determinism),
    ("detector-sound", check_detector_sound),
]


def quoted_window_records() -> List[dict]:
    """Computed windows next to the quoted confirmation figures. Informational only."""
    out = []
    for alpha, T, quoted in QUOTED_WINDOWS:
        ell = min_safe_window(alpha, T).ell
        out.append({"alpha": alpha, "T": T, "quoted": quoted, "computed": ell, "relative_gap": (ell - quoted) / quoted})
    return out


class OracleCheck (Computation):

    """Runs every named check, or a subset.
    ARGS:
        - seed (int): seed of the Monte Carlo checks
        - trials (int): trials of the sampled checks
        - tolerance (float): multiplier on every numeric tolerance (0 turns sampled checks into exact
          comparisons and is used to exercise the failure path)
        - only (List[str]): restrict to these check names"""

    tablename = "oracle_check"
    name = "oracle check"
    __results_columns__ = {
        "name": Column(String),
        "passed": Column(Boolean),
        "detail": Column(String),
    }

    def __init__(self, seed: int = 0, trials: int = 200, tolerance: float = 1.0, only: List[str] = None):
        names = [n for n, _ in CHECKS]
        for n in only or []:
            if n not in names:
                raise ValueError("Unknown check {}, expected one of {}".format(n, ", ".join(names)))
        self.seed = seed
        self.trials = trials
        self.tolerance = tolerance
        self.only = only
        super().__init__()

    def execute(self, db_session) -> List[dict]:
        rows = []
        for name, fn in CHECKS:
            if self.only and name not in self.only:
                continue
            passed, detail = fn(self.seed, self.trials, self.tolerance)
            if not passed:
                logger.warning("check {} failed: {}".format(name, detail))
            rows.append(asdict(CheckResult(name=name, passed=bool(passed), detail=detail)))
        return rows

    @property
    def passed(self) -> bool:
        return self.successful and all(r["passed"] for r in self.results)

    def report(self, fmt: str = "text") -> str:
        """Deterministic report: identical for identical seed, trials and tolerance"""
        quoted = quoted_window_records()
        if fmt == "structured":
            return json.dumps({"checks": self.results, "quoted_windows": quoted, "passed": self.passed}, sort_keys=True, indent=1) + "\n"
        lines = ["{} {}: {}".format("PASS" if r["passed"] else "FAIL", r["name"], r["detail"]) for r in self.results]
        for q in quoted:
            lines.append("NOTE window alpha={} T={}: computed {} quoted {} ({:+.1%})".format(
                q["alpha"], q["T"], q["computed"], q["quoted"], q["relative_gap"]))
        lines.append("{} of {} checks passed".format(sum(r["passed"] for r in self.results), len(self.results)))
        return "\n".join(lines) + "\n"
