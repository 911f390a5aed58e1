"""Dask computations over analysis and simulation parameters. Each row is an independent task and
rows come back in input order."""
import os
from typing import Iterable, List
import pandas as pd
from dask import delayed
from sqlalchemy import Column, Float, Integer, String
from ..analysis import NoSafeWindow, min_safe_window
from ..engine import SimConfig, run
from ..io import write_run_directory
from .computations import DaskComputation

SWEEP_COLUMNS = ["alpha", "ell_star", "p_at_ell_star", "status"]
ENSEMBLE_COLUMNS = ["seed", "directory", "blocks", "chain_length", "max_reorg", "deviations", "released_episodes",
                    "orphaned_releases", "double_spend_rate", "subtree_final"]


def window_row(alpha: float, T: float) -> dict:
    w = min_safe_window(alpha, T)
    if isinstance(w, NoSafeWindow):
        return {"alpha": alpha, "T": T, "ell_star": None, "p_at_ell_star": None, "status": w.reason}
    return {"alpha": alpha, "T": T, "ell_star": w.ell, "p_at_ell_star": w.p, "status": "safe"}


class AlphaSweep (DaskComputation):

    """Safe window for every attacker stake fraction of a grid under one tolerance.
    ARGS:
        - T (float): tolerance
        - alphas (Iterable[float]): stake fractions, alphas >= 0.5 give unsafe rows"""

    tablename = "alpha_sweep"
    name = "alpha sweep"
    __results_columns__ = {
        "alpha": Column(Float),
        "T": Column(Float),
        "ell_star": Column(Integer),
        "p_at_ell_star": Column(Float),
        "status": Column(String),
    }

    def __init__(self, T: float, alphas: Iterable[float], scheduler: str = "threads"):
        self.T = T
        self.alphas = [float(a) for a in alphas]
        super().__init__(scheduler)

    def make_futures(self, db_session) -> list:
        return [delayed(window_row)(a, self.T) for a in self.alphas]

    def to_dataframe(self) -> pd.DataFrame:
        df = pd.DataFrame(self.results, columns=SWEEP_COLUMNS)
        df["ell_star"] = df["ell_star"].astype("Int64")
        return df


def run_seed(config: SimConfig, seed: int, directory: str) -> dict:
    cfg = config.with_overrides(seed=seed)
    summary = write_run_directory(directory, cfg, run(cfg))
    row = {k: summary.scalars.get(k) for k in ENSEMBLE_COLUMNS if k in summary.scalars}
    row.update({"seed": seed, "directory": directory})
    for p in summary.table.itertuples():
        row["share_{}".format(p.name)] = None if pd.isna(p.share) else float(p.share)
    return row


class SeedEnsemble (DaskComputation):

    """Runs one configuration under consecutive seeds, writing one run directory per seed
    (seed-<n>) under the output directory.
    ARGS:
        - config (SimConfig): base configuration
        - seeds (List[int]): seeds to run
        - directory (str): parent directory of the run directories"""

    tablename = "seed_ensemble"
    name = "seed ensemble"
    __results_columns__ = {
        "seed": Column(Integer),
        "directory": Column(String),
        "blocks": Column(Integer),
        "chain_length": Column(Integer),
        "max_reorg": Column(Integer),
        "deviations": Column(Integer),
        "released_episodes": Column(Integer),
        "orphaned_releases": Column(Integer),
        "double_spend_rate": Column(Float),
        "subtree_final": Column(Integer),
    }

    def __init__(self, config: SimConfig, seeds: List[int], directory: str, scheduler: str = "threads"):
        self.config = config
        self.seeds = list(seeds)
        self.directory = directory
        super().__init__(scheduler)

    def make_futures(self, db_session) -> list:
        return [delayed(run_seed)(self.config, s, os.path.join(self.directory, "seed-{}".format(s))) for s in self.seeds]

    def to_dataframe(self) -> pd.DataFrame:
        df = pd.DataFrame(self.results)
        first = [c for c in ENSEMBLE_COLUMNS if c in df.columns]
        return df[first + sorted(c for c in df.columns if c not in first)]
