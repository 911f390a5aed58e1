import json
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional
import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

SCHEMA = "stakesim.runlog/1"
SUMMARY_SCHEMA = "stakesim.summary/1"
RECORD_TYPES = ("header", "slot", "deviation", "episode", "tally", "trajectory", "footer")


def dumps(record: dict) -> str:
    """Canonical JSON line: sorted keys, no whitespace"""
    return json.dumps(record, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _finite(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


class RunLog:

    """Line-delimited record stream of one simulation run. Equal configurations give
    byte-identical logs.
    ARGS:
        - config (dict): echo of the run configuration"""

    def __init__(self, config: dict):
        self.records: List[dict] = [{"type": "header", "schema": SCHEMA, "config": config}]

    def add(self, type_: str, **fields):
        if type_ not in RECORD_TYPES:
            raise ValueError("Unknown run log record type {}".format(type_))
        record = {"type": type_}
        record.update({k: _finite(v) for k, v in fields.items()})
        self.records.append(record)

    @property
    def config(self) -> dict:
        return self.records[0]["config"]

    def of_type(self, type_: str) -> List[dict]:
        return [r for r in self.records if r["type"] == type_]

    def to_lines(self) -> List[str]:
        return [dumps(r) for r in self.records]

    def dump(self) -> str:
        return "\n".join(self.to_lines()) + "\n"

    def write(self, path: str):
        with open(path, "w") as f:
            f.write(self.dump())

    @classmethod
    def from_records(cls, records: Iterable[dict]) -> "RunLog":
        records = list(records)
        if not records or records[0].get("type") != "header":
            raise ValueError("Run log must start with a header record")
        if records[0].get("schema") != SCHEMA:
            raise ValueError("Unsupported run log schema {}".format(records[0].get("schema")))
        log = cls(records[0]["config"])
        log.records = records
        return log


@dataclass
class RunSummary:

    """Per-participant table and run-level scalars"""

    table: pd.DataFrame
    scalars: Dict

    def to_dict(self) -> dict:
        table = json.loads(self.table.to_json(orient="records"))
        return {"schema": SUMMARY_SCHEMA, "scalars": {k: _finite(v) for k, v in self.scalars.items()}, "participants": table}

    def dump(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1, allow_nan=False) + "\n"


def metrics(log: RunLog) -> RunSummary:
    """Block shares on the final best chain, announce rates against the pooled honest per-coin
    rate, reorg depth, attack outcomes and the subtree trajectory"""
    tallies = log.of_type("tally")
    slots = log.config["simulation"]["slots"]
    table = pd.DataFrame(tallies, columns=["participant", "name", "strategy", "coins", "stake", "announced", "on_chain"])
    chain_length = table["on_chain"].sum() if len(table) else 0
    table["share"] = table["on_chain"] / chain_length if chain_length else np.nan
    table["announce_rate"] = table["announced"] / slots
    table["per_coin_rate"] = table["announce_rate"] / table["coins"].replace(0, np.nan)
    honest = table[(table["strategy"] == "honest") & (table["coins"] > 0)]
    baseline = honest["announced"].sum() / (honest["coins"].sum() * slots) if len(honest) else np.nan
    table["rate_ratio"] = table["per_coin_rate"] / baseline if baseline and np.isfinite(baseline) else np.nan
    slot_records = log.of_type("slot")
    episodes = log.of_type("episode")
    ds = [e for e in episodes if e.get("kind") == "double-spend"]
    ds_success = [e for e in ds if e.get("outcome") == "released" and e.get("goods_received") and e.get("unique_best")]
    selfish = [e for e in episodes if e.get("kind") != "double-spend"]
    released = [e for e in selfish if e.get("outcome") == "released"]
    trajectory = log.of_type("trajectory")
    scalars = {
        "slots": slots,
        "blocks": int(sum(len(r["announcements"]) for r in slot_records)),
        "chain_length": int(chain_length),
        "max_reorg": int(max((r["reorg"] for r in slot_records), default=0)),
        "deviations": len(log.of_type("deviation")),
        "honest_per_coin_rate": baseline,
        "withhold_episodes": len(selfish),
        "released_episodes": len(released),
        "orphaned_releases": sum(1 for e in released if not e.get("unique_best")),
        "double_spend_attempts": len(ds),
        "double_spend_successes": len(ds_success),
        "double_spend_rate": len(ds_success) / len(ds) if ds else None,
        "subtree_final": trajectory[-1]["subtree"] if trajectory else None,
        "ghost_captured_final": trajectory[-1]["captured"] if trajectory else None,
    }
    return RunSummary(table=table, scalars=scalars)


def trajectory_frame(log: RunLog) -> pd.DataFrame:
    """Subtree size and capture flag per slot since the subtree root was planted"""
    return pd.DataFrame(log.of_type("trajectory"), columns=["t", "k", "subtree", "captured"])
