import json
from typing import List
from .FileParser import FileParser
from ..engine.RunLog import SUMMARY_SCHEMA, RunSummary


class SummaryFile (FileParser):

    """A file parser for run summary documents"""

    extension = ".json"

    def _load(self) -> dict:
        with open(self.path, "r") as f:
            data = json.load(f)
        if data.get("schema") != SUMMARY_SCHEMA:
            raise ValueError("{} is not a run summary (schema {})".format(self.path, data.get("schema")))
        return data

    def read_scalar_data(self) -> dict:
        """Run scalars plus each participant's share and rate ratio keyed by its name"""
        data = self._load()
        d = dict(data["scalars"])
        for p in data["participants"]:
            d["share_{}".format(p["name"])] = p.get("share")
            d["rate_ratio_{}".format(p["name"])] = p.get("rate_ratio")
        return d

    def read_records(self) -> List[dict]:
        return self._load()["participants"]

    def write_file(self, summary: RunSummary):
        with open(self.path, "w") as f:
            f.write(summary.dump())
