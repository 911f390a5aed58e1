import json
from typing import List
from .FileParser import FileParser
from ..engine.RunLog import RunLog, metrics


class RunLogFile (FileParser):

    """A file parser for line-delimited run logs"""

    extension = ".jsonl"

    def read_records(self) -> List[dict]:
        records = []
        with open(self.path, "r") as f:
            for i, line in enumerate(f):
                line = line.strip()
                if not line:
                    continue
                try:
                    records.append(json.loads(line))
                except json.JSONDecodeError as err:
                    raise ValueError("{}: bad record on line {}: {}".format(self.path, i + 1, err.msg))
        return records

    def read_runlog(self) -> RunLog:
        return RunLog.from_records(self.read_records())

    def read_scalar_data(self) -> dict:
        return metrics(self.read_runlog()).scalars

    def write_file(self, log: RunLog):
        log.write(self.path)
