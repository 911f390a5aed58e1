import logging
import os
import shutil
import tempfile
from ..engine.RunLog import RunLog, RunSummary, metrics
from ..engine.SimConfig import SimConfig
from .ConfigFile import ConfigFile
from .RunLogFile import RunLogFile
from .SummaryFile import SummaryFile

logger = logging.getLogger(__name__)

CONFIG_NAME = "config.yaml"
RUNLOG_NAME = "runlog.jsonl"
SUMMARY_NAME = "summary.json"
TABLE_NAME = "participants.csv"


def write_run_directory(directory: str, config: SimConfig, log: RunLog) -> RunSummary:
    """Writes the configuration echo, run log, summary and participant table of one run. Files are
    staged in a sibling temporary directory and moved into place together, so a failed write
    leaves nothing behind."""
    directory = os.path.abspath(directory)
    parent = os.path.dirname(directory)
    os.makedirs(parent, exist_ok=True)
    summary = metrics(log)
    tmp = tempfile.mkdtemp(prefix=".stakesim-", dir=parent)
    try:
        ConfigFile(os.path.join(tmp, CONFIG_NAME), exists=False).write_file(config)
        RunLogFile(os.path.join(tmp, RUNLOG_NAME), exists=False).write_file(log)
        SummaryFile(os.path.join(tmp, SUMMARY_NAME), exists=False).write_file(summary)
        summary.table.to_csv(os.path.join(tmp, TABLE_NAME), index=False)
        if os.path.isdir(directory):
            logger.info("replacing existing run directory {}".format(directory))
            shutil.rmtree(directory)
        os.rename(tmp, directory)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return summary
