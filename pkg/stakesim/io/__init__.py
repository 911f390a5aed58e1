from .FileParser import FileParser
from .ConfigFile import ConfigFile
from .RunLogFile import RunLogFile
from .SummaryFile import SummaryFile
from .rundir import write_run_directory, CONFIG_NAME, RUNLOG_NAME, SUMMARY_NAME, TABLE_NAME
