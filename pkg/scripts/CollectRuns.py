import argparse
import os
from importlib import import_module
import sys; sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from stakesim.RunDirParser import RunDirParser

def get_type_from_str(type_str):
    try:
        pkg = import_module("stakesim.io.{}".format(type_str))
        return getattr(pkg, type_str)
    except ImportError:
        raise ValueError("Unrecognized file type {}".format(type_str))

if __name__ == "__main__":
    # making command line input parser
    parser = argparse.ArgumentParser("A script for collecting the outputs of a tree of run directories")
    parser.add_argument("directoryPath", type=str, help="The path to the directory with run directories")
    parser.add_argument("--fileType", type=str, default="SummaryFile", help="The io object of the files to collect (SummaryFile, RunLogFile, ConfigFile)")
    parser.add_argument("--out", type=str, default=None, help="(str) csv path. default=<directoryPath>/results.csv")
    # setting user variables
    args = parser.parse_args()
    path = args.directoryPath
    file_parser = get_type_from_str(args.fileType)
    # reading information from directory
    dir_parser = RunDirParser(file_parser)
    dir_parser.read_data(path)
    dir_parser.to_csv(args.out or os.path.join(path, "results.csv"))
