import os
import pandas as pd
from .io import SummaryFile


class RunDirParser:
    """Collects the files of one type found anywhere under a tree of run directories"""

    def __init__(self, file_type=SummaryFile):
        self.file_parser = file_type
        self.df = None

    def _matches(self, fname: str) -> bool:
        ext = self.file_parser.extension
        if not fname.endswith(ext):
            return False
        # run directories hold a single summary next to other json outputs
        if self.file_parser is SummaryFile:
            return fname == "summary.json"
        return True

    def read_data(self, path, *args, **kwargs):
        """Method to read all files in the directory"""
        if not os.path.isdir(path):
            raise ValueError("{} is not a directory. Must provide a directory".format(path))
        data = []
        for dir, _, fnames in sorted(os.walk(path)):
            for fname in sorted(fnames):
                if self._matches(fname):
                    f = self.file_parser(os.path.join(dir, fname))
                    d = f.read_scalar_data(*args, **kwargs)
                    d.update({"dir": os.path.relpath(dir, path), "name": os.path.splitext(fname)[0]})
                    data.append(d)
        self.df = pd.DataFrame(data=data)
        return self.df

    def to_csv(self, path):
        """Write data to csv file"""
        if self.df is None:
            raise RuntimeError("No data read yet, call read_data first")
        self.df.to_csv(path, index=False)
