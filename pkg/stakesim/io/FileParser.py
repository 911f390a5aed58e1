from abc import ABC, abstractmethod
from typing import List
import os


class FileParser (ABC):

    """Abstract file parser.
    ARGS:
        - path (str): file path, must carry the parser's extension
        - exists (bool): require the file to exist (readers); writers pass False"""

    def __init__(self, path: str, exists: bool = True):
        if not hasattr(self, "extension"):
            raise NotImplementedError("Undefined extension for this file parser. Please define an extension and rerun.")
        if not path.endswith(self.extension):
            raise ValueError("Illegal file extension for supplied file {}.".format(path))
        if exists and not os.path.isfile(path):
            raise FileNotFoundError("Supplied path {} doesn't exist".format(path))
        self.path = path

    @abstractmethod
    def read_scalar_data(self) -> dict:
        """Reads scalar data from file to a dictionary"""
        pass

    @abstractmethod
    def read_records(self) -> List[dict]:
        """Reads the structured records stored in the file"""
        pass

    @abstractmethod
    def write_file(self, obj):
        """Method to write the file type from its in-memory object"""
        raise NotImplementedError("Write file method is not implemented for this file type")
