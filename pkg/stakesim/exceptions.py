"""Exception types shared by the stakesim modules"""
from typing import Optional


class UnknownBlockError(KeyError):
    """A block id that is not in the store"""


class UnknownCoinError(KeyError):
    """A coin id that is not part of the genesis allocation"""


class MissingAncestorError(LookupError):
    """A block points to an ancestor that was never stored. Structural, not the same as invalid."""


class UnpredictableError(Exception):
    """A computation needs a secret subkey or chain content that does not exist yet"""


class DomainError(ValueError):
    """An analysis argument outside the domain of the operation"""


class ConfigError(ValueError):

    """Malformed or inconsistent run configuration.
    ARGS:
        - message (str): description naming the offending key
        - line (Optional[int]): 1-based line of the key in the YAML file, if known"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.message = message
        if line is not None:
            message = "line {}: {}".format(line, message)
        super().__init__(message)
