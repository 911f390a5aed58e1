from .Transfer import Transfer
from .Block import Block
from .ChainStore import ChainStore
from .TipTracker import TipTracker
