from . import base, protocols, strategies, engine, analysis, io
