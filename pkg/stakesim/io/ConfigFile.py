from typing import List
import yaml
from .FileParser import FileParser
from ..engine.SimConfig import SimConfig


class ConfigFile (FileParser):

    """A file parser for YAML run configurations"""

    extension = (".yaml", ".yml")

    def read_config(self) -> SimConfig:
        with open(self.path, "r") as f:
            return SimConfig.from_yaml(f.read())

    def read_scalar_data(self) -> dict:
        """Flat view of the configuration: simulation keys and protocol keys prefixed by protocol_"""
        cfg = self.read_config()
        d = cfg.to_dict()
        out = dict(d["simulation"])
        out.update({"protocol_{}".format(k): v for k, v in d["protocol"].items()})
        out["participants"] = len(cfg.participants)
        out["coins"] = cfg.n_coins
        return out

    def read_records(self) -> List[dict]:
        return [dict(p, participant=i) for i, p in enumerate(self.read_config().to_dict()["participants"])]

    def write_file(self, config: SimConfig):
        with open(self.path, "w") as f:
            yaml.safe_dump(config.to_dict(), f, sort_keys=False, default_flow_style=False)
