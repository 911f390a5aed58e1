import copy
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, Optional
import yaml
from ..exceptions import ConfigError
from ..protocols import PROTOCOLS
from ..strategies import STRATEGIES

FORK_CHOICES = ("longest", "ghost")
OUTPUT_FORMATS = ("text", "structured")


@dataclass
class ProtocolConfig:

    """ARGS:
        - name (str): oracle, p1, p2 or p3
        - success_prob (float): per (anchor, coin, slot) eligibility probability
        - recency (int): oracle recency ell, ignored by p1-p3
        - freeze (int): ownership freeze window F"""

    name: str = "oracle"
    success_prob: float = 0.01
    recency: int = 1
    freeze: int = 1


@dataclass
class ParticipantConfig:

    """ARGS:
        - name (str): label used in tallies
        - coins (int): number of genesis coins
        - strategy (str): registered strategy name
        - params (dict): keyword arguments of the strategy"""

    name: str
    coins: int = 1
    strategy: str = "honest"
    params: Dict = field(default_factory=dict)


@dataclass
class OutputConfig:
    directory: str = "runs"
    format: str = "text"


@dataclass
class SimConfig:

    """Complete run configuration. Coins are numbered from 0 in participant order.
    ARGS:
        - slots (int): simulation length
        - seed (int): master seed of the oracle key and of the strategy order
        - fork_choice (str): longest or ghost
        - detector (bool): run the provable-deviation detector
        - protocol (ProtocolConfig)
        - participants (List[ParticipantConfig])
        - output (OutputConfig)"""

    slots: int = 1000
    seed: int = 0
    fork_choice: str = "longest"
    detector: bool = True
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    participants: List[ParticipantConfig] = field(default_factory=list)
    output: OutputConfig = field(default_factory=OutputConfig)
    lines: Dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_coins(self) -> int:
        return sum(p.coins for p in self.participants)

    def allocation(self) -> Dict[int, int]:
        """coin id -> participant id"""
        out, coin = {}, 0
        for pid, p in enumerate(self.participants):
            for _ in range(p.coins):
                out[coin] = pid
                coin += 1
        return out

    def stake(self, participant: int) -> float:
        return self.participants[participant].coins / self.n_coins

    def line_of(self, path: str) -> Optional[int]:
        return self.lines.get(path)

    def validate(self) -> "SimConfig":
        """Checks ranges and names, raising ConfigError with the key path and YAML line"""
        def fail(path, msg):
            raise ConfigError("{}: {}".format(path, msg), self.line_of(path))

        if not isinstance(self.slots, int) or self.slots < 1:
            fail("simulation.slots", "must be a positive integer, got {!r}".format(self.slots))
        if not isinstance(self.seed, int):
            fail("simulation.seed", "must be an integer, got {!r}".format(self.seed))
        if self.fork_choice not in FORK_CHOICES:
            fail("simulation.fork_choice", "must be one of {}, got {!r}".format(", ".join(FORK_CHOICES), self.fork_choice))
        pc = self.protocol
        if pc.name not in PROTOCOLS:
            fail("protocol.name", "unknown protocol {!r}, expected one of {}".format(pc.name, ", ".join(sorted(PROTOCOLS))))
        if not isinstance(pc.success_prob, (int, float)) or not 0.0 <= pc.success_prob <= 1.0:
            fail("protocol.success_prob", "must lie in [0, 1], got {!r}".format(pc.success_prob))
        if not isinstance(pc.recency, int) or pc.recency < 1:
            fail("protocol.recency", "must be an integer >= 1, got {!r}".format(pc.recency))
        if not isinstance(pc.freeze, int) or pc.freeze < 1:
            fail("protocol.freeze", "must be an integer >= 1, got {!r}".format(pc.freeze))
        if len(self.participants) == 0:
            fail("participants", "at least one participant is required")
        for i, p in enumerate(self.participants):
            path = "participants[{}]".format(i)
            if not isinstance(p.coins, int) or p.coins < 0:
                fail(path + ".coins", "must be a natural number, got {!r}".format(p.coins))
            if p.strategy not in STRATEGIES:
                fail(path + ".strategy", "unknown strategy {!r}, expected one of {}".format(p.strategy, ", ".join(sorted(STRATEGIES))))
            if not isinstance(p.params, dict):
                fail(path + ".params", "must be a mapping")
        if self.n_coins < 1:
            fail("participants", "the genesis allocation needs at least one coin")
        if self.output.format not in OUTPUT_FORMATS:
            fail("output.format", "must be one of {}, got {!r}".format(", ".join(OUTPUT_FORMATS), self.output.format))
        return self

    def with_overrides(self, seed: Optional[int] = None, slots: Optional[int] = None, out: Optional[str] = None) -> "SimConfig":
        cfg = copy.deepcopy(self)
        if seed is not None:
            cfg.seed = seed
        if slots is not None:
            cfg.slots = slots
        if out is not None:
            cfg.output.directory = out
        return cfg.validate()

    def to_dict(self) -> dict:
        return {
            "simulation": {"slots": self.slots, "seed": self.seed, "fork_choice": self.fork_choice, "detector": self.detector},
            "protocol": asdict(self.protocol),
            "participants": [asdict(p) for p in self.participants],
            "output": asdict(self.output),
        }

    @classmethod
    def from_dict(cls, data: dict, lines: Optional[Dict[str, int]] = None) -> "SimConfig":
        lines = lines or {}

        def section(name, allowed):
            value = data.get(name, {}) or {}
            if not isinstance(value, dict):
                raise ConfigError("{}: must be a mapping".format(name), lines.get(name))
            for key in value:
                if key not in allowed:
                    raise ConfigError("{}.{}: unknown key".format(name, key), lines.get("{}.{}".format(name, key)))
            return value

        if not isinstance(data, dict):
            raise ConfigError("configuration must be a mapping", 1)
        for key in data:
            if key not in ("simulation", "protocol", "participants", "output"):
                raise ConfigError("{}: unknown section".format(key), lines.get(key))
        sim = section("simulation", ("slots", "seed", "fork_choice", "detector"))
        prot = section("protocol", [f.name for f in fields(ProtocolConfig)])
        out = section("output", [f.name for f in fields(OutputConfig)])
        participants = []
        raw = data.get("participants", []) or []
        if not isinstance(raw, list):
            raise ConfigError("participants: must be a list", lines.get("participants"))
        allowed = [f.name for f in fields(ParticipantConfig)]
        for i, entry in enumerate(raw):
            path = "participants[{}]".format(i)
            if not isinstance(entry, dict):
                raise ConfigError("{}: must be a mapping".format(path), lines.get(path))
            for key in entry:
                if key not in allowed:
                    raise ConfigError("{}.{}: unknown key".format(path, key), lines.get("{}.{}".format(path, key)))
            if "name" not in entry:
                raise ConfigError("{}.name: missing".format(path), lines.get(path))
            participants.append(ParticipantConfig(**entry))
        cfg = cls(slots=sim.get("slots", 1000), seed=sim.get("seed", 0), fork_choice=sim.get("fork_choice", "longest"),
                  detector=sim.get("detector", True), protocol=ProtocolConfig(**prot), participants=participants,
                  output=OutputConfig(**out), lines=lines)
        return cfg.validate()

    @classmethod
    def from_yaml(cls, text: str) -> "SimConfig":
        try:
            node = yaml.compose(text)
            data = yaml.safe_load(text)
        except yaml.YAMLError as err:
            mark = getattr(err, "problem_mark", None)
            raise ConfigError("malformed YAML: {}".format(getattr(err, "problem", err)), None if mark is None else mark.line + 1)
        if data is None:
            raise ConfigError("empty configuration", 1)
        return cls.from_dict(data, _line_index(node))


def _line_index(node, prefix: str = "", out: Optional[Dict[str, int]] = None) -> Dict[str, int]:
    """Maps dotted key paths (participants[i].key) to the 1-based line they appear on"""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = key_node.value if not prefix else "{}.{}".format(prefix, key_node.value)
            out[path] = key_node.start_mark.line + 1
            _line_index(value_node, path, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            path = "{}[{}]".format(prefix, i)
            out[path] = item.start_mark.line + 1
            _line_index(item, path, out)
    return out
