from dataclasses import dataclass


@dataclass(frozen=True)
class Transfer:

    """Change of owner of a single coin.
    ARGS:
        - coin (int): id of the transferred coin
        - sender (int): participant that must own the coin at the predecessor block
        - receiver (int): new owner"""

    coin: int
    sender: int
    receiver: int

    def to_dict(self) -> dict:
        return {"coin": self.coin, "sender": self.sender, "receiver": self.receiver}

    @classmethod
    def from_dict(cls, d: dict):
        return cls(coin=int(d["coin"]), sender=int(d["sender"]), receiver=int(d["receiver"]))
