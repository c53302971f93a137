from typing import Any, Dict, List, Literal

from pydantic import BaseModel, ConfigDict, Field

Side = Literal["left", "right"]


class ProofStep(BaseModel):
    """One sibling on the path to the root; ``side`` is where the sibling sits."""

    model_config = ConfigDict(frozen=True)

    hash: bytes
    side: Side


class InclusionProof(BaseModel):
    model_config = ConfigDict(frozen=True)

    leaf_index: int = Field(ge=0)
    siblings: List[ProofStep] = Field(default_factory=list)

    def to_json(self) -> Dict[str, Any]:
        return {
            "leaf_index": self.leaf_index,
            "siblings": [{"hash_hex": step.hash.hex(), "side": step.side} for step in self.siblings],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "InclusionProof":
        return cls(
            leaf_index=data["leaf_index"],
            siblings=[
                ProofStep(hash=bytes.fromhex(step["hash_hex"]), side=step["side"])
                for step in data.get("siblings", [])
            ],
        )


class MerkleTree(BaseModel):
    """Hash layers from the leaves (``levels[0]``) up to the root (``levels[-1]``).

    Levels are stored unpadded; an odd last node is paired with itself when
    the next level is computed.
    """

    model_config = ConfigDict(frozen=True)

    leaves: List[bytes]
    levels: List[List[bytes]]

    @property
    def root(self) -> bytes:
        return self.levels[-1][0]

    @property
    def leaf_count(self) -> int:
        return len(self.leaves)
