from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from .groups import PrimeOrderGroup, get_group
from .hashing import DEFAULT_HASH


class GroupParams(BaseModel):
    """Group, generator and the challenge hash tag."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    group: PrimeOrderGroup
    hash_tag: str = DEFAULT_HASH

    @property
    def g(self) -> Any:
        return self.group.generator

    @property
    def q(self) -> int:
        return self.group.order

    @classmethod
    def named(cls, name: str, hash_tag: str = DEFAULT_HASH) -> "GroupParams":
        return cls(group=get_group(name), hash_tag=hash_tag)


class KeyPair(BaseModel):
    model_config = ConfigDict(frozen=True)

    secret: int
    public: Any  # group element, g^secret
    owner_id: str = ""


class NoncePair(BaseModel):
    """Single-use nonce; ``secret`` is wiped once a partial signature is made."""

    secret: Optional[int]
    public: Any  # group element, g^secret
    consumed: bool = False


class PartialSignature(BaseModel):
    model_config = ConfigDict(frozen=True)

    signer_id: str
    s: int


class SchnorrSignature(BaseModel):
    model_config = ConfigDict(frozen=True)

    e: int
    s: int

    def to_wire(self, group: PrimeOrderGroup) -> Dict[str, str]:
        return {"e": group.scalar_hex(self.e), "s": group.scalar_hex(self.s)}

    @classmethod
    def from_wire(cls, data: Dict[str, str]) -> "SchnorrSignature":
        return cls(e=int(data["e"], 16), s=int(data["s"], 16))


class MultiSignature(BaseModel):
    """Aggregated signature (e, s_bar); signer_ids keep submission order."""

    model_config = ConfigDict(frozen=True)

    e: int
    s_bar: int
    signer_ids: List[str] = Field(default_factory=list)

    def to_wire(self, group: PrimeOrderGroup) -> Dict[str, Any]:
        return {
            "e": group.scalar_hex(self.e),
            "s": group.scalar_hex(self.s_bar),
            "signerIds": list(self.signer_ids),
        }

    @classmethod
    def from_wire(cls, data: Dict[str, Any]) -> "MultiSignature":
        return cls(
            e=int(data["e"], 16),
            s_bar=int(data["s"], 16),
            signer_ids=list(data.get("signerIds", [])),
        )


class ProofOfPossession(BaseModel):
    model_config = ConfigDict(frozen=True)

    owner_id: str
    pop_sig: SchnorrSignature
