import hashlib
import json
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ...config.settings import settings
from ...core.canonical import canonical_json, derive_address
from ..merkle.service import leaf_hash
from .gas import GasSchedule

ADDRESS_PATTERN = r"^0x[0-9a-f]{40}$"
ZERO_HASH = "00" * 32
DEFAULT_GAS_LIMIT = 8_000_000

# fee recipient for every block
MINER_ADDRESS = derive_address("blockpki", "miner")

TxStatus = Literal["pending", "success", "reverted"]


class Account(BaseModel):
    address: str = Field(pattern=ADDRESS_PATTERN)
    balance: int = Field(default=0, ge=0)
    nonce: int = Field(default=0, ge=0)


class Transaction(BaseModel):
    """A ledger transaction plus its execution receipt.

    ``payload`` is the UTF-8 JSON text ``{"method": ..., "args": ...}`` for
    contract calls and empty for plain transfers. The receipt fields
    (``gas_used``, ``fee``, ``status``, ``error``, ``logs``) are filled when
    the transaction is mined and are not part of ``tx_hash``.
    """

    sender: str = Field(pattern=ADDRESS_PATTERN)
    recipient: str = Field(pattern=ADDRESS_PATTERN)
    payload: str = ""
    value: int = Field(default=0, ge=0)
    gas_limit: int = Field(default=DEFAULT_GAS_LIMIT, ge=0)
    nonce: Optional[int] = None
    tx_hash: str = ""

    gas_used: int = 0
    fee: int = 0
    status: TxStatus = "pending"
    error: Optional[str] = None
    logs: List[Dict[str, Any]] = Field(default_factory=list)

    def hashed_fields(self) -> Dict[str, Any]:
        return {
            "sender": self.sender,
            "recipient": self.recipient,
            "payload": self.payload,
            "value": self.value,
            "gas_limit": self.gas_limit,
            "nonce": self.nonce,
        }

    def canonical_bytes(self) -> bytes:
        return canonical_json(self.hashed_fields())

    def compute_hash(self) -> str:
        return leaf_hash(self.canonical_bytes()).hex()

    def max_fee(self, gas_price: int) -> int:
        return self.gas_limit * gas_price

    @property
    def payload_bytes(self) -> bytes:
        return self.payload.encode("utf-8")

    def call(self) -> Optional[Dict[str, Any]]:
        """Decoded ``{method, args}`` or None for transfers and undecodable payloads."""
        if not self.payload:
            return None
        try:
            data = json.loads(self.payload)
        except ValueError:
            return None
        if not isinstance(data, dict) or "method" not in data:
            return None
        return data

    @property
    def method(self) -> str:
        call = self.call()
        return str(call["method"]) if call else "transfer"

    def unexecuted(self) -> "Transaction":
        return self.model_copy(
            update={"gas_used": 0, "fee": 0, "status": "pending", "error": None, "logs": []},
            deep=True,
        )


class BlockHeader(BaseModel):
    model_config = ConfigDict(frozen=True)

    height: int = Field(ge=0)
    parent_hash: str
    tx_root: str
    timestamp: float

    @field_validator("timestamp")
    @classmethod
    def round_timestamp(cls, v: float) -> float:
        return round(float(v), 3)

    @property
    def block_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.model_dump())).hexdigest()


class Block(BaseModel):
    header: BlockHeader
    transactions: List[Transaction] = Field(default_factory=list)

    @property
    def height(self) -> int:
        return self.header.height

    @property
    def tx_hashes(self) -> List[str]:
        return [tx.tx_hash for tx in self.transactions]


class ChainConfig(BaseModel):
    mean_block_interval: float = Field(default_factory=lambda: settings.MEAN_BLOCK_INTERVAL, gt=0)
    gas_price: int = Field(default_factory=lambda: settings.GAS_PRICE, ge=0)
    confirmation_depth: int = Field(default_factory=lambda: settings.CONFIRMATION_DEPTH, ge=0)
    rng_seed: Optional[int] = Field(default_factory=lambda: settings.BLOCKPKI_SEED)
    block_tx_limit: int = Field(default_factory=lambda: settings.BLOCK_TX_LIMIT, ge=1)
    genesis_time: int = Field(default_factory=lambda: settings.GENESIS_TIME)
    merkle_hash: Literal["sha256"] = "sha256"
    gas: GasSchedule = Field(default_factory=GasSchedule)
