"""Gas table and per-transaction gas meter."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from ...exceptions import OutOfGas

PayloadKind = Literal[
    "transfer",
    "create_domain_contract",
    "send_cert_pub_nonce",
    "send_cert_signature",
    "renew",
    "cancel",
    "withdraw_surplus",
    "store_certificate",
]


class GasSchedule(BaseModel):
    """Constant costs in gas units; only linearity and ranking matter."""

    model_config = ConfigDict(frozen=True)

    base_tx_cost: int = Field(default=21000, ge=0)
    per_byte_storage: int = Field(default=640, ge=0)
    per_contract_creation: int = Field(default=32000, ge=0)
    per_event: int = Field(default=375, ge=0)
    # deployed domain-contract code, paid once per creation
    code_deposit_bytes: int = Field(default=1200, ge=0)
    per_signature_check: int = Field(default=3000, ge=0)

    @property
    def creation_cost(self) -> int:
        return self.per_contract_creation + self.code_deposit_bytes * self.per_byte_storage

    def estimate(self, payload_kind: PayloadKind, payload_size_bytes: int) -> int:
        """Gas for a call of ``payload_kind`` storing ``payload_size_bytes`` (events excluded)."""
        if payload_size_bytes < 0:
            raise ValueError("payload size must not be negative")
        gas = self.base_tx_cost + self.per_byte_storage * payload_size_bytes
        if payload_kind == "create_domain_contract":
            gas += self.creation_cost
        return gas


class GasMeter:
    """Accumulates gas for one transaction; raises ``OutOfGas`` past the limit."""

    def __init__(self, schedule: GasSchedule, gas_limit: int):
        self.schedule = schedule
        self.gas_limit = gas_limit
        self.used = 0

    def charge(self, amount: int) -> None:
        self.used += amount
        if self.used > self.gas_limit:
            raise OutOfGas(self.gas_limit)

    def charge_base(self) -> None:
        self.charge(self.schedule.base_tx_cost)

    def charge_storage(self, n_bytes: int) -> None:
        self.charge(self.schedule.per_byte_storage * n_bytes)

    def charge_creation(self) -> None:
        self.charge(self.schedule.creation_cost)

    def charge_event(self) -> None:
        self.charge(self.schedule.per_event)

    def charge_signature_check(self) -> None:
        self.charge(self.schedule.per_signature_check)
