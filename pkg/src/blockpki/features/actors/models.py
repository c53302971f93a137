import json
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ...config.settings import settings
from ...exceptions import ScenarioError
from ..certificates.models import BlockPkiCertificate, ClientMode
from ..ledger.models import ChainConfig
from ..validation.models import AdversaryConfig

CaBehavior = Literal["honest", "compromised", "unresponsive", "garbage_signer"]

RequesterState = Literal[
    "created_contract",
    "awaiting_nonces",
    "awaiting_sigs",
    "publishing",
    "awaiting_confirmations",
    "done",
]
REQUESTER_STATES = (
    "created_contract",
    "awaiting_nonces",
    "awaiting_sigs",
    "publishing",
    "awaiting_confirmations",
    "done",
)


class CaSpec(BaseModel):
    ca_id: str
    behavior: CaBehavior = "honest"


class LatencyModel(BaseModel):
    """Mean delays in simulated seconds; zero gives the ideal schedule."""

    mean_tx_latency: float = Field(default=0.0, ge=0)
    mean_validation_delay: float = Field(default=0.0, ge=0)


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    chain: ChainConfig = Field(default_factory=ChainConfig)
    group: str = Field(default_factory=lambda: settings.BLOCKPKI_GROUP)
    threshold: int = Field(default=4, ge=1)
    cas: List[CaSpec] = Field(default_factory=list)
    authorized_cas: Optional[List[str]] = None
    first_t_mode: bool = False
    client_threshold: Optional[int] = Field(default=None, ge=1)

    domain: str = "www.example.com"
    compensation_per_ca: int = Field(default=100_000_000, ge=0)
    requester_funds: int = Field(default=10**13, ge=0)
    ca_funds: int = Field(default=10**12, ge=0)

    latency: LatencyModel = Field(default_factory=LatencyModel)
    adversary: Optional[AdversaryConfig] = None
    client_tiers: List[ClientMode] = Field(default_factory=lambda: ["unaware", "light", "full"])
    repetitions: int = Field(default=1, ge=1)
    seed: Optional[int] = Field(default_factory=lambda: settings.BLOCKPKI_SEED)

    issuance_timeout_blocks: int = Field(default_factory=lambda: settings.ISSUANCE_TIMEOUT_BLOCKS, ge=1)
    challenge_deadline_blocks: int = Field(default_factory=lambda: settings.CHALLENGE_DEADLINE_BLOCKS, ge=0)
    cert_lifetime_seconds: int = Field(default_factory=lambda: settings.CERT_LIFETIME_SECONDS, gt=0)
    onchain_signature_check: bool = Field(default_factory=lambda: settings.ONCHAIN_SIGNATURE_CHECK)

    @model_validator(mode="after")
    def fill_cas(self) -> "ScenarioConfig":
        if not self.cas:
            self.cas = [CaSpec(ca_id=f"CA{n}") for n in range(1, self.threshold + 1)]
        ids = [ca.ca_id for ca in self.cas]
        if len(set(ids)) != len(ids):
            raise ValueError("CA ids must be unique")
        if self.authorized_cas is not None:
            unknown = set(self.authorized_cas) - set(ids)
            if unknown:
                raise ValueError(f"authorized_cas names unknown CAs: {sorted(unknown)}")
        if len(self.authorized_ca_ids) < self.threshold:
            raise ValueError("fewer authorized CAs than the threshold")
        if not self.first_t_mode and len(self.authorized_ca_ids) != self.threshold:
            raise ValueError("without first_t_mode the threshold equals the number of authorized CAs")
        return self

    @property
    def authorized_ca_ids(self) -> List[str]:
        if self.authorized_cas is not None:
            return list(self.authorized_cas)
        if self.first_t_mode:
            return [ca.ca_id for ca in self.cas]
        return [ca.ca_id for ca in self.cas][: self.threshold]

    @property
    def policy_threshold(self) -> int:
        return self.client_threshold or self.threshold

    def behavior_of(self, ca_id: str) -> CaBehavior:
        for ca in self.cas:
            if ca.ca_id == ca_id:
                return ca.behavior
        raise KeyError(ca_id)


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(json.loads(Path(path).read_text(encoding="utf-8")))
    except (OSError, ValueError, ValidationError) as e:
        raise ScenarioError(f"Invalid scenario {path}: {e}") from e


class TxCost(BaseModel):
    tx_hash: str
    method: str
    sender: str
    block_height: int
    gas_used: int
    fee: int
    status: str


class IssuanceMetrics(BaseModel):
    blocks_elapsed: int = 0
    wall_time_simulated: float = 0.0
    tx_count: int = 0
    total_gas: int = 0
    total_fees: int = 0
    per_tx: List[TxCost] = Field(default_factory=list)
    # ca_id -> what it did wrong ("garbage_signature", "unresponsive")
    misbehavior: Dict[str, str] = Field(default_factory=dict)

    def gas_of(self, method: str) -> List[int]:
        return [t.gas_used for t in self.per_tx if t.method == method]


class IssuanceFailure(BaseModel):
    reason: str
    detail: str = ""
    blocking_ca_ids: List[str] = Field(default_factory=list)
    bad_ca_ids: List[str] = Field(default_factory=list)


class IssuanceOutcome(BaseModel):
    domain: str
    contract_address: Optional[str] = None
    round: int = 0
    certificate: Optional[BlockPkiCertificate] = None
    failure: Optional[IssuanceFailure] = None
    metrics: IssuanceMetrics = Field(default_factory=IssuanceMetrics)
    logged: bool = False

    @property
    def succeeded(self) -> bool:
        return self.certificate is not None


class Anomaly(BaseModel):
    domain: str
    tx_hash: str
    sender: str
    registered_owner: str
    block_height: int
    # requester of the matching contract round; None when no round produced it
    issuing_requester: Optional[str] = None


class AttackReport(BaseModel):
    threshold: int
    i: int
    j: int
    logged: bool
    constructible: bool
    accepted: Dict[str, bool] = Field(default_factory=dict)
    reject_reasons: Dict[str, Optional[str]] = Field(default_factory=dict)
    anomalies: List[Anomaly] = Field(default_factory=list)
    failure: Optional[IssuanceFailure] = None

    @property
    def detected(self) -> bool:
        return bool(self.anomalies)
