from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..group_crypto.models import MultiSignature, PartialSignature

EventKind = Literal["newDomainContract", "allCertNoncesGathered", "allCertSignaturesGathered"]
EVENT_KINDS = ("newDomainContract", "allCertNoncesGathered", "allCertSignaturesGathered")


class CertData(BaseModel):
    """Certificate parameters fixed by the requester; ``public_key`` is the hex-encoded group element."""

    model_config = ConfigDict(frozen=True)

    subject_name: str = Field(min_length=1)
    public_key: str
    not_before: int
    not_after: int

    @field_validator("subject_name")
    @classmethod
    def normalize_name(cls, v: str) -> str:
        v = v.strip().lower()
        if not v:
            raise ValueError("subject_name must not be empty")
        return v

    @model_validator(mode="after")
    def check_validity(self) -> "CertData":
        if self.not_before >= self.not_after:
            raise ValueError("not_before must be earlier than not_after")
        return self

    def with_validity(self, not_before: int, not_after: int) -> "CertData":
        return CertData(
            subject_name=self.subject_name,
            public_key=self.public_key,
            not_before=not_before,
            not_after=not_after,
        )


class ContractEvent(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: EventKind
    contract_address: str
    block_height: int
    round: int = 0
    data: Dict[str, Any] = Field(default_factory=dict)
    tx_hash: str = ""


class CaRecord(BaseModel):
    ca_id: str
    address: str
    public_key: str  # hex group element


class CentralContractState(BaseModel):
    ca_registry: Dict[str, CaRecord] = Field(default_factory=dict)  # ca_id -> record
    created_domain_contracts: List[str] = Field(default_factory=list)

    def ca_by_address(self, address: str) -> Optional[CaRecord]:
        for record in self.ca_registry.values():
            if record.address == address:
                return record
        return None


class DomainContractState(BaseModel):
    address: str
    requester: str
    threshold_T: int
    cert_data: CertData
    authorized_cas: List[str]  # CA addresses, creation order
    compensations: Dict[str, int]
    escrow: int = 0
    first_t_mode: bool = False

    cert_pub_nonces: Dict[str, str] = Field(default_factory=dict)  # CA address -> hex element
    nonce_order: List[str] = Field(default_factory=list)
    nonce_count: int = 0
    all_cert_nonces: bool = False
    cert_sigs: Dict[str, PartialSignature] = Field(default_factory=dict)
    sig_count: int = 0
    paid: List[str] = Field(default_factory=list)
    rejected_sigs: List[str] = Field(default_factory=list)

    round: int = 0
    created_height: int = 0
    round_started_height: int = 0
    closed: bool = False

    @property
    def round_complete(self) -> bool:
        return self.sig_count >= self.threshold_T

    def outstanding_compensation(self) -> int:
        """Upper bound of what can still be paid out in the current round."""
        if self.closed or self.round_complete:
            return 0
        pool = self.nonce_order if self.all_cert_nonces else self.authorized_cas
        unpaid = sorted((self.compensations[a] for a in pool if a not in self.paid), reverse=True)
        return sum(unpaid[: self.threshold_T - self.sig_count])

    def required_funds(self) -> int:
        """Escrow needed to pay a full round."""
        return sum(sorted(self.compensations.values(), reverse=True)[: self.threshold_T])


class StoredCertificateRecord(BaseModel):
    index: int
    cert_data: Optional[CertData] = None
    ca_ids: List[str] = Field(default_factory=list)
    signature: Optional[MultiSignature] = None
    tx_hash: str
    sender: str
    block_height: int
    raw_payload: Optional[str] = None  # kept only when the payload did not parse


class StorageContractState(BaseModel):
    records: List[StoredCertificateRecord] = Field(default_factory=list)


class RuntimeState(BaseModel):
    central: CentralContractState = Field(default_factory=CentralContractState)
    domains: Dict[str, DomainContractState] = Field(default_factory=dict)
    storage: StorageContractState = Field(default_factory=StorageContractState)


class CreateDomainContractArgs(BaseModel):
    model_config = ConfigDict(extra="forbid")

    cert_data: CertData
    authorized_cas: List[str]
    compensations: Dict[str, int]
    threshold: Optional[int] = None
    first_t_mode: bool = False

    @model_validator(mode="after")
    def check_cas(self) -> "CreateDomainContractArgs":
        if not self.authorized_cas:
            raise ValueError("authorized CA list is empty")
        if len(set(self.authorized_cas)) != len(self.authorized_cas):
            raise ValueError("authorized CA list contains duplicates")
        if set(self.compensations) != set(self.authorized_cas):
            raise ValueError("compensations must name exactly the authorized CAs")
        if any(v < 0 for v in self.compensations.values()):
            raise ValueError("compensations must not be negative")
        if self.first_t_mode:
            if self.threshold is None or not 1 <= self.threshold <= len(self.authorized_cas):
                raise ValueError("first_t_mode needs 1 <= threshold <= number of CAs")
        elif self.threshold not in (None, len(self.authorized_cas)):
            raise ValueError("threshold must equal the number of authorized CAs")
        return self

    @property
    def threshold_T(self) -> int:
        return self.threshold if self.threshold is not None else len(self.authorized_cas)
