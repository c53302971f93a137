from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..contracts.models import CertData
from ..group_crypto.groups import PrimeOrderGroup
from ..group_crypto.models import MultiSignature, ProofOfPossession
from ..ledger.models import BlockHeader, Transaction
from ..ledger.persistence import ChainArchive
from ..merkle.models import InclusionProof
from .encoding import canonical_encode, cert_fields

ClientMode = Literal["unaware", "light", "full"]
CLIENT_MODES = ("unaware", "light", "full")

RejectReason = Literal[
    "WrongDomain",
    "Expired",
    "NotYetValid",
    "UntrustedIssuer",
    "BelowThreshold",
    "BadSignature",
    "BadInclusion",
    "UnknownBlock",
    "Malformed",
]


class CertificatePayload(BaseModel):
    """Certificate data logged on chain; m is everything except ``schnorr_signature``."""

    model_config = ConfigDict(frozen=True)

    subject_name: str
    issuers: List[str]
    not_before: int
    not_after: int
    public_key: str
    schnorr_signature: MultiSignature

    @property
    def cert_data(self) -> CertData:
        return CertData(
            subject_name=self.subject_name,
            public_key=self.public_key,
            not_before=self.not_before,
            not_after=self.not_after,
        )

    def message(self) -> bytes:
        return canonical_encode(self.cert_data, self.issuers)

    def to_wire(self, group: PrimeOrderGroup) -> Dict[str, Any]:
        wire = cert_fields(self.cert_data, self.issuers)
        wire["schnorrSignature"] = self.schnorr_signature.to_wire(group)
        return wire

    @classmethod
    def from_wire(cls, data: Dict[str, Any]) -> "CertificatePayload":
        return cls(
            subject_name=data["subjectName"],
            issuers=list(data["issuers"]),
            not_before=data["notBefore"],
            not_after=data["notAfter"],
            public_key=data["publicKey"],
            schnorr_signature=MultiSignature.from_wire(data["schnorrSignature"]),
        )


class BlockPkiCertificate(BaseModel):
    payload: CertificatePayload
    transaction: Transaction
    block_no: int
    inclusion_proof: InclusionProof
    group: str = "secp256k1"


class TrustedCa(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    ca_id: str
    public_key: Any  # decoded group element
    pop: ProofOfPossession


class ClientTrustStore(BaseModel):
    """What a client trusts: CA keys, a threshold policy and, per tier, chain data."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    group: str = "secp256k1"
    trusted_cas: Dict[str, TrustedCa] = Field(default_factory=dict)
    threshold: int = Field(default=1, ge=1)
    client_mode: ClientMode = "light"
    headers: List[BlockHeader] = Field(default_factory=list)
    full_chain: Optional[ChainArchive] = None


class VerificationResult(BaseModel):
    accepted: bool
    reason: Optional[RejectReason] = None
    warnings: List[str] = Field(default_factory=list)

    @property
    def decision(self) -> str:
        return "accept" if self.accepted else "reject"
