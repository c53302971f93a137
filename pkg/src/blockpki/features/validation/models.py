import json
from pathlib import Path
from typing import Dict, List, Literal, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ...exceptions import ScenarioError

ChallengeType = Literal["http-01", "dns-01"]

WELL_KNOWN_PREFIX = "/.well-known/acme-challenge/"
DNS_RECORD_PREFIX = "_acme-challenge."


class SimulatedDomain(BaseModel):
    name: str
    owner: str  # requester id (ledger address)
    served_files: Dict[str, str] = Field(default_factory=dict)
    key: str = ""  # hex public key the owner wants certified

    @field_validator("name")
    @classmethod
    def normalize_name(cls, v: str) -> str:
        return v.strip().lower()


class Challenge(BaseModel):
    model_config = ConfigDict(frozen=True)

    challenge_id: str
    ca_id: str
    domain_name: str
    path: str
    expected_token: str
    issued_at: float
    deadline: float
    challenge_type: ChallengeType = "http-01"
    contract_address: str = ""  # request that triggered the challenge


class AdversaryConfig(BaseModel):
    """Adversary controlling ``i`` CAs outright and ``j`` validation paths to the target."""

    target_domain: str
    compromised_cas: List[str] = Field(default_factory=list)
    impersonated_edges: List[Tuple[str, str]] = Field(default_factory=list)
    adversary_id: str = "adversary"
    log_certificate: bool = True

    @field_validator("target_domain")
    @classmethod
    def normalize_target(cls, v: str) -> str:
        return v.strip().lower()

    @field_validator("impersonated_edges")
    @classmethod
    def normalize_edges(cls, v: List[Tuple[str, str]]) -> List[Tuple[str, str]]:
        return [(ca, domain.strip().lower()) for ca, domain in v]

    @model_validator(mode="after")
    def check_disjoint(self) -> "AdversaryConfig":
        overlap = set(self.compromised_cas) & {ca for ca, _ in self.impersonated_edges}
        if overlap:
            raise ValueError(f"CAs counted both as compromised and impersonated: {sorted(overlap)}")
        return self

    @property
    def i(self) -> int:
        return len(set(self.compromised_cas))

    @property
    def j(self) -> int:
        return len({ca for ca, domain in self.impersonated_edges if domain == self.target_domain})

    def impersonates(self, ca_id: str, domain_name: str) -> bool:
        return (ca_id, domain_name) in {tuple(e) for e in self.impersonated_edges}

    @classmethod
    def load(cls, path: Union[str, Path]) -> "AdversaryConfig":
        try:
            return cls.model_validate(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, ValueError, ValidationError) as e:
            raise ScenarioError(f"Invalid adversary scenario {path}: {e}") from e
