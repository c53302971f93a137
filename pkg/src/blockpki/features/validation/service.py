"""Simulated ACME-style domain validation with per-CA views of each domain."""

from typing import Dict, Optional, Tuple

import numpy as np

from ...core.structured_logging import LoggerMixin
from ...exceptions import NoControl, UnknownDomain
from .models import (
    DNS_RECORD_PREFIX,
    WELL_KNOWN_PREFIX,
    AdversaryConfig,
    Challenge,
    ChallengeType,
    SimulatedDomain,
)


class ValidationService(LoggerMixin):
    """Issues and checks challenges.

    Every CA sees a domain through its own vantage point: the owner's
    ``served_files`` plus whatever the adversary injected on that CA's
    impersonated edge.
    """

    def __init__(
        self,
        rng: np.random.Generator,
        deadline_seconds: float,
        adversary: Optional[AdversaryConfig] = None,
    ):
        self.rng = rng
        self.deadline_seconds = deadline_seconds
        self.adversary = adversary
        self.domains: Dict[str, SimulatedDomain] = {}
        self.pending: Dict[str, Challenge] = {}
        self._overlays: Dict[Tuple[str, str], Dict[str, str]] = {}
        self._counter = 0

    def register_domain(self, domain: SimulatedDomain) -> None:
        self.domains[domain.name] = domain

    def _domain(self, name: str) -> SimulatedDomain:
        try:
            return self.domains[name.strip().lower()]
        except KeyError:
            raise UnknownDomain(name) from None

    def issue_challenge(
        self,
        ca_id: str,
        domain_name: str,
        now: float,
        challenge_type: ChallengeType = "http-01",
        contract_address: str = "",
    ) -> Challenge:
        domain = self._domain(domain_name)
        self._counter += 1
        token = self.rng.bytes(16).hex()
        label = self.rng.bytes(8).hex()
        if challenge_type == "dns-01":
            # one TXT value per challenge
            path = f"{DNS_RECORD_PREFIX}{domain.name}#{label}"
        else:
            path = WELL_KNOWN_PREFIX + label
        challenge = Challenge(
            challenge_id=f"ch-{self._counter}",
            ca_id=ca_id,
            domain_name=domain.name,
            path=path,
            expected_token=token,
            issued_at=now,
            deadline=now + self.deadline_seconds,
            challenge_type=challenge_type,
            contract_address=contract_address,
        )
        self.pending[challenge.challenge_id] = challenge
        return challenge

    def controls(self, caller: str, ca_id: str, domain_name: str) -> bool:
        domain = self._domain(domain_name)
        if caller == domain.owner:
            return True
        adversary = self.adversary
        return (
            adversary is not None
            and caller == adversary.adversary_id
            and adversary.impersonates(ca_id, domain.name)
        )

    def complete_challenge(self, caller: str, challenge: Challenge) -> None:
        domain = self._domain(challenge.domain_name)
        if caller == domain.owner:
            domain.served_files[challenge.path] = challenge.expected_token
            return
        if self.controls(caller, challenge.ca_id, domain.name):
            # visible only from the impersonated CA's vantage point
            overlay = self._overlays.setdefault((challenge.ca_id, domain.name), {})
            overlay[challenge.path] = challenge.expected_token
            return
        raise NoControl(caller, domain.name, challenge.ca_id)

    def view(self, ca_id: str, domain_name: str, path: str) -> Optional[str]:
        domain = self._domain(domain_name)
        overlay = self._overlays.get((ca_id, domain.name), {})
        if path in overlay:
            return overlay[path]
        return domain.served_files.get(path)

    def is_compromised(self, ca_id: str) -> bool:
        return self.adversary is not None and ca_id in self.adversary.compromised_cas

    def check_challenge(self, ca_id: str, challenge: Challenge, now: float) -> bool:
        if self.pending.get(challenge.challenge_id) != challenge or challenge.ca_id != ca_id:
            return False
        del self.pending[challenge.challenge_id]

        if self.is_compromised(ca_id) and challenge.domain_name == self.adversary.target_domain:
            return True
        if now > challenge.deadline:
            self.logger.info("challenge_expired", ca=ca_id, domain=challenge.domain_name)
            return False
        return self.view(ca_id, challenge.domain_name, challenge.path) == challenge.expected_token
