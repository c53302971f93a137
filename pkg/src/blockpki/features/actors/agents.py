"""Requester and CA agents driven by the simulation event loop."""

from typing import TYPE_CHECKING, Dict, List, Optional, Tuple

from ...core.structured_logging import LoggerMixin, protocol_logger
from ...exceptions import AssemblyFailed, BlockPKIError, InvalidGroupElement, NoControl
from ...metrics import ISSUANCE_BLOCKS, ISSUANCE_FAILURES, safe_inc, safe_observe
from ..certificates.encoding import canonical_encode, nonce_message
from ..certificates.models import BlockPkiCertificate, CertificatePayload
from ..contracts.models import CertData, ContractEvent, DomainContractState
from ..contracts.runtime import CENTRAL_ADDRESS, contract_call
from ..group_crypto.models import KeyPair, NoncePair, ProofOfPossession
from ..ledger.models import Transaction
from ..merkle.service import build_tree, prove_inclusion
from ..validation.models import Challenge, SimulatedDomain
from .models import (
    CaBehavior,
    IssuanceFailure,
    IssuanceMetrics,
    IssuanceOutcome,
    RequesterState,
    TxCost,
)

if TYPE_CHECKING:
    from .simulation import Simulation

ROUND_METHODS = ("send_cert_pub_nonce", "send_cert_signature")


class CaAgent(LoggerMixin):
    """A certification authority watching the chain for work."""

    def __init__(
        self,
        sim: "Simulation",
        ca_id: str,
        address: str,
        keypair: KeyPair,
        pop: ProofOfPossession,
        behavior: CaBehavior = "honest",
    ):
        self.sim = sim
        self.ca_id = ca_id
        self.agent_id = ca_id
        self.address = address
        self.keypair = keypair
        self.pop = pop
        self.behavior = behavior
        self._nonces: Dict[Tuple[str, int], NoncePair] = {}
        self.sent: List[str] = []

    def on_block(self, events: List[ContractEvent]) -> None:
        for tx, delay in self.ca_event_loop_step(events):
            self.sim.submit(tx, extra_delay=delay, on_submitted=self.sent.append)

    def ca_event_loop_step(self, events: List[ContractEvent]) -> List[Tuple[Transaction, float]]:
        """Transactions (with a validation delay) this CA answers ``events`` with."""
        if self.behavior == "unresponsive":
            return []

        out: List[Tuple[Transaction, float]] = []
        for event in events:
            if event.kind == "newDomainContract" and self.ca_id in event.data.get("authorized_cas", []):
                planned = self._on_new_contract(event)
                if planned is not None:
                    out.append(planned)
            elif event.kind == "allCertNoncesGathered" and (event.contract_address, event.round) in self._nonces:
                tx = self._on_nonces_gathered(event)
                if tx is not None:
                    out.append((tx, 0.0))
        return out

    def _validate(self, contract: DomainContractState, now: float) -> Tuple[bool, float]:
        validation = self.sim.validation
        delay = self.sim.draw_validation_delay()
        domain_name = contract.cert_data.subject_name

        if self.behavior == "compromised" and validation.is_compromised(self.ca_id):
            adversary = validation.adversary
            if adversary is not None and domain_name == adversary.target_domain:
                return True, 0.0

        try:
            challenge = validation.issue_challenge(
                self.ca_id, domain_name, now, contract_address=contract.address
            )
        except BlockPKIError:
            return False, delay
        self.sim.deliver_challenge(challenge)
        return validation.check_challenge(self.ca_id, challenge, now + delay), delay

    def _on_new_contract(self, event: ContractEvent) -> Optional[Tuple[Transaction, float]]:
        contract = self.sim.runtime.domain_contract(event.contract_address)
        passed, delay = self._validate(contract, self.sim.now)
        if not passed:
            self.logger.info("validation_failed", ca=self.ca_id, domain=contract.cert_data.subject_name)
            return None

        extra = f"{contract.address}:{contract.round}".encode("utf-8")
        nonce = self.sim.schnorr.gen_nonce(self.keypair, nonce_message(contract.cert_data), extra)
        self._nonces[(contract.address, contract.round)] = nonce
        tx = contract_call(
            self.address,
            contract.address,
            "send_cert_pub_nonce",
            {"nonce": self.sim.group.element_hex(nonce.public)},
        )
        return tx, delay

    def _on_nonces_gathered(self, event: ContractEvent) -> Optional[Transaction]:
        contract = self.sim.runtime.domain_contract(event.contract_address)
        nonce = self._nonces.pop((contract.address, contract.round), None)
        if nonce is None or self.address not in contract.nonce_order:
            return None

        schnorr = self.sim.schnorr
        group = self.sim.group
        if self.behavior == "garbage_signer":
            s = self.sim.draw_garbage_scalar()
        else:
            issuers = list(event.data.get("signers", []))
            message = canonical_encode(contract.cert_data, issuers)
            try:
                nonces = [group.decode(bytes.fromhex(contract.cert_pub_nonces[a])) for a in contract.nonce_order]
            except InvalidGroupElement:
                self.logger.warning("bad_nonce_in_contract", ca=self.ca_id, contract=contract.address)
                return None
            e = schnorr.challenge(schnorr.combine_nonces(nonces), message)
            s = schnorr.partial_sign(self.keypair, nonce, e, signer_id=self.ca_id).s
        return contract_call(self.address, contract.address, "send_cert_signature", {"s": group.scalar_hex(s)})


class RequesterAgent(LoggerMixin):
    """Domain owner (or an adversary posing as one) running the issuance workflow."""

    def __init__(
        self,
        sim: "Simulation",
        agent_id: str,
        address: str,
        domain: SimulatedDomain,
        keypair: KeyPair,
        validation_id: Optional[str] = None,
        log_certificate: bool = True,
    ):
        self.sim = sim
        self.agent_id = agent_id
        self.address = address
        self.domain = domain
        self.keypair = keypair
        self.validation_id = validation_id or address
        self.log_certificate = log_certificate

        self.state: Optional[RequesterState] = None
        self.contract_address: Optional[str] = None
        self.authorized_ca_ids: List[str] = []
        self.request_tx: Optional[str] = None
        self.storage_tx: Optional[str] = None
        self.cancel_tx: Optional[str] = None
        self.cancelling = False
        self.payload: Optional[CertificatePayload] = None
        self.failure: Optional[IssuanceFailure] = None
        self.certificate: Optional[BlockPkiCertificate] = None
        self.start_height = 0
        self.start_time = 0.0
        self.round_start_height = 0
        self.done = None
        self.misbehavior: Dict[str, str] = {}

    # workflow entry points

    def _begin(self, tx: Transaction) -> None:
        self.start_height = self.sim.ledger.height
        self.start_time = self.sim.now
        self.storage_tx = self.cancel_tx = self.request_tx = None
        self.cancelling = False
        self.payload = self.failure = self.certificate = None
        self.misbehavior = {}
        self.done = self.sim.env.event()
        self.state = "created_contract"
        self.sim.submit(tx, on_submitted=self._set_request_tx, on_failed=self._submission_failed)

    def _set_request_tx(self, tx_hash: str) -> None:
        self.request_tx = tx_hash

    def _submission_failed(self, error: BlockPKIError) -> None:
        if self.failure is None:
            self._fail(error.error_code, error.detail)
        self._finish()

    def request_certificate(
        self,
        authorized_ca_ids: List[str],
        compensation_per_ca: int,
        lifetime_seconds: int,
        threshold: Optional[int] = None,
        first_t_mode: bool = False,
        funds: Optional[int] = None,
    ) -> None:
        """Step 1: create the domain contract with escrowed compensations."""
        registry = self.sim.runtime.ca_registry()
        addresses = [registry[ca_id].address for ca_id in authorized_ca_ids]
        not_before = int(self.sim.now)
        cert_data = CertData(
            subject_name=self.domain.name,
            public_key=self.sim.group.element_hex(self.keypair.public),
            not_before=not_before,
            not_after=not_before + lifetime_seconds,
        )
        compensations = {a: compensation_per_ca for a in addresses}
        t = threshold if threshold is not None else len(addresses)
        args = {
            "cert_data": cert_data.model_dump(),
            "authorized_cas": addresses,
            "compensations": compensations,
            "threshold": t,
            "first_t_mode": first_t_mode,
        }
        value = funds if funds is not None else compensation_per_ca * t
        self.contract_address = None
        self.authorized_ca_ids = list(authorized_ca_ids)
        self._begin(contract_call(self.address, CENTRAL_ADDRESS, "create_domain_contract", args, value=value))

    def renew(self, lifetime_seconds: int, funds: Optional[int] = None) -> None:
        """Fresh signing round on the existing contract for a new validity period."""
        if self.contract_address is None:
            raise BlockPKIError("Nothing to renew: no domain contract yet")
        contract = self.sim.runtime.domain_contract(self.contract_address)
        not_before = int(self.sim.now)
        args = {"not_before": not_before, "not_after": not_before + lifetime_seconds}
        value = funds if funds is not None else max(contract.required_funds() - contract.escrow, 0)
        self._begin(contract_call(self.address, self.contract_address, "renew", args, value=value))

    def complete_challenge(self, challenge: Challenge) -> None:
        try:
            self.sim.validation.complete_challenge(self.validation_id, challenge)
        except NoControl:
            self.logger.debug("challenge_not_completed", ca=challenge.ca_id, domain=challenge.domain_name)

    # event loop

    def on_block(self, events: List[ContractEvent]) -> None:
        if self.state in (None, "done"):
            return
        ledger = self.sim.ledger

        if self.cancelling:
            if self.cancel_tx and not ledger.is_pending(self.cancel_tx):
                self._finish()
            return

        if self.state == "created_contract" and self.request_tx and not ledger.is_pending(self.request_tx):
            tx = ledger.get_tx(self.request_tx)
            if tx.status != "success":
                self._fail(tx.error or "Reverted", tx.error or "")
                self._finish()
                return
            if self.contract_address is None:
                created = [log for log in tx.logs if log["kind"] == "newDomainContract"]
                self.contract_address = created[0]["contract_address"]
            self.round_start_height = ledger.height
            self.state = "awaiting_nonces"

        mine = [e for e in events if e.contract_address == self.contract_address]
        if self.state == "awaiting_nonces" and any(e.kind == "allCertNoncesGathered" for e in mine):
            self.state = "awaiting_sigs"
        if self.state == "awaiting_sigs" and any(e.kind == "allCertSignaturesGathered" for e in mine):
            self._publish()

        if self.state in ("awaiting_nonces", "awaiting_sigs"):
            if ledger.height - self.round_start_height >= self.sim.scenario.issuance_timeout_blocks:
                self._timeout()
            return

        if self.state == "publishing" and self.storage_tx and not ledger.is_pending(self.storage_tx):
            self.state = "awaiting_confirmations"
        if self.state == "awaiting_confirmations":
            if ledger.confirmations(self.storage_tx) >= ledger.config.confirmation_depth:
                self.certificate = self.sim.certificates.certificate_for(ledger, self.payload, self.storage_tx)
                self._finish()

    def _publish(self) -> None:
        contract = self.sim.runtime.domain_contract(self.contract_address)
        try:
            self.payload = self.sim.certificates.merge_signatures(contract, self.sim.runtime.ca_registry())
        except AssemblyFailed as e:
            for ca_id in e.bad_ca_ids:
                self.misbehavior[ca_id] = "garbage_signature"
            self._fail("AssemblyFailed", e.detail, bad_ca_ids=e.bad_ca_ids)
            self._finish()
            return

        tx = self.sim.certificates.storage_call(self.address, self.payload)
        if self.log_certificate:
            self.state = "publishing"
            self.sim.submit(tx, on_submitted=self._set_storage_tx, on_failed=self._submission_failed)
            return

        # never logged: a certificate with a fabricated transaction and proof
        forged = tx.model_copy(update={"nonce": self.sim.ledger.accounts[self.address].nonce})
        forged.tx_hash = forged.compute_hash()
        proof = prove_inclusion(build_tree([bytes.fromhex(forged.tx_hash)]), 0)
        self.certificate = BlockPkiCertificate(
            payload=self.payload,
            transaction=forged,
            block_no=self.sim.ledger.height,
            inclusion_proof=proof,
            group=self.sim.group.name,
        )
        self._finish()

    def _set_storage_tx(self, tx_hash: str) -> None:
        self.storage_tx = tx_hash

    def _timeout(self) -> None:
        contract = self.sim.runtime.domain_contract(self.contract_address)
        registry = {r.address: r.ca_id for r in self.sim.runtime.ca_registry().values()}
        if not contract.all_cert_nonces:
            blocking = [registry[a] for a in contract.authorized_cas if a not in contract.cert_pub_nonces]
        else:
            blocking = [registry[a] for a in contract.nonce_order if a not in contract.cert_sigs]
        for ca_id in blocking:
            self.misbehavior.setdefault(ca_id, "unresponsive")
        blocks = self.sim.ledger.height - self.round_start_height
        self._fail("IssuanceTimeout", f"no progress after {blocks} blocks", blocking_ca_ids=sorted(blocking))
        cancel = contract_call(self.address, self.contract_address, "cancel", {})
        self.cancelling = True
        self.sim.submit(cancel, on_submitted=self._set_cancel_tx, on_failed=self._submission_failed)

    def _set_cancel_tx(self, tx_hash: str) -> None:
        self.cancel_tx = tx_hash

    def _fail(self, reason: str, detail: str, **kwargs: List[str]) -> None:
        self.failure = IssuanceFailure(reason=reason, detail=detail, **kwargs)
        ids = kwargs.get("bad_ca_ids") or kwargs.get("blocking_ca_ids") or []
        safe_inc(ISSUANCE_FAILURES, reason=reason)
        protocol_logger.issuance_failed(self.domain.name, reason, ids)

    def _finish(self) -> None:
        self.state = "done"
        if self.certificate is not None and self.storage_tx is not None:
            height, _ = self.sim.ledger.locate_tx(self.storage_tx)
            safe_observe(ISSUANCE_BLOCKS, self.sim.ledger.height - self.start_height)
            protocol_logger.certificate_logged(
                self.domain.name,
                self.storage_tx,
                height,
                self.sim.ledger.height - self.start_height,
            )
        if self.done is not None and not self.done.triggered:
            self.done.succeed()

    # results

    def _costs(self) -> List[TxCost]:
        ledger = self.sim.ledger
        own = {h for h in (self.request_tx, self.storage_tx, self.cancel_tx) if h}
        costs = []
        for height, tx in ledger.iter_transactions():
            if height <= self.start_height:
                continue
            ours = tx.tx_hash in own or (tx.recipient == self.contract_address and tx.method in ROUND_METHODS)
            if ours:
                costs.append(
                    TxCost(
                        tx_hash=tx.tx_hash,
                        method=tx.method,
                        sender=tx.sender,
                        block_height=height,
                        gas_used=tx.gas_used,
                        fee=tx.fee,
                        status=tx.status,
                    )
                )
        return costs

    def outcome(self) -> IssuanceOutcome:
        costs = self._costs()
        metrics = IssuanceMetrics(
            blocks_elapsed=self.sim.ledger.height - self.start_height,
            wall_time_simulated=self.sim.now - self.start_time,
            tx_count=len(costs),
            total_gas=sum(c.gas_used for c in costs),
            total_fees=sum(c.fee for c in costs),
            per_tx=costs,
            misbehavior=dict(self.misbehavior),
        )
        round_no = 0
        if self.contract_address is not None:
            round_no = self.sim.runtime.domain_contract(self.contract_address).round
        return IssuanceOutcome(
            domain=self.domain.name,
            contract_address=self.contract_address,
            round=round_no,
            certificate=self.certificate,
            failure=self.failure,
            metrics=metrics,
            logged=self.certificate is not None and self.storage_tx is not None,
        )
