"""Deterministic runtime for the central, domain and storage contracts.

Contract calls arrive as ``{"method": ..., "args": ...}`` transaction
payloads. Guard failures on the signing path are gas-charged no-ops, the way
bare ``if`` guards behave on chain; malformed parameters and missing funds
revert, which returns the transferred value.
"""

import copy
from typing import Any, Callable, Dict, List, Optional

from pydantic import ValidationError

from ...config.settings import settings
from ...core.canonical import canonical_json, derive_address
from ...core.structured_logging import LoggerMixin, protocol_logger
from ...exceptions import ContractRevert, InvalidGroupElement, InvalidParams
from ..certificates.encoding import canonical_encode
from ..certificates.models import CertificatePayload
from ..group_crypto.models import PartialSignature
from ..group_crypto.service import SchnorrService
from ..ledger.models import Transaction
from ..ledger.service import CallContext
from .models import (
    CaRecord,
    ContractEvent,
    CreateDomainContractArgs,
    DomainContractState,
    RuntimeState,
    StoredCertificateRecord,
)

CENTRAL_ADDRESS = derive_address("blockpki", "central-contract")
STORAGE_ADDRESS = derive_address("blockpki", "storage-contract")


def contract_call(sender: str, recipient: str, method: str, args: Dict[str, Any], value: int = 0, **kwargs: Any) -> Transaction:
    """Build an unsubmitted transaction calling ``method`` on ``recipient``."""
    payload = canonical_json({"method": method, "args": args}).decode("utf-8")
    return Transaction(sender=sender, recipient=recipient, payload=payload, value=value, **kwargs)


class ContractRuntime(LoggerMixin):
    def __init__(
        self,
        schnorr: SchnorrService,
        onchain_signature_check: Optional[bool] = None,
        issuance_timeout_blocks: Optional[int] = None,
    ):
        self.schnorr = schnorr
        self.onchain_signature_check = (
            settings.ONCHAIN_SIGNATURE_CHECK if onchain_signature_check is None else onchain_signature_check
        )
        self.issuance_timeout_blocks = (
            settings.ISSUANCE_TIMEOUT_BLOCKS if issuance_timeout_blocks is None else issuance_timeout_blocks
        )
        self.state = RuntimeState()
        self._methods: Dict[str, Dict[str, Callable[..., None]]] = {
            "central": {"create_domain_contract": self._create_domain_contract},
            "storage": {"store_certificate": self._store_certificate},
            "domain": {
                "send_cert_pub_nonce": self._send_cert_pub_nonce,
                "send_cert_signature": self._send_cert_signature,
                "renew": self._renew,
                "cancel": self._cancel,
                "withdraw_surplus": self._withdraw_surplus,
            },
        }

    # ContractHost

    def is_contract(self, address: str) -> bool:
        return address in (CENTRAL_ADDRESS, STORAGE_ADDRESS) or address in self.state.domains

    def snapshot(self) -> RuntimeState:
        return copy.deepcopy(self.state)

    def restore(self, snapshot: RuntimeState) -> None:
        self.state = copy.deepcopy(snapshot)

    def execute(self, ctx: CallContext) -> None:
        call = ctx.tx.call()
        if call is None:
            raise InvalidParams("Contract call without a method")

        recipient = ctx.tx.recipient
        if recipient == CENTRAL_ADDRESS:
            kind = "central"
        elif recipient == STORAGE_ADDRESS:
            kind = "storage"
        else:
            kind = "domain"

        handler = self._methods[kind].get(call["method"])
        if handler is None:
            raise InvalidParams(f"Unknown method '{call['method']}'")
        args = call.get("args") or {}
        if not isinstance(args, dict):
            raise InvalidParams("args must be an object")
        handler(ctx, args)

    # genesis and views

    def register_ca(self, ca_id: str, address: str, public_key_hex: str) -> None:
        """Publish a CA in the central registry (simulation genesis)."""
        self.state.central.ca_registry[ca_id] = CaRecord(ca_id=ca_id, address=address, public_key=public_key_hex)

    def ca_registry(self) -> Dict[str, CaRecord]:
        return copy.deepcopy(self.state.central.ca_registry)

    def ca_id_for(self, address: str) -> Optional[str]:
        record = self.state.central.ca_by_address(address)
        return record.ca_id if record else None

    def created_domain_contracts(self) -> List[str]:
        return list(self.state.central.created_domain_contracts)

    def domain_contract(self, address: str) -> DomainContractState:
        try:
            return self.state.domains[address].model_copy(deep=True)
        except KeyError:
            raise KeyError(f"No domain contract at {address}") from None

    def stored_certificates(self) -> List[StoredCertificateRecord]:
        return [r.model_copy(deep=True) for r in self.state.storage.records]

    # helpers

    def _emit(self, ctx: CallContext, kind: str, contract: DomainContractState, **data: Any) -> None:
        event = ContractEvent(
            kind=kind,
            contract_address=contract.address,
            block_height=ctx.height,
            round=contract.round,
            data=data,
        )
        ctx.emit(event.model_dump(exclude={"tx_hash"}))

    def _emit_new_round(self, ctx: CallContext, contract: DomainContractState, **extra: Any) -> None:
        cert_data = contract.cert_data
        self._emit(
            ctx,
            "newDomainContract",
            contract,
            requester=ctx.sender,
            subject_name=cert_data.subject_name,
            public_key=cert_data.public_key,
            not_before=cert_data.not_before,
            not_after=cert_data.not_after,
            authorized_cas=self._ca_ids(contract.authorized_cas),
            threshold=contract.threshold_T,
            **extra,
        )

    def _domain(self, ctx: CallContext) -> DomainContractState:
        contract = self.state.domains.get(ctx.tx.recipient)
        if contract is None:
            raise InvalidParams(f"No domain contract at {ctx.tx.recipient}")
        return contract

    def _ca_ids(self, addresses: List[str]) -> List[str]:
        return [self.ca_id_for(a) or a for a in addresses]

    def _signing_message(self, contract: DomainContractState) -> bytes:
        return canonical_encode(contract.cert_data, self._ca_ids(contract.nonce_order))

    # central contract

    def _create_domain_contract(self, ctx: CallContext, args: Dict[str, Any]) -> None:
        try:
            params = CreateDomainContractArgs.model_validate(args)
        except ValidationError as e:
            raise InvalidParams(f"Invalid domain contract parameters: {e.errors()[0]['msg']}") from e

        unknown = [a for a in params.authorized_cas if self.state.central.ca_by_address(a) is None]
        if unknown:
            raise InvalidParams(f"Unregistered CA addresses: {', '.join(unknown)}")

        address = derive_address("domain-contract", ctx.sender, str(ctx.tx.nonce))
        contract = DomainContractState(
            address=address,
            requester=ctx.sender,
            threshold_T=params.threshold_T,
            cert_data=params.cert_data,
            authorized_cas=list(params.authorized_cas),
            compensations=dict(params.compensations),
            first_t_mode=params.first_t_mode,
            created_height=ctx.height,
            round_started_height=ctx.height,
        )
        if ctx.value < contract.required_funds():
            raise ContractRevert(
                f"Supplied funds {ctx.value} below required {contract.required_funds()}",
                error_code="InsufficientFunds",
            )

        ctx.meter.charge_creation()
        ctx.meter.charge_storage(len(canonical_json(args)))

        ctx.transfer(CENTRAL_ADDRESS, address, ctx.value)
        contract.escrow = ctx.value
        self.state.domains[address] = contract
        self.state.central.created_domain_contracts.append(address)

        self._emit_new_round(ctx, contract)
        protocol_logger.contract_created(address, contract.cert_data.subject_name, contract.threshold_T, ctx.height)

    # domain contract

    def _send_cert_pub_nonce(self, ctx: CallContext, args: Dict[str, Any]) -> None:
        contract = self._domain(ctx)
        nonce_hex = args.get("nonce")
        try:
            raw = bytes.fromhex(str(nonce_hex))
        except ValueError as e:
            raise InvalidParams("nonce must be hex") from e

        sender = ctx.sender
        if (
            contract.closed
            or contract.all_cert_nonces
            or sender not in contract.authorized_cas
            or sender in contract.cert_pub_nonces
        ):
            self.logger.debug("nonce_ignored", contract=contract.address, sender=sender)
            return

        ctx.meter.charge_storage(len(raw))
        contract.cert_pub_nonces[sender] = raw.hex()
        contract.nonce_order.append(sender)
        contract.nonce_count += 1

        if contract.nonce_count == contract.threshold_T:
            contract.all_cert_nonces = True
            self._emit(ctx, "allCertNoncesGathered", contract, signers=self._ca_ids(contract.nonce_order))
            protocol_logger.nonce_round_complete(contract.address, ctx.height)

    def _partial_is_valid(self, contract: DomainContractState, sender: str, partial: PartialSignature) -> bool:
        group = self.schnorr.group
        try:
            nonces = [group.decode(bytes.fromhex(contract.cert_pub_nonces[a])) for a in contract.nonce_order]
            record = self.state.central.ca_by_address(sender)
            key = group.element_from_hex(record.public_key) if record else None
        except InvalidGroupElement:
            return False
        if key is None:
            return False
        e = self.schnorr.challenge(self.schnorr.combine_nonces(nonces), self._signing_message(contract))
        own_nonce = nonces[contract.nonce_order.index(sender)]
        return self.schnorr.partial_is_valid(partial, e, own_nonce, key)

    def _send_cert_signature(self, ctx: CallContext, args: Dict[str, Any]) -> None:
        contract = self._domain(ctx)
        try:
            s = int(str(args.get("s")), 16)
        except ValueError as e:
            raise InvalidParams("s must be a hex scalar") from e

        sender = ctx.sender
        # nonce_order holds only authorized CAs, and in first_T_mode only the first T of them
        if (
            contract.closed
            or not contract.all_cert_nonces
            or sender not in contract.nonce_order
            or sender in contract.paid
            or sender in contract.cert_sigs
        ):
            self.logger.debug("signature_ignored", contract=contract.address, sender=sender)
            return

        partial = PartialSignature(signer_id=self.ca_id_for(sender) or sender, s=s % self.schnorr.params.q)
        if self.onchain_signature_check:
            ctx.meter.charge_signature_check()
            if not self._partial_is_valid(contract, sender, partial):
                contract.rejected_sigs.append(sender)
                self.logger.info("signature_rejected_onchain", contract=contract.address, sender=sender)
                return

        ctx.meter.charge_storage(self.schnorr.group.scalar_size)
        contract.cert_sigs[sender] = partial
        contract.sig_count += 1

        compensation = contract.compensations[sender]
        ctx.transfer(contract.address, sender, compensation)
        contract.escrow -= compensation
        contract.paid.append(sender)

        if contract.sig_count == contract.threshold_T:
            self._emit(ctx, "allCertSignaturesGathered", contract, signers=self._ca_ids(list(contract.cert_sigs)))
            protocol_logger.signature_round_complete(contract.address, ctx.height)

    def _renew(self, ctx: CallContext, args: Dict[str, Any]) -> None:
        contract = self._domain(ctx)
        if ctx.sender != contract.requester:
            raise InvalidParams("Only the requester can renew")
        if contract.closed:
            raise ContractRevert("Contract is closed", error_code="ContractClosed")
        if not contract.round_complete:
            raise ContractRevert("Renewal refused while a round is in progress", error_code="RoundInProgress")
        try:
            cert_data = contract.cert_data.with_validity(int(args["not_before"]), int(args["not_after"]))
        except (KeyError, TypeError, ValueError, ValidationError) as e:
            raise InvalidParams(f"Invalid validity period: {e}") from e

        funds = contract.escrow + ctx.value
        if funds < contract.required_funds():
            raise ContractRevert(
                f"Escrow {funds} below required {contract.required_funds()}",
                error_code="InsufficientFunds",
            )

        ctx.meter.charge_storage(len(canonical_json({"not_before": cert_data.not_before, "not_after": cert_data.not_after})))
        contract.cert_data = cert_data
        contract.escrow = funds
        contract.cert_pub_nonces = {}
        contract.nonce_order = []
        contract.nonce_count = 0
        contract.all_cert_nonces = False
        contract.cert_sigs = {}
        contract.sig_count = 0
        contract.paid = []
        contract.rejected_sigs = []
        contract.round += 1
        contract.round_started_height = ctx.height

        # CAs pick up a renewal round the same way as a fresh contract
        self._emit_new_round(ctx, contract, renewal=True)

    def _cancel(self, ctx: CallContext, args: Dict[str, Any]) -> None:
        contract = self._domain(ctx)
        if ctx.sender != contract.requester:
            raise InvalidParams("Only the requester can cancel")
        if contract.closed or contract.round_complete:
            raise ContractRevert("Nothing to cancel", error_code="NothingToCancel")
        waited = ctx.height - contract.round_started_height
        if waited < self.issuance_timeout_blocks:
            raise ContractRevert(
                f"Cancel allowed after {self.issuance_timeout_blocks} blocks, waited {waited}",
                error_code="TooEarly",
            )
        refund = contract.escrow
        ctx.transfer(contract.address, contract.requester, refund)
        contract.escrow = 0
        contract.closed = True
        self.logger.info("domain_contract_cancelled", contract=contract.address, refund=refund)

    def _withdraw_surplus(self, ctx: CallContext, args: Dict[str, Any]) -> None:
        contract = self._domain(ctx)
        if ctx.sender != contract.requester:
            raise InvalidParams("Only the requester can withdraw")
        surplus = contract.escrow - contract.outstanding_compensation()
        if surplus <= 0:
            return
        ctx.transfer(contract.address, contract.requester, surplus)
        contract.escrow -= surplus

    # storage contract

    def _store_certificate(self, ctx: CallContext, args: Dict[str, Any]) -> None:
        certificate = args.get("certificate")
        ctx.meter.charge_storage(len(canonical_json(certificate)))

        records = self.state.storage.records
        record = StoredCertificateRecord(
            index=len(records),
            tx_hash=ctx.tx.tx_hash,
            sender=ctx.sender,
            block_height=ctx.height,
        )
        try:
            payload = CertificatePayload.from_wire(certificate)
            record.cert_data = payload.cert_data
            record.ca_ids = list(payload.issuers)
            record.signature = payload.schnorr_signature
        except (KeyError, TypeError, ValueError, ValidationError):
            record.raw_payload = canonical_json(certificate).decode("utf-8")
        records.append(record)
