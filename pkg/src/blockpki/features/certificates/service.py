"""Certificate assembly and client-side verification."""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

from pydantic import ValidationError

from ...core.structured_logging import LoggerMixin, protocol_logger
from ...exceptions import (
    AssemblyFailed,
    BlockPKIError,
    CertificateFormatError,
    InvalidGroupElement,
    TrustStoreError,
)
from ...metrics import CERT_VERIFICATIONS, safe_inc
from ..contracts.models import CaRecord, DomainContractState
from ..contracts.runtime import STORAGE_ADDRESS, contract_call
from ..group_crypto.groups import get_group
from ..group_crypto.models import GroupParams, ProofOfPossession, SchnorrSignature
from ..group_crypto.service import SchnorrService
from ..ledger.models import Transaction
from ..ledger.persistence import ChainArchive
from ..ledger.view import ChainView
from ..merkle.models import InclusionProof
from ..merkle.service import verify_inclusion
from .encoding import canonical_encode
from .models import (
    BlockPkiCertificate,
    CertificatePayload,
    ClientMode,
    ClientTrustStore,
    TrustedCa,
    VerificationResult,
)

INCLUSION_NOT_CHECKED = "inclusion proof not checked: unaware clients cannot tell whether the certificate is logged"


class CertificateService(LoggerMixin):
    def __init__(self, schnorr: SchnorrService):
        self.schnorr = schnorr
        self.group = schnorr.group

    # assembly

    def merge_signatures(self, contract: DomainContractState, registry: Dict[str, CaRecord]) -> CertificatePayload:
        """Combine the stored partials into a payload whose signature verifies.

        Raises ``AssemblyFailed`` naming every CA whose partial fails
        ``g^s·Q^e = N``.
        """
        if not contract.round_complete:
            raise ValueError(f"Contract {contract.address} has not gathered all signatures")

        by_address = {record.address: record for record in registry.values()}
        issuers = [by_address[a].ca_id for a in contract.nonce_order]

        nonces: Dict[str, Any] = {}
        keys: Dict[str, Any] = {}
        undecodable: List[str] = []
        for address, ca_id in zip(contract.nonce_order, issuers):
            try:
                nonces[ca_id] = self.group.decode(bytes.fromhex(contract.cert_pub_nonces[address]))
                keys[ca_id] = self.group.element_from_hex(by_address[address].public_key)
            except (InvalidGroupElement, ValueError):
                undecodable.append(ca_id)
        if undecodable:
            raise AssemblyFailed(undecodable)

        message = canonical_encode(contract.cert_data, issuers)
        e = self.schnorr.challenge(self.schnorr.combine_nonces(list(nonces.values())), message)
        partials = list(contract.cert_sigs.values())
        signature = self.schnorr.combine_partials(partials, e)

        q_bar = self.schnorr.combine_keys(list(keys.values()))
        if not self.schnorr.verify_multisig(signature, q_bar, message):
            bad = self.schnorr.find_bad_partials(partials, e, nonces, keys)
            raise AssemblyFailed(bad or issuers)

        data = contract.cert_data
        return CertificatePayload(
            subject_name=data.subject_name,
            issuers=issuers,
            not_before=data.not_before,
            not_after=data.not_after,
            public_key=data.public_key,
            schnorr_signature=signature,
        )

    def storage_call(self, sender: str, payload: CertificatePayload, **kwargs: Any) -> Transaction:
        return contract_call(
            sender,
            STORAGE_ADDRESS,
            "store_certificate",
            {"certificate": payload.to_wire(self.group)},
            **kwargs,
        )

    def certificate_for(self, chain: ChainView, payload: CertificatePayload, tx_hash: str) -> BlockPkiCertificate:
        block_no, proof = chain.get_inclusion_proof(tx_hash)
        return BlockPkiCertificate(
            payload=payload,
            transaction=chain.get_tx(tx_hash).model_copy(deep=True),
            block_no=block_no,
            inclusion_proof=proof,
            group=self.group.name,
        )

    def assemble_certificate(
        self,
        chain: ChainView,
        contract: DomainContractState,
        registry: Dict[str, CaRecord],
        storage_tx_hash: str,
    ) -> BlockPkiCertificate:
        payload = self.merge_signatures(contract, registry)
        return self.certificate_for(chain, payload, storage_tx_hash)

    # verification

    def decode_payload(self, tx: Transaction) -> Optional[CertificatePayload]:
        call = tx.call()
        if call is None or call.get("method") != "store_certificate":
            return None
        try:
            return CertificatePayload.from_wire(call["args"]["certificate"])
        except (KeyError, TypeError, ValueError, ValidationError):
            return None

    def _reject(self, reason: str, cert: BlockPkiCertificate, mode: str, warnings: List[str]) -> VerificationResult:
        safe_inc(CERT_VERIFICATIONS, mode=mode, outcome=reason)
        protocol_logger.certificate_rejected(cert.payload.subject_name, mode, reason)
        return VerificationResult(accepted=False, reason=reason, warnings=warnings)

    def verify_certificate(
        self,
        cert: BlockPkiCertificate,
        trust: ClientTrustStore,
        visited_domain: str,
        now: int,
    ) -> VerificationResult:
        mode = trust.client_mode
        warnings: List[str] = []

        payload = self.decode_payload(cert.transaction)
        if payload is None or payload != cert.payload:
            return self._reject("Malformed", cert, mode, warnings)
        try:
            cert_data = payload.cert_data
        except ValidationError:
            return self._reject("Malformed", cert, mode, warnings)

        if visited_domain.strip().lower() != cert_data.subject_name:
            return self._reject("WrongDomain", cert, mode, warnings)
        if now < cert_data.not_before:
            return self._reject("NotYetValid", cert, mode, warnings)
        if now > cert_data.not_after:
            return self._reject("Expired", cert, mode, warnings)

        issuers = payload.issuers
        if len(set(issuers)) != len(issuers):
            return self._reject("Malformed", cert, mode, warnings)
        if any(ca_id not in trust.trusted_cas for ca_id in issuers):
            return self._reject("UntrustedIssuer", cert, mode, warnings)
        if len(issuers) < trust.threshold:
            return self._reject("BelowThreshold", cert, mode, warnings)

        q_bar = self.schnorr.combine_keys([trust.trusted_cas[ca_id].public_key for ca_id in issuers])
        if not self.schnorr.verify_multisig(payload.schnorr_signature, q_bar, payload.message()):
            return self._reject("BadSignature", cert, mode, warnings)

        if mode == "unaware":
            warnings.append(INCLUSION_NOT_CHECKED)
        else:
            reason = self._check_inclusion(cert, trust)
            if reason is not None:
                return self._reject(reason, cert, mode, warnings)

        safe_inc(CERT_VERIFICATIONS, mode=mode, outcome="accept")
        return VerificationResult(accepted=True, warnings=warnings)

    def _check_inclusion(self, cert: BlockPkiCertificate, trust: ClientTrustStore) -> Optional[str]:
        headers = trust.headers
        if not 0 <= cert.block_no < len(headers) or headers[cert.block_no].height != cert.block_no:
            return "UnknownBlock"
        header = headers[cert.block_no]

        tx_hash = cert.transaction.compute_hash()
        if not verify_inclusion(bytes.fromhex(header.tx_root), bytes.fromhex(tx_hash), cert.inclusion_proof):
            return "BadInclusion"

        if trust.client_mode == "full":
            chain = trust.full_chain
            if chain is None or not chain.has_block(cert.block_no):
                return "UnknownBlock"
            block = chain.block(cert.block_no)
            if block.header != header or not _links(chain.header_chain()):
                return "BadInclusion"
            index = cert.inclusion_proof.leaf_index
            if index >= len(block.transactions) or block.transactions[index].tx_hash != tx_hash:
                return "BadInclusion"
            if block.transactions[index].status != "success":
                return "BadInclusion"
        return None


def _links(headers: List[Any]) -> bool:
    return all(headers[h].parent_hash == headers[h - 1].block_hash for h in range(1, len(headers)))


# trust stores


def build_trust_store(
    group_name: str,
    cas: Iterable[Tuple[str, Any, ProofOfPossession]],
    threshold: int,
    mode: ClientMode = "light",
    chain: Optional[ChainView] = None,
    require_pop: bool = True,
) -> ClientTrustStore:
    """Trust store from (ca_id, public key, PoP) triples.

    With ``require_pop`` every key must come with a valid proof of
    possession, which rules out rogue keys.
    """
    schnorr = SchnorrService(GroupParams.named(group_name))
    trusted: Dict[str, TrustedCa] = {}
    for ca_id, public_key, pop in cas:
        if require_pop and not schnorr.verify_pop(pop, public_key):
            raise TrustStoreError(f"Proof of possession for {ca_id} does not verify")
        trusted[ca_id] = TrustedCa(ca_id=ca_id, public_key=public_key, pop=pop)
    return with_chain(ClientTrustStore(group=group_name, trusted_cas=trusted, threshold=threshold), mode, chain)


def with_chain(trust: ClientTrustStore, mode: ClientMode, chain: Optional[ChainView] = None) -> ClientTrustStore:
    """Same trust anchors seen by a client of tier ``mode``."""
    headers = chain.header_chain() if chain is not None and mode != "unaware" else []
    full_chain = None
    if mode == "full" and chain is not None:
        full_chain = chain if isinstance(chain, ChainArchive) else ChainArchive.from_ledger(chain)
    return trust.model_copy(update={"client_mode": mode, "headers": headers, "full_chain": full_chain})


def trust_store_to_dict(trust: ClientTrustStore) -> Dict[str, Any]:
    group = get_group(trust.group)
    return {
        "group": trust.group,
        "threshold": trust.threshold,
        "trustedCAs": {
            ca_id: {
                "publicKey": group.element_hex(ca.public_key),
                "pop": ca.pop.pop_sig.to_wire(group),
            }
            for ca_id, ca in sorted(trust.trusted_cas.items())
        },
    }


def save_trust_store(trust: ClientTrustStore, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(trust_store_to_dict(trust), sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load_trust_store(
    path: Union[str, Path],
    mode: ClientMode = "light",
    chain: Optional[ChainView] = None,
    require_pop: bool = True,
) -> ClientTrustStore:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        group = get_group(data["group"])
        cas = [
            (
                ca_id,
                group.element_from_hex(entry["publicKey"]),
                ProofOfPossession(owner_id=ca_id, pop_sig=SchnorrSignature.from_wire(entry["pop"])),
            )
            for ca_id, entry in data["trustedCAs"].items()
        ]
        threshold = int(data["threshold"])
    except (OSError, KeyError, TypeError, ValueError, BlockPKIError) as e:
        raise TrustStoreError(f"Cannot load trust store {path}: {e}") from e
    return build_trust_store(group.name, cas, threshold, mode, chain, require_pop)


# certificate files


def certificate_to_dict(cert: BlockPkiCertificate) -> Dict[str, Any]:
    group = get_group(cert.group)
    return {
        "group": cert.group,
        "certificate": cert.payload.to_wire(group),
        "transaction": cert.transaction.model_dump(mode="json"),
        "blockNo": cert.block_no,
        "inclusionProof": cert.inclusion_proof.to_json(),
    }


def dumps_certificate(cert: BlockPkiCertificate) -> str:
    return json.dumps(certificate_to_dict(cert), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def loads_certificate(text: str) -> BlockPkiCertificate:
    try:
        data = json.loads(text)
        get_group(data["group"])
        return BlockPkiCertificate(
            group=data["group"],
            payload=CertificatePayload.from_wire(data["certificate"]),
            transaction=Transaction.model_validate(data["transaction"]),
            block_no=int(data["blockNo"]),
            inclusion_proof=InclusionProof.from_json(data["inclusionProof"]),
        )
    except (KeyError, TypeError, ValueError, ValidationError) as e:
        raise CertificateFormatError(f"Malformed certificate file: {e}") from e


def save_certificate(cert: BlockPkiCertificate, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_certificate(cert), encoding="utf-8")


def load_certificate(path: Union[str, Path]) -> BlockPkiCertificate:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CertificateFormatError(f"Cannot read certificate {path}: {e}") from e
    return loads_certificate(text)
