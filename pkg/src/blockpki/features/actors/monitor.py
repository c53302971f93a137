from typing import Any, Dict, List, NamedTuple, Optional, Set, Tuple

from ...core.structured_logging import protocol_logger
from ..certificates.models import CertificatePayload
from ..contracts.events import scan_events
from ..contracts.runtime import STORAGE_ADDRESS
from ..ledger.view import ChainView
from .models import Anomaly


class SignedRound(NamedTuple):
    requester: str
    data: Dict[str, Any]
    signers: Set[str]
    height: int  # block of allCertSignaturesGathered


def completed_rounds(chain: ChainView) -> List[SignedRound]:
    """Domain contract rounds whose signature round completed, in block order."""
    opened: Dict[Tuple[str, int], Dict[str, Any]] = {}
    rounds: List[SignedRound] = []
    for event in scan_events(chain, kinds=("newDomainContract", "allCertSignaturesGathered")):
        key = (event.contract_address, event.round)
        if event.kind == "newDomainContract":
            opened[key] = event.data
        elif key in opened:
            data = opened[key]
            rounds.append(
                SignedRound(data.get("requester", ""), data, set(event.data.get("signers", [])), event.block_height)
            )
    return rounds


def _produced_by(payload: CertificatePayload, signed: SignedRound, height: int) -> bool:
    data = signed.data
    return (
        signed.height <= height
        and data.get("subject_name") == payload.subject_name.strip().lower()
        and data.get("public_key") == payload.public_key
        and data.get("not_before") == payload.not_before
        and data.get("not_after") == payload.not_after
        and signed.signers == set(payload.issuers)
    )


def issuing_requester(payload: CertificatePayload, rounds: List[SignedRound], owner: str, height: int) -> Optional[str]:
    """Requester whose round produced ``payload`` by ``height``, preferring ``owner``."""
    requesters = [r.requester for r in rounds if _produced_by(payload, r, height)]
    if owner in requesters:
        return owner
    return requesters[0] if requesters else None


def monitor_scan(chain: ChainView, owner_registry: Dict[str, str], from_height: int = 0) -> List[Anomaly]:
    """Flag logged certificates for registered domains whose issuance the owner did not start.

    ``owner_registry`` maps domain name to the owner's ledger address. A logged
    certificate is legitimate when a domain contract round opened by the owner
    signed exactly that certificate data with exactly those issuers. The sender
    of the storage transaction does not matter, so a mirror may re-log the
    owner's certificate. Works from the chain alone, so a dump loaded with
    ``load_chain`` can be audited the same way as a live ledger. Certificates
    that never reach the chain are out of reach here.
    """
    registry = {name.strip().lower(): owner for name, owner in owner_registry.items()}
    anomalies: List[Anomaly] = []
    rounds: Optional[List[SignedRound]] = None
    for height, tx in chain.iter_transactions():
        if height < from_height or tx.recipient != STORAGE_ADDRESS or tx.status != "success":
            continue
        call = tx.call()
        try:
            payload = CertificatePayload.from_wire(call["args"]["certificate"])
        except (KeyError, TypeError, ValueError):
            continue

        owner = registry.get(payload.subject_name.strip().lower())
        if owner is None:
            continue
        if rounds is None:
            rounds = completed_rounds(chain)
        requester = issuing_requester(payload, rounds, owner, height)
        if requester == owner:
            continue
        anomaly = Anomaly(
            domain=payload.subject_name,
            tx_hash=tx.tx_hash,
            sender=tx.sender,
            registered_owner=owner,
            block_height=height,
            issuing_requester=requester,
        )
        protocol_logger.anomaly_detected(anomaly.domain, anomaly.tx_hash, anomaly.sender)
        anomalies.append(anomaly)
    return anomalies
