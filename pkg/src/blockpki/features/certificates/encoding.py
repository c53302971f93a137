"""Canonical certificate encoding: the message every CA signs."""

from typing import Any, Dict, Sequence

from ...core.canonical import canonical_json
from ..contracts.models import CertData


def cert_fields(cert_data: CertData, issuers: Sequence[str]) -> Dict[str, Any]:
    return {
        "subjectName": cert_data.subject_name,
        "issuers": list(issuers),
        "notBefore": cert_data.not_before,
        "notAfter": cert_data.not_after,
        "publicKey": cert_data.public_key,
    }


def canonical_encode(cert_data: CertData, issuers: Sequence[str]) -> bytes:
    """Signed message m: every payload field except the signature, keys sorted."""
    return canonical_json(cert_fields(cert_data, issuers))


def nonce_message(cert_data: CertData) -> bytes:
    """Nonce derivation input; the issuer list is not known before the nonce round closes."""
    fields = cert_fields(cert_data, [])
    del fields["issuers"]
    return canonical_json(fields)
