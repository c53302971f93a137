"""Signing test vectors: JSON records {group, x, k, e, message_hex, expected_s, expected_N}."""

import json
from pathlib import Path
from typing import List, Union

from pydantic import BaseModel, TypeAdapter

from .models import GroupParams
from .service import SchnorrService


class SigningVector(BaseModel):
    group: str
    x: int
    k: int
    e: int
    message_hex: str = ""
    expected_s: int
    expected_N: int | str  # int for the tiny group, hex encoding otherwise


_VECTOR_LIST = TypeAdapter(List[SigningVector])


def load_vectors(path: Union[str, Path]) -> List[SigningVector]:
    raw = Path(path).read_text(encoding="utf-8")
    return _VECTOR_LIST.validate_python(json.loads(raw))


def check_vector(vector: SigningVector) -> bool:
    """Recompute s and N for one record and compare with the expected values."""
    service = SchnorrService(GroupParams.named(vector.group))
    group = service.group
    key = service.keypair_from_secret(vector.x)
    nonce = service.nonce_from_secret(vector.k)
    partial = service.partial_sign(key, nonce, vector.e)

    if isinstance(vector.expected_N, int):
        nonce_ok = group.encode(nonce.public) == group.encode(vector.expected_N)
    else:
        nonce_ok = group.element_hex(nonce.public) == vector.expected_N.lower()

    return (
        partial.s == vector.expected_s % group.order
        and nonce_ok
        and service.partial_is_valid(partial, vector.e, nonce.public, key.public)
    )
