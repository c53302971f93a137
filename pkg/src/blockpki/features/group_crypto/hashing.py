"""Challenge hash registry.

``hash_to_scalar`` is looked up by tag so tests can substitute an oracle hash
(e.g. one that always returns 5) and reuse hand-computed tiny-group vectors.
"""

import hashlib
from typing import Callable, Dict

HashToInt = Callable[[bytes], int]

DEFAULT_HASH = "sha256"


def _sha256_to_int(data: bytes) -> int:
    return int.from_bytes(hashlib.sha256(data).digest(), "big")


_HASHES: Dict[str, HashToInt] = {DEFAULT_HASH: _sha256_to_int}


def register_hash(tag: str, fn: HashToInt) -> None:
    _HASHES[tag] = fn


def unregister_hash(tag: str) -> None:
    if tag == DEFAULT_HASH:
        raise ValueError("The default hash cannot be removed")
    _HASHES.pop(tag, None)


def hash_to_scalar(tag: str, data: bytes, q: int) -> int:
    try:
        fn = _HASHES[tag]
    except KeyError:
        raise ValueError(f"Unknown hash tag '{tag}'") from None
    return fn(data) % q
