"""Canonical JSON: sorted keys, compact separators, UTF-8."""

import hashlib
import json
from typing import Any


def canonical_json(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def derive_address(*parts: str) -> str:
    """Deterministic 20-byte address for a label (accounts, contracts)."""
    digest = hashlib.sha256("\x1f".join(parts).encode("utf-8")).hexdigest()
    return "0x" + digest[:40]
