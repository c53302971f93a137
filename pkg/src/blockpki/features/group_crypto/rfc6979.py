"""Deterministic nonce generation (RFC 6979, HMAC-SHA256) over any group order."""

import hashlib
import hmac


def _hmac_sha256(key: bytes, data: bytes) -> bytes:
    return hmac.new(key, data, hashlib.sha256).digest()


def _int2octets(x: int, rolen: int) -> bytes:
    return x.to_bytes(rolen, "big")


def _bits2int(b: bytes, qlen: int) -> int:
    i = int.from_bytes(b, "big")
    blen = len(b) * 8
    if blen > qlen:
        i >>= blen - qlen
    return i


def _bits2octets(b: bytes, q: int, qlen: int, rolen: int) -> bytes:
    z1 = _bits2int(b, qlen)
    z2 = z1 % q
    return _int2octets(z2, rolen)


def generate_k(q: int, secret: int, message_hash: bytes, extra: bytes = b"") -> int:
    """Return a deterministic nonce in [1, q-1] for (secret, message_hash).

    ``extra`` is hashed and mixed into the HMAC state (RFC 6979 section 3.6),
    so the same message under a different context yields a different nonce.
    """
    if not 1 <= secret < q:
        raise ValueError(f"Secret must be in [1, {q - 1}]")

    qlen = q.bit_length()
    rolen = (qlen + 7) // 8
    holen = hashlib.sha256().digest_size

    bx = _int2octets(secret, rolen) + _bits2octets(message_hash, q, qlen, rolen)
    if extra:
        bx += hashlib.sha256(extra).digest()

    v = b"\x01" * holen
    k = b"\x00" * holen
    k = _hmac_sha256(k, v + b"\x00" + bx)
    v = _hmac_sha256(k, v)
    k = _hmac_sha256(k, v + b"\x01" + bx)
    v = _hmac_sha256(k, v)

    while True:
        t = b""
        while len(t) * 8 < qlen:
            v = _hmac_sha256(k, v)
            t += v
        candidate = _bits2int(t, qlen)
        if 1 <= candidate < q:
            return candidate
        k = _hmac_sha256(k, v + b"\x00")
        v = _hmac_sha256(k, v)
