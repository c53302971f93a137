"""Schnorr single- and multi-signatures.

Two-round multi-signature: every signer publishes N_i = g^k_i, everybody
computes N̄ = ΠN_i and e = h(N̄ ∥ m), each signer returns s_i = k_i - e·x_i,
and s̄ = Σs_i verifies under Q̄ = ΠQ_i exactly like a single signature.
"""

import hashlib
import hmac
from typing import Any, Iterable, List, Optional, Sequence

from ...exceptions import DuplicateSigner, EmptyAggregation, NonceReuse
from .hashing import hash_to_scalar
from .models import (
    GroupParams,
    KeyPair,
    MultiSignature,
    NoncePair,
    PartialSignature,
    ProofOfPossession,
    SchnorrSignature,
)
from .rfc6979 import generate_k

POP_TAG = b"BlockPKI-PoP"
_KEYGEN_TAG = b"BlockPKI-keygen"


class SchnorrService:
    def __init__(self, params: GroupParams):
        self.params = params
        self.group = params.group

    # keys and nonces

    def keygen(self, seed: bytes, owner_id: str = "") -> KeyPair:
        """Deterministic key pair for ``seed``."""
        if not seed:
            raise ValueError("seed must not be empty")
        digest = hmac.new(_KEYGEN_TAG, seed, hashlib.sha256).digest()
        x = int.from_bytes(digest, "big") % (self.params.q - 1) + 1
        return self.keypair_from_secret(x, owner_id=owner_id)

    def keypair_from_secret(self, x: int, owner_id: str = "") -> KeyPair:
        if not 1 <= x < self.params.q:
            raise ValueError(f"Secret must be in [1, {self.params.q - 1}]")
        return KeyPair(secret=x, public=self.group.base_exp(x), owner_id=owner_id)

    def gen_nonce(self, key: KeyPair, message: bytes, extra: bytes = b"") -> NoncePair:
        """RFC 6979 nonce bound to (secret key, message, extra)."""
        k = generate_k(self.params.q, key.secret, hashlib.sha256(message).digest(), extra)
        return self.nonce_from_secret(k)

    def nonce_from_secret(self, k: int) -> NoncePair:
        if not 1 <= k < self.params.q:
            raise ValueError(f"Nonce must be in [1, {self.params.q - 1}]")
        return NoncePair(secret=k, public=self.group.base_exp(k))

    # aggregation

    def combine_nonces(self, nonces: Sequence[Any]) -> Any:
        return self._product(nonces, "nonces")

    def combine_keys(self, keys: Sequence[Any]) -> Any:
        return self._product(keys, "public keys")

    def _product(self, elements: Sequence[Any], what: str) -> Any:
        if not elements:
            raise EmptyAggregation(what)
        acc = self.group.identity
        for element in elements:
            acc = self.group.mul(acc, element)
        return acc

    def challenge(self, n_bar: Any, message: bytes) -> int:
        return hash_to_scalar(self.params.hash_tag, self.group.encode(n_bar) + message, self.params.q)

    def partial_sign(
        self,
        key: KeyPair,
        nonce: NoncePair,
        e: int,
        signer_id: Optional[str] = None,
    ) -> PartialSignature:
        if nonce.consumed or nonce.secret is None:
            raise NonceReuse()
        s = (nonce.secret - e * key.secret) % self.params.q
        nonce.consumed = True
        nonce.secret = None
        return PartialSignature(signer_id=signer_id if signer_id is not None else key.owner_id, s=s)

    def combine_partials(self, partials: Sequence[PartialSignature], e: int) -> MultiSignature:
        if not partials:
            raise EmptyAggregation("partial signatures")
        seen: set[str] = set()
        for partial in partials:
            if partial.signer_id in seen:
                raise DuplicateSigner(partial.signer_id)
            seen.add(partial.signer_id)
        s_bar = sum(p.s for p in partials) % self.params.q
        return MultiSignature(e=e % self.params.q, s_bar=s_bar, signer_ids=[p.signer_id for p in partials])

    # verification

    def verify_multisig(self, sig: MultiSignature, q_bar: Any, message: bytes) -> bool:
        return self._verify(sig.e, sig.s_bar, q_bar, message)

    def _verify(self, e: int, s: int, public: Any, message: bytes) -> bool:
        q = self.params.q
        if not (0 <= e < q and 0 <= s < q):
            return False
        n_prime = self.group.mul(self.group.base_exp(s), self.group.exp(public, e))
        return self.challenge(n_prime, message) == e

    def partial_is_valid(self, partial: PartialSignature, e: int, nonce_public: Any, key_public: Any) -> bool:
        """g^s · Q^e == N for one signer."""
        lhs = self.group.mul(self.group.base_exp(partial.s), self.group.exp(key_public, e))
        return self.group.eq(lhs, nonce_public)

    def find_bad_partials(
        self,
        partials: Iterable[PartialSignature],
        e: int,
        nonces: dict,
        keys: dict,
    ) -> List[str]:
        return [
            p.signer_id
            for p in partials
            if not self.partial_is_valid(p, e, nonces[p.signer_id], keys[p.signer_id])
        ]

    # single signatures and proofs of possession

    def schnorr_sign(self, key: KeyPair, message: bytes, extra: bytes = b"") -> SchnorrSignature:
        # Same nonce derivation as the multi-signature path, so T=1 is bit-identical
        nonce = self.gen_nonce(key, message, extra)
        e = self.challenge(nonce.public, message)
        partial = self.partial_sign(key, nonce, e)
        return SchnorrSignature(e=e, s=partial.s)

    def schnorr_verify(self, sig: SchnorrSignature, public: Any, message: bytes) -> bool:
        return self._verify(sig.e, sig.s, public, message)

    def pop_message(self, public: Any) -> bytes:
        return POP_TAG + self.group.encode(public)

    def create_pop(self, key: KeyPair) -> ProofOfPossession:
        sig = self.schnorr_sign(key, self.pop_message(key.public))
        return ProofOfPossession(owner_id=key.owner_id, pop_sig=sig)

    def verify_pop(self, pop: ProofOfPossession, public: Any) -> bool:
        return self.schnorr_verify(pop.pop_sig, public, self.pop_message(public))

    def rogue_key(self, target_public: Any, adversary_secret: int) -> Any:
        """Q_rogue = g^x_adv · Q_target^-1, so Q_target·Q_rogue = g^x_adv."""
        return self.group.mul(self.group.base_exp(adversary_secret), self.group.inverse(target_public))
