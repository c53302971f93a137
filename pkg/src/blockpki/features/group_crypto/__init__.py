from .groups import PrimeOrderGroup, Secp256k1Group, TinyGroup, get_group
from .hashing import DEFAULT_HASH, hash_to_scalar, register_hash, unregister_hash
from .models import (
    GroupParams,
    KeyPair,
    MultiSignature,
    NoncePair,
    PartialSignature,
    ProofOfPossession,
    SchnorrSignature,
)
from .service import SchnorrService
from .vectors import SigningVector, check_vector, load_vectors

__all__ = [
    "DEFAULT_HASH",
    "GroupParams",
    "KeyPair",
    "MultiSignature",
    "NoncePair",
    "PartialSignature",
    "PrimeOrderGroup",
    "ProofOfPossession",
    "SchnorrService",
    "SchnorrSignature",
    "Secp256k1Group",
    "SigningVector",
    "TinyGroup",
    "check_vector",
    "get_group",
    "hash_to_scalar",
    "load_vectors",
    "register_hash",
    "unregister_hash",
]
