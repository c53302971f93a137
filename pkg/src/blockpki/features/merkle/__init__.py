from .models import InclusionProof, MerkleTree, ProofStep
from .service import (
    EMPTY_ROOT,
    build_tree,
    leaf_hash,
    merkle_root,
    node_hash,
    prove_inclusion,
    verify_inclusion,
)

__all__ = [
    "EMPTY_ROOT",
    "InclusionProof",
    "MerkleTree",
    "ProofStep",
    "build_tree",
    "leaf_hash",
    "merkle_root",
    "node_hash",
    "prove_inclusion",
    "verify_inclusion",
]
