"""Merkle trees over transaction hashes and inclusion proofs for light clients."""

import hashlib
from typing import List, Sequence

from ...exceptions import BadIndex, EmptyBlock
from .models import InclusionProof, MerkleTree, ProofStep

LEAF_PREFIX = b"\x00"
NODE_PREFIX = b"\x01"


def leaf_hash(data: bytes) -> bytes:
    return hashlib.sha256(LEAF_PREFIX + data).digest()


def node_hash(left: bytes, right: bytes) -> bytes:
    return hashlib.sha256(NODE_PREFIX + left + right).digest()


# tx_root of a block without transactions
EMPTY_ROOT = leaf_hash(b"")


def _next_level(level: Sequence[bytes]) -> List[bytes]:
    out = []
    for i in range(0, len(level), 2):
        left = level[i]
        right = level[i + 1] if i + 1 < len(level) else left
        out.append(node_hash(left, right))
    return out


def build_tree(tx_hashes: Sequence[bytes]) -> MerkleTree:
    if not tx_hashes:
        raise EmptyBlock()
    levels = [list(tx_hashes)]
    while len(levels[-1]) > 1:
        levels.append(_next_level(levels[-1]))
    return MerkleTree(leaves=list(tx_hashes), levels=levels)


def merkle_root(tx_hashes: Sequence[bytes]) -> bytes:
    """Root of ``tx_hashes``, or ``EMPTY_ROOT`` for an empty block."""
    if not tx_hashes:
        return EMPTY_ROOT
    return build_tree(tx_hashes).root


def prove_inclusion(tree: MerkleTree, index: int) -> InclusionProof:
    if not 0 <= index < tree.leaf_count:
        raise BadIndex(index, tree.leaf_count)

    siblings = []
    position = index
    for level in tree.levels[:-1]:
        if position % 2 == 0:
            sibling = level[position + 1] if position + 1 < len(level) else level[position]
            siblings.append(ProofStep(hash=sibling, side="right"))
        else:
            siblings.append(ProofStep(hash=level[position - 1], side="left"))
        position //= 2
    return InclusionProof(leaf_index=index, siblings=siblings)


def verify_inclusion(root: bytes, tx_hash: bytes, proof: InclusionProof) -> bool:
    acc = tx_hash
    for step in proof.siblings:
        if step.side == "left":
            acc = node_hash(step.hash, acc)
        else:
            acc = node_hash(acc, step.hash)
    return acc == root
