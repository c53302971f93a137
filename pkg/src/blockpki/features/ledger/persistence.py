"""Chain dump/load as JSON lines (one block per line, canonical JSON)."""

import json
from pathlib import Path
from typing import Dict, Iterable, List, Tuple, Union

from pydantic import ValidationError

from ...core.canonical import canonical_json
from ...exceptions import ChainIntegrityError
from ..merkle.service import merkle_root
from .models import ZERO_HASH, Block
from .view import ChainView


class ChainArchive(ChainView):
    """Read-only view over blocks loaded from a dump (or copied from a ledger)."""

    def __init__(self, blocks: Iterable[Block]):
        self.blocks: List[Block] = list(blocks)
        if not self.blocks:
            raise ChainIntegrityError("Chain has no genesis block")
        self._tx_index: Dict[str, Tuple[int, int]] = {}
        for block in self.blocks:
            self._index_block(block)

    @classmethod
    def from_ledger(cls, ledger: ChainView) -> "ChainArchive":
        return cls(block.model_copy(deep=True) for block in ledger.blocks)


def dumps_chain(blocks: Iterable[Block]) -> str:
    return "".join(canonical_json(b.model_dump(mode="json")).decode("utf-8") + "\n" for b in blocks)


def dump_chain(blocks: Iterable[Block], path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_chain(blocks), encoding="utf-8")


def _check_block(block: Block, previous: Union[Block, None], line_number: int) -> None:
    expected_height = 0 if previous is None else previous.height + 1
    if block.height != expected_height:
        raise ChainIntegrityError(f"expected height {expected_height}, got {block.height}", line_number)

    expected_parent = ZERO_HASH if previous is None else previous.header.block_hash
    if block.header.parent_hash != expected_parent:
        raise ChainIntegrityError("parent_hash does not match the previous header", line_number)

    for tx in block.transactions:
        if tx.compute_hash() != tx.tx_hash:
            raise ChainIntegrityError(f"transaction hash mismatch for {tx.tx_hash}", line_number)

    root = merkle_root([bytes.fromhex(h) for h in block.tx_hashes])
    if root.hex() != block.header.tx_root:
        raise ChainIntegrityError("tx_root does not match the block transactions", line_number)


def loads_chain(text: str) -> ChainArchive:
    blocks: List[Block] = []
    previous = None
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            raise ChainIntegrityError("empty line", line_number)
        try:
            block = Block.model_validate(json.loads(line))
        except (ValueError, ValidationError) as e:
            raise ChainIntegrityError(f"malformed block: {e}", line_number) from e
        _check_block(block, previous, line_number)
        blocks.append(block)
        previous = block
    return ChainArchive(blocks)


def load_chain(path: Union[str, Path]) -> ChainArchive:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ChainIntegrityError(f"cannot read chain dump: {e}") from e
    return loads_chain(text)
