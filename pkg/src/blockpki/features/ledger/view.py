"""Read-only queries shared by the live ledger and loaded chain archives."""

from typing import Any, Dict, Iterator, List, Tuple

from ...exceptions import UnknownTx
from ..merkle.models import InclusionProof
from ..merkle.service import build_tree, prove_inclusion
from .models import Block, BlockHeader, Transaction


class ChainView:
    blocks: List[Block]
    _tx_index: Dict[str, Tuple[int, int]]

    def _index_block(self, block: Block) -> None:
        for i, tx in enumerate(block.transactions):
            self._tx_index[tx.tx_hash] = (block.height, i)

    @property
    def tip(self) -> Block:
        return self.blocks[-1]

    @property
    def height(self) -> int:
        return self.tip.height

    def header(self, height: int) -> BlockHeader:
        return self.block(height).header

    def block(self, height: int) -> Block:
        if not 0 <= height < len(self.blocks):
            raise IndexError(f"No block at height {height}")
        return self.blocks[height]

    def has_block(self, height: int) -> bool:
        return 0 <= height < len(self.blocks)

    def header_chain(self) -> List[BlockHeader]:
        return [b.header for b in self.blocks]

    def locate_tx(self, tx_hash: str) -> Tuple[int, int]:
        """(block height, position in block) of a mined transaction."""
        try:
            return self._tx_index[tx_hash]
        except KeyError:
            raise UnknownTx(tx_hash) from None

    def get_tx(self, tx_hash: str) -> Transaction:
        height, index = self.locate_tx(tx_hash)
        return self.blocks[height].transactions[index]

    def get_inclusion_proof(self, tx_hash: str) -> Tuple[int, InclusionProof]:
        height, index = self.locate_tx(tx_hash)
        tree = build_tree([bytes.fromhex(h) for h in self.blocks[height].tx_hashes])
        return height, prove_inclusion(tree, index)

    def iter_logs(self, from_height: int = 0, to_height: int | None = None) -> Iterator[Dict[str, Any]]:
        """Contract logs of successful transactions, in block order."""
        last = self.height if to_height is None else min(to_height, self.height)
        for block in self.blocks[max(from_height, 0) : last + 1]:
            for tx in block.transactions:
                if tx.status != "success":
                    continue
                yield from tx.logs

    def iter_transactions(self) -> Iterator[Tuple[int, Transaction]]:
        for block in self.blocks:
            for tx in block.transactions:
                yield block.height, tx
