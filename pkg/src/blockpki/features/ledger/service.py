"""Simulated blockchain: accounts, mempool, fee accounting and block production."""

from typing import Any, Dict, List, Optional, Protocol, Tuple

import numpy as np

from ...core.structured_logging import get_logger
from ...exceptions import (
    BlockPKIError,
    InsufficientBalance,
    OutOfGas,
    UnknownSender,
    UnknownTx,
    Unmined,
)
from ...metrics import BLOCKS_MINED, GAS_USED, TRANSACTIONS, safe_inc
from ..merkle.models import InclusionProof
from ..merkle.service import merkle_root
from .gas import GasMeter, PayloadKind
from .models import (
    MINER_ADDRESS,
    ZERO_HASH,
    Account,
    Block,
    BlockHeader,
    ChainConfig,
    Transaction,
)
from .view import ChainView

logger = get_logger("blockpki.ledger")


class CallContext:
    """Execution context handed to the contract runtime for one transaction."""

    def __init__(self, ledger: "Ledger", tx: Transaction, height: int, timestamp: float, meter: GasMeter):
        self.ledger = ledger
        self.tx = tx
        self.height = height
        self.timestamp = timestamp
        self.meter = meter
        self.events: List[Dict[str, Any]] = []

    @property
    def sender(self) -> str:
        return self.tx.sender

    @property
    def value(self) -> int:
        return self.tx.value

    def transfer(self, src: str, dst: str, amount: int) -> None:
        self.ledger.transfer(src, dst, amount)

    def balance(self, address: str) -> int:
        return self.ledger.balance(address)

    def emit(self, event: Dict[str, Any]) -> None:
        self.meter.charge_event()
        self.events.append({**event, "tx_hash": self.tx.tx_hash})


class ContractHost(Protocol):
    def is_contract(self, address: str) -> bool: ...

    def execute(self, ctx: CallContext) -> None: ...

    def snapshot(self) -> Any: ...

    def restore(self, snapshot: Any) -> None: ...


class Ledger(ChainView):
    """Single canonical chain owned by one event loop.

    Currency only enters through ``fund`` before the first block; afterwards
    the sum of all balances (contracts and the miner included) is constant.
    """

    def __init__(
        self,
        config: Optional[ChainConfig] = None,
        runtime: Optional[ContractHost] = None,
        rng: Optional[np.random.Generator] = None,
    ):
        self.config = config or ChainConfig()
        self.runtime = runtime
        self.rng = rng if rng is not None else np.random.default_rng(self.config.rng_seed)

        self.accounts: Dict[str, Account] = {}
        self.mempool: List[Transaction] = []
        self._pending: Dict[str, Transaction] = {}
        self._tx_index: Dict[str, Tuple[int, int]] = {}
        self._minted = 0
        self._tip_snapshot: Optional[Tuple[Dict[str, Tuple[int, int]], Any]] = None

        genesis = Block(
            header=BlockHeader(
                height=0,
                parent_hash=ZERO_HASH,
                tx_root=merkle_root([]).hex(),
                timestamp=self.config.genesis_time,
            )
        )
        self.blocks: List[Block] = [genesis]
        self.ensure_account(MINER_ADDRESS)

    # accounts

    def ensure_account(self, address: str) -> Account:
        account = self.accounts.get(address)
        if account is None:
            account = Account(address=address)
            self.accounts[address] = account
        return account

    def fund(self, address: str, amount: int) -> None:
        """Genesis faucet; only allowed before the first block is mined."""
        if self.height > 0:
            raise BlockPKIError("Accounts can only be funded at genesis")
        if amount < 0:
            raise ValueError("amount must not be negative")
        self.ensure_account(address).balance += amount
        self._minted += amount

    def balance(self, address: str) -> int:
        account = self.accounts.get(address)
        return account.balance if account else 0

    def transfer(self, src: str, dst: str, amount: int) -> None:
        if amount < 0:
            raise ValueError("amount must not be negative")
        if amount == 0:
            return
        source = self.accounts.get(src)
        available = source.balance if source else 0
        if source is None or available < amount:
            raise InsufficientBalance(src, amount, available)
        source.balance -= amount
        self.ensure_account(dst).balance += amount

    def total_supply(self) -> int:
        return sum(a.balance for a in self.accounts.values())

    def check_conservation(self) -> bool:
        return self.total_supply() == self._minted and all(a.balance >= 0 for a in self.accounts.values())

    # transactions

    def _pending_outflow(self, sender: str) -> int:
        price = self.config.gas_price
        return sum(tx.value + tx.max_fee(price) for tx in self.mempool if tx.sender == sender)

    def submit_tx(self, tx: Transaction) -> str:
        """Queue ``tx``; returns its hash.

        The sender must cover the value and the maximum fee on top of what its
        queued transactions already reserve.
        """
        account = self.accounts.get(tx.sender)
        if account is None:
            raise UnknownSender(tx.sender)

        needed = self._pending_outflow(tx.sender) + tx.value + tx.max_fee(self.config.gas_price)
        if account.balance < needed:
            raise InsufficientBalance(tx.sender, needed, account.balance)

        if tx.nonce is None:
            queued = sum(1 for t in self.mempool if t.sender == tx.sender)
            tx = tx.model_copy(update={"nonce": account.nonce + queued})
        tx = tx.unexecuted()
        tx.tx_hash = tx.compute_hash()
        if tx.tx_hash in self._pending or tx.tx_hash in self._tx_index:
            raise ValueError(f"Transaction {tx.tx_hash} already submitted")

        self.mempool.append(tx)
        self._pending[tx.tx_hash] = tx
        logger.debug("tx_submitted", tx_hash=tx.tx_hash, sender=tx.sender, method=tx.method)
        return tx.tx_hash

    def is_pending(self, tx_hash: str) -> bool:
        return tx_hash in self._pending

    def get_tx(self, tx_hash: str) -> Transaction:
        if tx_hash in self._pending:
            return self._pending[tx_hash]
        return super().get_tx(tx_hash)

    def confirmations(self, tx_hash: str) -> int:
        if tx_hash in self._pending:
            return 0
        height, _ = self.locate_tx(tx_hash)
        return self.height - height

    def get_inclusion_proof(self, tx_hash: str) -> Tuple[int, InclusionProof]:
        if tx_hash in self._pending:
            raise Unmined(tx_hash)
        return super().get_inclusion_proof(tx_hash)

    def gas_meter(self, payload_kind: PayloadKind, payload_size_bytes: int) -> int:
        return self.config.gas.estimate(payload_kind, payload_size_bytes)

    # block production

    def draw_block_interval(self) -> float:
        return float(self.rng.exponential(self.config.mean_block_interval))

    def _snapshot_accounts(self) -> Dict[str, Tuple[int, int]]:
        return {addr: (a.balance, a.nonce) for addr, a in self.accounts.items()}

    def _restore_accounts(self, snap: Dict[str, Tuple[int, int]]) -> None:
        for addr in list(self.accounts):
            if addr not in snap:
                del self.accounts[addr]
        for addr, (balance, nonce) in snap.items():
            account = self.accounts.get(addr) or self.ensure_account(addr)
            account.balance = balance
            account.nonce = nonce

    def _execute(self, tx: Transaction, height: int, timestamp: float) -> None:
        meter = GasMeter(self.config.gas, tx.gas_limit)
        ctx = CallContext(self, tx, height, timestamp, meter)
        accounts_snap = self._snapshot_accounts()
        runtime_snap = self.runtime.snapshot() if self.runtime is not None else None

        status, error, gas_used = "success", None, 0
        try:
            meter.charge_base()
            self.transfer(tx.sender, tx.recipient, tx.value)
            if self.runtime is not None and self.runtime.is_contract(tx.recipient):
                self.runtime.execute(ctx)
            gas_used = meter.used
        except BlockPKIError as e:
            self._restore_accounts(accounts_snap)
            if self.runtime is not None:
                self.runtime.restore(runtime_snap)
            ctx.events.clear()
            status, error = "reverted", e.error_code
            gas_used = tx.gas_limit if isinstance(e, OutOfGas) else min(meter.used, tx.gas_limit)

        fee = gas_used * self.config.gas_price
        self.transfer(tx.sender, MINER_ADDRESS, fee)
        self.accounts[tx.sender].nonce += 1

        tx.gas_used = gas_used
        tx.fee = fee
        tx.status = status
        tx.error = error
        tx.logs = ctx.events

        safe_inc(TRANSACTIONS, method=tx.method, status=status)
        safe_inc(GAS_USED, gas_used)
        if status == "reverted":
            logger.debug("tx_reverted", tx_hash=tx.tx_hash, error=error, gas_used=gas_used)

    def mine_next_block(self, now: float) -> Block:
        """Execute up to ``block_tx_limit`` queued transactions and append a block."""
        if now < self.tip.header.timestamp:
            raise ValueError("Block timestamp must not go backwards")

        height = self.height + 1
        self._tip_snapshot = (
            self._snapshot_accounts(),
            self.runtime.snapshot() if self.runtime is not None else None,
        )

        limit = self.config.block_tx_limit
        included, self.mempool = self.mempool[:limit], self.mempool[limit:]
        for tx in included:
            del self._pending[tx.tx_hash]
            self._execute(tx, height, now)

        root = merkle_root([bytes.fromhex(tx.tx_hash) for tx in included])
        header = BlockHeader(
            height=height,
            parent_hash=self.tip.header.block_hash,
            tx_root=root.hex(),
            timestamp=now,
        )
        block = Block(header=header, transactions=included)
        self.blocks.append(block)
        self._index_block(block)

        if not self.check_conservation():
            raise BlockPKIError(f"Currency not conserved in block {height}")

        safe_inc(BLOCKS_MINED)
        logger.debug("block_mined", height=height, txs=len(included), timestamp=header.timestamp)
        return block

    def orphan_tip(self) -> Block:
        """Drop the tip block (single reorg) and put its transactions back in front of the mempool."""
        if self.height == 0 or self._tip_snapshot is None:
            raise BlockPKIError("No tip block to orphan")

        accounts_snap, runtime_snap = self._tip_snapshot
        self._tip_snapshot = None
        self._restore_accounts(accounts_snap)
        if self.runtime is not None:
            self.runtime.restore(runtime_snap)

        orphan = self.blocks.pop()
        requeued = [tx.unexecuted() for tx in orphan.transactions]
        for tx in requeued:
            self._tx_index.pop(tx.tx_hash, None)
            self._pending[tx.tx_hash] = tx
        self.mempool = requeued + self.mempool
        logger.info("tip_orphaned", height=orphan.height, txs=len(requeued))
        return orphan

    def locate_tx(self, tx_hash: str) -> Tuple[int, int]:
        if tx_hash in self._pending:
            raise Unmined(tx_hash)
        try:
            return self._tx_index[tx_hash]
        except KeyError:
            raise UnknownTx(tx_hash) from None
