"""
Ledger Feature
Simulated chain: accounts, gas, blocks, persistence
"""
from .gas import GasMeter, GasSchedule
from .models import MINER_ADDRESS, Account, Block, BlockHeader, ChainConfig, Transaction
from .persistence import ChainArchive, dump_chain, dumps_chain, load_chain, loads_chain
from .service import CallContext, Ledger

__all__ = [
    "MINER_ADDRESS",
    "Account",
    "Block",
    "BlockHeader",
    "CallContext",
    "ChainArchive",
    "ChainConfig",
    "GasMeter",
    "GasSchedule",
    "Ledger",
    "Transaction",
    "dump_chain",
    "dumps_chain",
    "load_chain",
    "loads_chain",
]
