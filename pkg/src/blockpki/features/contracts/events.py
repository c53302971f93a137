from typing import Iterable, List, Optional

from ..ledger.view import ChainView
from .models import ContractEvent


def scan_events(
    chain: ChainView,
    from_height: int = 0,
    to_height: Optional[int] = None,
    kinds: Optional[Iterable[str]] = None,
    contract_address: Optional[str] = None,
) -> List[ContractEvent]:
    """Events of successful transactions in [from_height, to_height], in block order."""
    wanted = set(kinds) if kinds is not None else None
    if to_height is not None and to_height < from_height:
        return []

    events = []
    for log in chain.iter_logs(from_height, to_height):
        event = ContractEvent.model_validate(log)
        if wanted is not None and event.kind not in wanted:
            continue
        if contract_address is not None and event.contract_address != contract_address:
            continue
        events.append(event)
    return events
