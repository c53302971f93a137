"""Prometheus metrics for the simulated chain and the issuance protocol."""

from prometheus_client import Counter, Histogram


BLOCKS_MINED = Counter(
    "blockpki_blocks_mined_total",
    "Total blocks mined by the simulated chain",
)


TRANSACTIONS = Counter(
    "blockpki_transactions_total",
    "Executed transactions",
    ["method", "status"],
)


GAS_USED = Counter(
    "blockpki_gas_used_total",
    "Total gas consumed by executed transactions",
)


ISSUANCE_BLOCKS = Histogram(
    "blockpki_issuance_blocks",
    "Blocks elapsed per completed issuance",
    buckets=(4, 5, 6, 8, 10, 12, 16, 20, 30, 50),
)


ISSUANCE_FAILURES = Counter(
    "blockpki_issuance_failures_total",
    "Failed issuances",
    ["reason"],
)


CERT_VERIFICATIONS = Counter(
    "blockpki_certificate_verifications_total",
    "Certificate verifications by client mode and outcome",
    ["mode", "outcome"],
)


def safe_inc(counter, amount: float = 1.0, **labels: str) -> None:
    """Increment a metric; metrics must never change protocol behaviour."""
    try:
        target = counter.labels(**labels) if labels else counter
        target.inc(amount)
    except Exception:
        pass


def safe_observe(histogram, value: float) -> None:
    try:
        histogram.observe(value)
    except Exception:
        pass
