"""Benchmark campaigns: issuance cost and latency per threshold, verification timings."""

import time
from typing import Any, Callable, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd

from ..config.settings import settings
from ..core.structured_logging import get_logger
from ..features.actors.models import IssuanceOutcome, ScenarioConfig
from ..features.actors.simulation import run_issuance, run_renewal
from ..features.group_crypto.models import GroupParams
from ..features.group_crypto.service import SchnorrService
from ..features.merkle.service import build_tree, leaf_hash, prove_inclusion, verify_inclusion

logger = get_logger("blockpki.bench")

DEFAULT_THRESHOLDS = (2, 5, 10, 20)
ISSUANCE_COLUMNS = [
    "T",
    "repetition",
    "seed",
    "blocks_elapsed",
    "sim_seconds",
    "tx_count",
    "total_gas",
    "total_fees",
    "creation_gas",
    "renewal_gas",
    "most_expensive_method",
]


def scenario_for_threshold(base: ScenarioConfig, threshold: int) -> ScenarioConfig:
    """``base`` with ``threshold`` fresh honest CAs."""
    data = base.model_dump()
    data.update(threshold=threshold, cas=[], authorized_cas=None, first_t_mode=False, client_threshold=None)
    return ScenarioConfig.model_validate(data)


def _run_seed(seed: Optional[int], threshold: int, repetition: int) -> Optional[int]:
    if seed is None:
        return None
    return seed + 1000 * repetition + threshold


def _issuance_row(threshold: int, repetition: int, seed: Optional[int], outcome: IssuanceOutcome, renewal: IssuanceOutcome) -> Dict[str, Any]:
    metrics = outcome.metrics
    create_gas = metrics.gas_of("create_domain_contract")
    renew_gas = renewal.metrics.gas_of("renew")
    most_expensive = max(metrics.per_tx, key=lambda t: t.gas_used).method if metrics.per_tx else ""
    return {
        "T": threshold,
        "repetition": repetition,
        "seed": seed,
        "blocks_elapsed": metrics.blocks_elapsed,
        "sim_seconds": metrics.wall_time_simulated,
        "tx_count": metrics.tx_count,
        "total_gas": metrics.total_gas,
        "total_fees": metrics.total_fees,
        "creation_gas": create_gas[0] - renew_gas[0] if create_gas and renew_gas else None,
        "renewal_gas": renewal.metrics.total_gas if renewal.succeeded else None,
        "most_expensive_method": most_expensive,
    }


def bench_issuance(
    thresholds: Iterable[int] = DEFAULT_THRESHOLDS,
    repetitions: int = 1,
    seed: Optional[int] = None,
    base: Optional[ScenarioConfig] = None,
) -> pd.DataFrame:
    """One row per (T, repetition): an issuance followed by a renewal on the same contract."""
    base = base or ScenarioConfig()
    rows: List[Dict[str, Any]] = []
    for threshold in thresholds:
        scenario = scenario_for_threshold(base, threshold)
        for repetition in range(repetitions):
            run_seed = _run_seed(seed, threshold, repetition)
            sim, requester, outcome = run_issuance(scenario, run_seed)
            if not outcome.succeeded:
                logger.warning("bench_issuance_failed", threshold=threshold, repetition=repetition)
                continue
            renewal = run_renewal(sim, requester)
            rows.append(_issuance_row(threshold, repetition, run_seed, outcome, renewal))
            logger.debug("bench_issuance_done", threshold=threshold, repetition=repetition)
    return pd.DataFrame(rows, columns=ISSUANCE_COLUMNS)


def gas_regression(df: pd.DataFrame) -> Dict[str, float]:
    """Least-squares line of total gas against T, with R²."""
    x = df["T"].to_numpy(dtype=float)
    y = df["total_gas"].to_numpy(dtype=float)
    if len(np.unique(x)) < 2:
        raise ValueError("Gas regression needs at least two distinct thresholds")
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(np.sum((y - predicted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r_squared": r_squared}


def median_ns(fn: Callable[[], Any], iterations: int) -> float:
    """Median wall time of ``fn`` in nanoseconds on the monotonic clock."""
    samples = np.empty(iterations, dtype=np.int64)
    for n in range(iterations):
        start = time.perf_counter_ns()
        fn()
        samples[n] = time.perf_counter_ns() - start
    return float(np.median(samples))


def bench_verification(
    thresholds: Iterable[int] = DEFAULT_THRESHOLDS,
    iterations: Optional[int] = None,
    group_name: Optional[str] = None,
    leaves: int = 64,
) -> pd.DataFrame:
    """Medians of the three client-side stages per T: key combination, inclusion check, signature check."""
    iterations = iterations or settings.BENCH_TIMING_ITERATIONS
    schnorr = SchnorrService(GroupParams.named(group_name or settings.BLOCKPKI_GROUP))
    message = b"benchmark certificate"

    tree = build_tree([leaf_hash(n.to_bytes(4, "big")) for n in range(leaves)])
    leaf = tree.leaves[leaves // 2]
    proof = prove_inclusion(tree, leaves // 2)

    rows = []
    for threshold in thresholds:
        keys = [schnorr.keygen(f"bench-{threshold}-{n}".encode(), owner_id=f"CA{n}") for n in range(threshold)]
        nonces = [schnorr.gen_nonce(key, message) for key in keys]
        e = schnorr.challenge(schnorr.combine_nonces([n.public for n in nonces]), message)
        partials = [schnorr.partial_sign(key, nonce, e, signer_id=key.owner_id) for key, nonce in zip(keys, nonces)]
        signature = schnorr.combine_partials(partials, e)
        publics = [key.public for key in keys]
        q_bar = schnorr.combine_keys(publics)

        rows.append(
            {
                "T": threshold,
                "iterations": iterations,
                "key_combination_ns": median_ns(lambda: schnorr.combine_keys(publics), iterations),
                "inclusion_check_ns": median_ns(lambda: verify_inclusion(tree.root, leaf, proof), iterations),
                "sig_verify_ns": median_ns(lambda: schnorr.verify_multisig(signature, q_bar, message), iterations),
            }
        )
    return pd.DataFrame(rows)


def bench_summary(issuance: pd.DataFrame, verification: pd.DataFrame) -> Dict[str, Any]:
    per_t = (
        issuance.groupby("T")
        .agg(
            mean_blocks=("blocks_elapsed", "mean"),
            median_blocks=("blocks_elapsed", "median"),
            mean_sim_seconds=("sim_seconds", "mean"),
            tx_count=("tx_count", "max"),
            total_gas=("total_gas", "mean"),
            renewal_gas=("renewal_gas", "mean"),
            creation_gas=("creation_gas", "mean"),
        )
        .reset_index()
    )
    sig = verification["sig_verify_ns"]
    summary: Dict[str, Any] = {
        "per_threshold": per_t.to_dict(orient="records"),
        "sig_verify_ratio": float(sig.max() / sig.min()) if len(sig) else None,
        "key_combination_increasing": bool(verification["key_combination_ns"].is_monotonic_increasing),
    }
    if issuance["T"].nunique() >= 2:
        summary["gas_regression"] = gas_regression(issuance)
    return summary
