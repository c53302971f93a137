"""
Command-line entry point.

Usage:
    python -m src.blockpki.cli.main issue --config scenario.json --seed 7 --out run/
    python -m src.blockpki.cli.main verify run/certificate.json --truststore run/truststore.json \
        --domain www.example.com --mode light --chain run/chain.jsonl
    python -m src.blockpki.cli.main attack --config attack.json --out report.json
    python -m src.blockpki.cli.main bench --threshold 2 5 10 20 --repetitions 3 --out bench/
    python -m src.blockpki.cli.main chain load run/chain.jsonl

Exit codes: 0 success/accept, 1 protocol reject or failure, 2 input error.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from ..config.settings import Settings
from ..core.structured_logging import configure_logging, get_logger
from ..exceptions import EXIT_INPUT_ERROR, EXIT_REJECT, BlockPKIError, ScenarioError
from ..features.actors.attack import run_attack, threshold_grid
from ..features.actors.models import IssuanceOutcome, ScenarioConfig, load_scenario
from ..features.actors.simulation import Simulation, run_issuance
from ..features.certificates.models import CLIENT_MODES
from ..features.certificates.service import (
    CertificateService,
    load_certificate,
    load_trust_store,
    save_certificate,
    save_trust_store,
)
from ..features.group_crypto.models import GroupParams
from ..features.group_crypto.service import SchnorrService
from ..features.ledger.persistence import dump_chain, dumps_chain, load_chain
from .bench import DEFAULT_THRESHOLDS, bench_issuance, bench_summary, bench_verification

logger = get_logger("blockpki.cli")

EXIT_OK = 0
# failures caused by the run's inputs rather than by the protocol
INPUT_FAILURES = ("InsufficientBalance", "UnknownSender")

METRICS_COLUMNS = ["repetition", "seed", "blocks_elapsed", "sim_seconds", "tx_count", "total_gas", "total_fees"]


def resolve_seed(arg: Optional[int], scenario: Optional[ScenarioConfig] = None) -> Optional[int]:
    """--seed, then BLOCKPKI_SEED, then the scenario file."""
    if arg is not None:
        return arg
    env_seed = Settings().BLOCKPKI_SEED
    if env_seed is not None:
        return env_seed
    return scenario.seed if scenario is not None else None


def _scenario(args: argparse.Namespace) -> ScenarioConfig:
    scenario = load_scenario(args.config) if getattr(args, "config", None) else ScenarioConfig()
    threshold = getattr(args, "threshold", None)
    if isinstance(threshold, int) and threshold != scenario.threshold:
        data = scenario.model_dump()
        data.update(threshold=threshold, cas=[], authorized_cas=None, first_t_mode=False)
        try:
            scenario = ScenarioConfig.model_validate(data)
        except ValueError as e:
            raise ScenarioError(f"Cannot apply --threshold {threshold}: {e}") from e
    return scenario


def _write_json(path: Path, data: Any) -> None:
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _metrics_row(repetition: int, seed: Optional[int], outcome: IssuanceOutcome) -> Dict[str, Any]:
    m = outcome.metrics
    return {
        "repetition": repetition,
        "seed": seed,
        "blocks_elapsed": m.blocks_elapsed,
        "sim_seconds": m.wall_time_simulated,
        "tx_count": m.tx_count,
        "total_gas": m.total_gas,
        "total_fees": m.total_fees,
    }


# commands


def cmd_issue(args: argparse.Namespace) -> int:
    scenario = _scenario(args)
    seed = resolve_seed(args.seed, scenario)
    repetitions = args.repetitions or scenario.repetitions
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows: List[Dict[str, Any]] = []
    first: Optional[tuple] = None
    for repetition in range(repetitions):
        run_seed = seed if seed is None or repetition == 0 else seed + repetition
        sim, _, outcome = run_issuance(scenario, run_seed)
        if first is None:
            first = (sim, outcome)
        if outcome.failure is not None:
            break
        rows.append(_metrics_row(repetition, run_seed, outcome))

    sim, outcome = first
    if outcome.failure is not None:
        failure = outcome.failure
        blocking = ", ".join(failure.blocking_ca_ids or failure.bad_ca_ids)
        print(f"issuance failed: {failure.reason}" + (f" ({blocking})" if blocking else ""), file=sys.stderr)
        return EXIT_INPUT_ERROR if failure.reason in INPUT_FAILURES else EXIT_REJECT

    cert = outcome.certificate
    save_certificate(cert, out / "certificate.json")
    save_trust_store(sim.trust_store("light"), out / "truststore.json")
    dump_chain(sim.ledger.blocks, out / "chain.jsonl")
    pd.DataFrame(rows, columns=METRICS_COLUMNS).to_csv(out / "metrics.csv", index=False)
    _write_json(
        out / "summary.json",
        {
            "domain": cert.payload.subject_name,
            "issuers": cert.payload.issuers,
            "blockNo": cert.block_no,
            "txHash": cert.transaction.tx_hash,
            "height": sim.ledger.height,
            "tipHash": sim.ledger.tip.header.block_hash,
            "seed": seed,
            "repetitions": len(rows),
            "metrics": outcome.metrics.model_dump(exclude={"per_tx"}),
            "perTx": [t.model_dump() for t in outcome.metrics.per_tx],
        },
    )
    print(f"certificate for {cert.payload.subject_name} logged in block {cert.block_no} "
          f"with {len(cert.payload.issuers)} issuers -> {out}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    cert = load_certificate(args.certificate)
    chain = load_chain(args.chain) if args.chain else None
    trust = load_trust_store(args.truststore, mode=args.mode, chain=chain)
    if args.threshold:
        trust = trust.model_copy(update={"threshold": args.threshold})

    if args.now is not None:
        now = args.now
    elif chain is not None:
        now = int(chain.tip.header.timestamp)
    else:
        now = cert.payload.not_before

    service = CertificateService(SchnorrService(GroupParams.named(trust.group)))
    result = service.verify_certificate(cert, trust, args.domain, now)
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if result.accepted:
        print("accept certificate")
        return EXIT_OK
    print(f"reject certificate: {result.reason}")
    return EXIT_REJECT


def cmd_attack(args: argparse.Namespace) -> int:
    scenario = _scenario(args)
    seed = resolve_seed(args.seed, scenario)

    if args.grid:
        reports = threshold_grid(
            scenario.threshold,
            target_domain=scenario.domain,
            log_certificate=scenario.adversary.log_certificate if scenario.adversary else True,
            client_tiers=scenario.client_tiers,
            base=scenario,
            seed=seed,
        )
        result: Dict[str, Any] = {
            "threshold": scenario.threshold,
            "grid": [
                {"i": r.i, "j": r.j, "constructible": r.constructible, "expected": r.i + r.j >= r.threshold}
                for r in reports
            ],
            "reports": [r.model_dump(mode="json") for r in reports],
        }
        for row in result["grid"]:
            print(f"i={row['i']} j={row['j']} constructible={row['constructible']}")
    else:
        if scenario.adversary is None:
            raise ScenarioError("Attack scenario needs an 'adversary' section (or use --grid)")
        report = run_attack(scenario.adversary, scenario.threshold, scenario.client_tiers, scenario, seed)
        result = report.model_dump(mode="json")
        result["detected"] = report.detected
        print(
            f"constructible={report.constructible} logged={report.logged} "
            + " ".join(f"{tier}={'accept' if ok else 'reject'}" for tier, ok in report.accepted.items())
            + f" anomalies={len(report.anomalies)}"
        )

    if args.out:
        _write_json(Path(args.out), result)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.config) if args.config else ScenarioConfig()
    seed = resolve_seed(args.seed, scenario)
    thresholds = args.threshold or list(DEFAULT_THRESHOLDS)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    issuance = bench_issuance(thresholds, args.repetitions or scenario.repetitions, seed, scenario)
    verification = bench_verification(thresholds, args.iterations, scenario.group)
    issuance.to_csv(out / "bench_issuance.csv", index=False)
    verification.to_csv(out / "bench_verification.csv", index=False)
    summary = bench_summary(issuance, verification)
    _write_json(out / "bench_summary.json", summary)

    regression = summary.get("gas_regression")
    if regression:
        print(f"gas = {regression['slope']:.1f}*T + {regression['intercept']:.1f} (R^2={regression['r_squared']:.4f})")
    print(f"signature verification max/min ratio: {summary['sig_verify_ratio']:.2f}")
    return EXIT_OK


def cmd_chain(args: argparse.Namespace) -> int:
    path = Path(args.path)
    if args.action == "load":
        chain = load_chain(path)
        print(f"chain ok: height {chain.height}, tip {chain.tip.header.block_hash}")
        return EXIT_OK

    if args.source:
        blocks = load_chain(args.source).blocks
    else:
        scenario = _scenario(args)
        sim = Simulation(scenario, resolve_seed(args.seed, scenario))
        run_issuance(sim=sim)
        blocks = sim.ledger.blocks
    path.write_text(dumps_chain(blocks), encoding="utf-8")
    print(f"wrote {len(blocks)} blocks to {path}")
    return EXIT_OK


# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blockpki", description="BlockPKI issuance simulator")
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    issue = sub.add_parser("issue", help="Run an issuance and write the certificate, trust store and chain")
    issue.add_argument("--config", help="Scenario JSON file")
    issue.add_argument("--seed", type=int, default=None)
    issue.add_argument("--threshold", type=int, default=None)
    issue.add_argument("--repetitions", type=int, default=None)
    issue.add_argument("--out", default="out")
    issue.set_defaults(func=cmd_issue)

    verify = sub.add_parser("verify", help="Verify a certificate as a client of the given tier")
    verify.add_argument("certificate")
    verify.add_argument("--truststore", required=True)
    verify.add_argument("--domain", required=True)
    verify.add_argument("--mode", choices=CLIENT_MODES, default="light")
    verify.add_argument("--now", type=int, default=None, help="Verification time (unix seconds)")
    verify.add_argument("--chain", default=None, help="Chain dump supplying headers (light) or blocks (full)")
    verify.add_argument("--threshold", type=int, default=None, help="Override the trust store policy")
    verify.set_defaults(func=cmd_verify)

    attack = sub.add_parser("attack", help="Replay an adversary scenario")
    attack.add_argument("--config", help="Scenario JSON file with an 'adversary' section")
    attack.add_argument("--seed", type=int, default=None)
    attack.add_argument("--threshold", type=int, default=None)
    attack.add_argument("--grid", action="store_true", help="Exhaustive (i, j) table for the threshold")
    attack.add_argument("--out", default=None)
    attack.set_defaults(func=cmd_attack)

    bench = sub.add_parser("bench", help="Issuance and verification benchmarks per threshold")
    bench.add_argument("--config", help="Base scenario JSON file")
    bench.add_argument("--seed", type=int, default=None)
    bench.add_argument("--threshold", type=int, nargs="+", default=None)
    bench.add_argument("--repetitions", type=int, default=None)
    bench.add_argument("--iterations", type=int, default=None)
    bench.add_argument("--out", default="bench")
    bench.set_defaults(func=cmd_bench)

    chain = sub.add_parser("chain", help="Dump or load a chain as JSON lines")
    chain.add_argument("action", choices=("dump", "load"))
    chain.add_argument("path")
    chain.add_argument("--source", default=None, help="Re-dump an existing chain file instead of simulating")
    chain.add_argument("--config", help="Scenario JSON file")
    chain.add_argument("--seed", type=int, default=None)
    chain.add_argument("--threshold", type=int, default=None)
    chain.set_defaults(func=cmd_chain)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.func(args)
    except BlockPKIError as e:
        logger.error("command_failed", command=args.command, error_code=e.error_code)
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
