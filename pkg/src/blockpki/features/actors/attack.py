"""Adversary scenarios: i compromised CAs plus j impersonated validation paths."""

from typing import Iterable, List, Optional

from ...core.structured_logging import get_logger
from ...exceptions import IssuanceTimeout
from ..certificates.models import CLIENT_MODES, ClientMode
from ..validation.models import AdversaryConfig
from .models import AttackReport, CaSpec, IssuanceFailure, ScenarioConfig
from .monitor import monitor_scan
from .simulation import Simulation, run_issuance

logger = get_logger("blockpki.attack")


def _honest_ids(taken: Iterable[str], count: int) -> List[str]:
    taken = set(taken)
    ids: List[str] = []
    n = 1
    while len(ids) < count:
        candidate = f"CA{n}"
        if candidate not in taken:
            ids.append(candidate)
        n += 1
    return ids


def attack_scenario(adversary: AdversaryConfig, threshold: int, base: Optional[ScenarioConfig] = None) -> ScenarioConfig:
    """Scenario with the adversary's CAs plus ``threshold`` honest CAs serving the real owner."""
    base = base or ScenarioConfig()
    controlled = list(dict.fromkeys(adversary.compromised_cas + [ca for ca, _ in adversary.impersonated_edges]))
    honest = _honest_ids(controlled, threshold)
    cas = [
        CaSpec(ca_id=ca_id, behavior="compromised" if ca_id in adversary.compromised_cas else "honest")
        for ca_id in controlled
    ] + [CaSpec(ca_id=ca_id) for ca_id in honest]

    data = base.model_dump()
    data.update(
        threshold=threshold,
        cas=[ca.model_dump() for ca in cas],
        authorized_cas=honest,
        first_t_mode=False,
        client_threshold=threshold,
        domain=adversary.target_domain,
        adversary=adversary.model_dump(),
    )
    return ScenarioConfig.model_validate(data)


def run_attack(
    adversary: AdversaryConfig,
    threshold: int,
    client_tiers: Iterable[ClientMode] = CLIENT_MODES,
    base: Optional[ScenarioConfig] = None,
    seed: Optional[int] = None,
) -> AttackReport:
    """Replay the owner's legitimate issuance, then the adversary's attempt.

    The adversary's domain contract authorizes every CA it controls, topped
    up with honest CAs when it controls fewer than ``threshold``. Honest CAs
    refuse because the adversary cannot answer their challenges, so a
    certificate exists only when i + j >= threshold.
    """
    scenario = attack_scenario(adversary, threshold, base)
    sim = Simulation(scenario, seed)
    owner = sim.add_requester("owner", adversary.target_domain)
    impostor = sim.add_requester(
        adversary.adversary_id,
        adversary.target_domain,
        owner=False,
        log_certificate=adversary.log_certificate,
    )

    run_issuance(sim=sim, requester=owner)

    controlled = [ca.ca_id for ca in scenario.cas if ca.ca_id not in scenario.authorized_ca_ids]
    authorized = controlled + scenario.authorized_ca_ids[: max(threshold - len(controlled), 0)]
    impostor.request_certificate(
        authorized,
        scenario.compensation_per_ca,
        scenario.cert_lifetime_seconds,
        threshold=threshold,
        first_t_mode=len(authorized) > threshold,
    )
    try:
        sim.run_until(impostor.done)
    except IssuanceTimeout as e:
        impostor.failure = IssuanceFailure(reason=e.error_code, detail=e.detail)

    outcome = impostor.outcome()
    report = AttackReport(
        threshold=threshold,
        i=adversary.i,
        j=adversary.j,
        logged=outcome.logged,
        constructible=outcome.certificate is not None,
        failure=outcome.failure,
    )
    if outcome.certificate is not None:
        now = int(sim.now)
        for tier in client_tiers:
            result = sim.certificates.verify_certificate(
                outcome.certificate, sim.trust_store(tier, threshold), adversary.target_domain, now
            )
            report.accepted[tier] = result.accepted
            report.reject_reasons[tier] = result.reason
    else:
        for tier in client_tiers:
            report.accepted[tier] = False
            report.reject_reasons[tier] = None

    report.anomalies = monitor_scan(sim.ledger, {adversary.target_domain: owner.address})
    logger.info(
        "attack_replayed",
        threshold=threshold,
        i=report.i,
        j=report.j,
        constructible=report.constructible,
        logged=report.logged,
        anomalies=len(report.anomalies),
    )
    return report


def threshold_grid(
    threshold: int,
    max_total: Optional[int] = None,
    target_domain: str = "www.example.com",
    log_certificate: bool = True,
    client_tiers: Iterable[ClientMode] = CLIENT_MODES,
    base: Optional[ScenarioConfig] = None,
    seed: Optional[int] = None,
) -> List[AttackReport]:
    """Every (i, j) with i + j <= ``max_total`` (default threshold + 1)."""
    if max_total is None:
        max_total = threshold + 1
    tiers = list(client_tiers)
    reports = []
    for i in range(max_total + 1):
        for j in range(max_total + 1 - i):
            adversary = AdversaryConfig(
                target_domain=target_domain,
                compromised_cas=[f"X{n}" for n in range(1, i + 1)],
                impersonated_edges=[(f"Y{n}", target_domain) for n in range(1, j + 1)],
                log_certificate=log_certificate,
            )
            reports.append(run_attack(adversary, threshold, tiers, base, seed))
    return reports
