"""Integration tests for the issuance workflow driven by the event loop."""

import numpy as np
import pytest

from src.blockpki.features.actors.simulation import run_issuance, run_renewal
from src.blockpki.features.ledger import dumps_chain

pytestmark = pytest.mark.integration


class TestIdealSchedule:
    @pytest.mark.parametrize("threshold", [1, 2, 5])
    def test_four_blocks_without_confirmations(self, scenario_for, threshold):
        _, _, outcome = run_issuance(scenario_for(threshold))
        assert outcome.succeeded
        assert outcome.logged
        assert outcome.metrics.blocks_elapsed == 4
        assert outcome.certificate.block_no == 4

    def test_sixteen_blocks_with_twelve_confirmations(self, scenario_for):
        sim, _, outcome = run_issuance(scenario_for(2, depth=12))
        assert outcome.metrics.blocks_elapsed == 16
        assert sim.ledger.confirmations(outcome.certificate.transaction.tx_hash) == 12

    @pytest.mark.parametrize("threshold", [2, 5, 10, 20])
    def test_transaction_count(self, scenario_for, threshold):
        _, _, outcome = run_issuance(scenario_for(threshold))
        assert outcome.metrics.tx_count == 2 * threshold + 2
        methods = [t.method for t in outcome.metrics.per_tx]
        assert methods.count("send_cert_pub_nonce") == threshold
        assert methods.count("send_cert_signature") == threshold
        assert methods.count("create_domain_contract") == 1
        assert methods.count("store_certificate") == 1

    def test_creation_is_most_expensive(self, scenario_for):
        _, _, outcome = run_issuance(scenario_for(5))
        costs = sorted(outcome.metrics.per_tx, key=lambda t: t.gas_used, reverse=True)
        assert costs[0].method == "create_domain_contract"
        assert costs[0].gas_used > costs[1].gas_used

    def test_fees_and_compensation_balance(self, scenario_for):
        scenario = scenario_for(2)
        sim, requester, outcome = run_issuance(scenario)
        assert outcome.metrics.total_fees == outcome.metrics.total_gas * scenario.chain.gas_price
        assert sim.ledger.check_conservation()
        for agent in sim.cas.values():
            own_fees = sum(t.fee for t in outcome.metrics.per_tx if t.sender == agent.address)
            assert sim.ledger.balance(agent.address) == scenario.ca_funds - own_fees + scenario.compensation_per_ca

    def test_certificate_verifies_for_every_tier(self, scenario_for):
        sim, _, outcome = run_issuance(scenario_for(3))
        cert = outcome.certificate
        assert cert.payload.issuers == ["CA1", "CA2", "CA3"]
        for mode in ("unaware", "light", "full"):
            result = sim.certificates.verify_certificate(cert, sim.trust_store(mode), "www.example.com", int(sim.now))
            assert result.accepted, mode

    def test_requester_state_reaches_done(self, scenario_for):
        _, requester, _ = run_issuance(scenario_for(2))
        assert requester.state == "done"
        assert requester.done.triggered


class TestFailures:
    def test_unresponsive_ca_times_out(self, scenario_for):
        scenario = scenario_for(2, cas=[{"ca_id": "CA1"}, {"ca_id": "CA2", "behavior": "unresponsive"}])
        sim, requester, outcome = run_issuance(scenario)

        assert not outcome.succeeded
        assert outcome.failure.reason == "IssuanceTimeout"
        assert outcome.failure.blocking_ca_ids == ["CA2"]
        assert outcome.metrics.misbehavior == {"CA2": "unresponsive"}

        contract = sim.runtime.domain_contract(outcome.contract_address)
        assert contract.closed
        assert contract.escrow == 0
        cancel = sim.ledger.get_tx(requester.cancel_tx)
        assert cancel.status == "success"

    def test_garbage_signer_named(self, scenario_for):
        scenario = scenario_for(2, cas=[{"ca_id": "CA1"}, {"ca_id": "CA2", "behavior": "garbage_signer"}])
        _, _, outcome = run_issuance(scenario)
        assert outcome.failure.reason == "AssemblyFailed"
        assert outcome.failure.bad_ca_ids == ["CA2"]
        assert outcome.metrics.misbehavior == {"CA2": "garbage_signature"}
        assert outcome.certificate is None

    def test_onchain_check_turns_garbage_into_timeout(self, scenario_for):
        scenario = scenario_for(
            2,
            cas=[{"ca_id": "CA1"}, {"ca_id": "CA2", "behavior": "garbage_signer"}],
            onchain_signature_check=True,
        )
        sim, _, outcome = run_issuance(scenario)
        assert outcome.failure.reason == "IssuanceTimeout"
        assert outcome.failure.blocking_ca_ids == ["CA2"]
        contract = sim.runtime.domain_contract(outcome.contract_address)
        assert contract.rejected_sigs == [sim.cas["CA2"].address]

    def test_first_t_mode_survives_unresponsive_ca(self, scenario_for):
        scenario = scenario_for(
            2,
            cas=[{"ca_id": "CA1"}, {"ca_id": "CA2", "behavior": "unresponsive"}, {"ca_id": "CA3"}],
            first_t_mode=True,
        )
        _, _, outcome = run_issuance(scenario)
        assert outcome.succeeded
        assert outcome.certificate.payload.issuers == ["CA1", "CA3"]
        assert outcome.metrics.blocks_elapsed == 4

    def test_unfunded_requester(self, scenario_for):
        scenario = scenario_for(2, requester_funds=10)
        _, _, outcome = run_issuance(scenario)
        assert outcome.failure.reason == "InsufficientBalance"


class TestRenewal:
    def test_renewal_skips_contract_creation(self, scenario_for):
        sim, requester, first = run_issuance(scenario_for(2))
        renewal = run_renewal(sim, requester)

        assert renewal.succeeded
        assert renewal.round == 1
        assert renewal.contract_address == first.contract_address
        assert renewal.metrics.tx_count == 2 * 2 + 2
        assert renewal.metrics.gas_of("create_domain_contract") == []
        assert renewal.certificate.payload.not_before > first.certificate.payload.not_before

    def test_renewal_gas_is_issuance_minus_creation(self, scenario_for):
        sim, requester, first = run_issuance(scenario_for(5))
        renewal = run_renewal(sim, requester)
        creation = first.metrics.gas_of("create_domain_contract")[0] - renewal.metrics.gas_of("renew")[0]
        assert renewal.metrics.total_gas == first.metrics.total_gas - creation


class TestDeterminism:
    def test_same_seed_same_tip(self, scenario_for):
        tips = set()
        dumps = set()
        for _ in range(3):
            sim, _, _ = run_issuance(scenario_for(2))
            tips.add(sim.ledger.tip.header.block_hash)
            dumps.add(dumps_chain(sim.ledger.blocks))
        assert len(tips) == 1
        assert len(dumps) == 1

    def test_different_seed_different_chain(self, scenario_for):
        a, _, _ = run_issuance(scenario_for(2), seed=1)
        b, _, _ = run_issuance(scenario_for(2), seed=2)
        assert a.ledger.tip.header.block_hash != b.ledger.tip.header.block_hash


@pytest.mark.slow
class TestLatencyDistribution:
    RUNS = 200

    def _seconds(self, scenario_for, depth):
        seconds = []
        for seed in range(self.RUNS):
            scenario = scenario_for(2, depth=depth, latency={"mean_tx_latency": 3.0, "mean_validation_delay": 2.0})
            _, _, outcome = run_issuance(scenario, seed)
            assert outcome.succeeded
            seconds.append(outcome.metrics.wall_time_simulated)
        return np.array(seconds)

    def test_median_issuance_and_confirmation_delta(self, scenario_for):
        base = self._seconds(scenario_for, 0)
        confirmed = self._seconds(scenario_for, 12)
        assert np.median(base) < 120
        delta = np.median(confirmed) - np.median(base)
        assert 120 <= delta <= 240
