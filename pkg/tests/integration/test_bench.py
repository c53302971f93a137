"""Integration tests for the benchmark campaigns."""

import pandas as pd
import pytest

from src.blockpki.cli.bench import (
    ISSUANCE_COLUMNS,
    bench_issuance,
    bench_summary,
    bench_verification,
    gas_regression,
    median_ns,
    scenario_for_threshold,
)

pytestmark = pytest.mark.integration


@pytest.fixture(scope="module")
def issuance_frame():
    from src.blockpki.features.actors.models import ScenarioConfig
    from src.blockpki.features.ledger import ChainConfig

    base = ScenarioConfig(
        chain=ChainConfig(confirmation_depth=0, mean_block_interval=15.0, genesis_time=1514764800),
        group="secp256k1",
        threshold=2,
        seed=7,
    )
    return bench_issuance([2, 5, 10, 20], repetitions=1, seed=11, base=base)


class TestIssuanceBench:
    def test_columns_and_rows(self, issuance_frame):
        assert list(issuance_frame.columns) == ISSUANCE_COLUMNS
        assert issuance_frame["T"].tolist() == [2, 5, 10, 20]

    def test_transaction_counts(self, issuance_frame):
        assert (issuance_frame["tx_count"] == 2 * issuance_frame["T"] + 2).all()

    def test_gas_is_linear_in_threshold(self, issuance_frame):
        regression = gas_regression(issuance_frame)
        assert regression["r_squared"] >= 0.99
        assert regression["slope"] > 0

    def test_creation_dominates(self, issuance_frame):
        assert (issuance_frame["most_expensive_method"] == "create_domain_contract").all()
        assert (issuance_frame["creation_gas"] > 0).all()

    def test_renewal_saves_creation(self, issuance_frame):
        expected = issuance_frame["total_gas"] - issuance_frame["creation_gas"]
        assert (issuance_frame["renewal_gas"] == expected).all()

    def test_scenario_for_threshold(self, scenario_for):
        base = scenario_for(2)
        scenario = scenario_for_threshold(base, 5)
        assert scenario.authorized_ca_ids == ["CA1", "CA2", "CA3", "CA4", "CA5"]
        assert scenario.chain == base.chain


class TestRegression:
    def test_perfect_line(self):
        df = pd.DataFrame({"T": [1, 2, 3], "total_gas": [10, 20, 30]})
        result = gas_regression(df)
        assert result["slope"] == pytest.approx(10)
        assert result["r_squared"] == pytest.approx(1.0)

    def test_needs_two_thresholds(self):
        with pytest.raises(ValueError):
            gas_regression(pd.DataFrame({"T": [2, 2], "total_gas": [1, 2]}))


class TestVerificationBench:
    def test_median_ns_counts_iterations(self):
        calls = []
        assert median_ns(lambda: calls.append(1), 25) >= 0
        assert len(calls) == 25

    @pytest.mark.slow
    def test_signature_check_flat_key_combination_grows(self):
        frame = bench_verification([2, 5, 10, 20], iterations=1000, group_name="secp256k1")
        summary = bench_summary(
            pd.DataFrame({"T": [2, 5], "blocks_elapsed": [4, 4], "sim_seconds": [60.0, 60.0], "tx_count": [6, 12],
                          "total_gas": [1, 2], "renewal_gas": [1, 1], "creation_gas": [1, 1]}),
            frame,
        )
        assert summary["sig_verify_ratio"] <= 1.5
        assert summary["key_combination_increasing"]

    def test_small_run_shape(self):
        frame = bench_verification([1, 3], iterations=5, group_name="tiny", leaves=8)
        assert list(frame.columns) == ["T", "iterations", "key_combination_ns", "inclusion_check_ns", "sig_verify_ns"]
        assert (frame["iterations"] == 5).all()


def test_summary_from_campaign(issuance_frame):
    verification = bench_verification([2, 5, 10, 20], iterations=3, group_name="tiny", leaves=4)
    summary = bench_summary(issuance_frame, verification)
    assert [row["T"] for row in summary["per_threshold"]] == [2, 5, 10, 20]
    assert summary["gas_regression"]["r_squared"] >= 0.99
