"""Unit tests for the central, domain and storage contracts."""

import pytest

from src.blockpki.core.canonical import canonical_json, derive_address
from src.blockpki.features.certificates.encoding import canonical_encode, nonce_message
from src.blockpki.features.certificates.service import CertificateService
from src.blockpki.features.contracts.events import scan_events
from src.blockpki.features.contracts.models import CertData
from src.blockpki.features.contracts.runtime import CENTRAL_ADDRESS, STORAGE_ADDRESS, ContractRuntime, contract_call
from src.blockpki.features.ledger import Ledger

FUNDS = 10**15
COMP = 1_000_000
GENESIS = 1514764800


@pytest.fixture
def cas(secp_schnorr, runtime, ledger):
    registered = {}
    for ca_id in ("CA1", "CA2", "CA3"):
        key = secp_schnorr.keygen(f"contract-test-{ca_id}".encode(), owner_id=ca_id)
        address = derive_address("ca", ca_id)
        runtime.register_ca(ca_id, address, secp_schnorr.group.element_hex(key.public))
        ledger.fund(address, FUNDS)
        registered[ca_id] = (address, key)
    return registered


@pytest.fixture
def requester(ledger, alice):
    ledger.fund(alice, FUNDS)
    return alice


@pytest.fixture
def cert_data(secp_schnorr):
    subject_key = secp_schnorr.keygen(b"subject")
    return CertData(
        subject_name="www.example.com",
        public_key=secp_schnorr.group.element_hex(subject_key.public),
        not_before=GENESIS,
        not_after=GENESIS + 86400,
    )


def mine(ledger, blocks=1):
    for _ in range(blocks):
        ledger.mine_next_block(ledger.tip.header.timestamp + 15)


def create_args(cert_data, addresses, threshold=None, first_t_mode=False):
    args = {
        "cert_data": cert_data.model_dump(),
        "authorized_cas": list(addresses),
        "compensations": {a: COMP for a in addresses},
    }
    if threshold is not None:
        args["threshold"] = threshold
        args["first_t_mode"] = first_t_mode
    return args


class Issuance:
    """Drives one signing round by hand, one block per protocol step."""

    def __init__(self, ledger, runtime, schnorr, cas, requester, cert_data):
        self.ledger = ledger
        self.runtime = runtime
        self.schnorr = schnorr
        self.cas = cas
        self.requester = requester
        self.cert_data = cert_data
        self.nonces = {}

    def create(self, ca_ids, value=None, **kwargs):
        addresses = [self.cas[c][0] for c in ca_ids]
        t = kwargs.get("threshold") or len(ca_ids)
        args = create_args(self.cert_data, addresses, **kwargs)
        value = COMP * t if value is None else value
        tx_hash = self.ledger.submit_tx(
            contract_call(self.requester, CENTRAL_ADDRESS, "create_domain_contract", args, value=value)
        )
        mine(self.ledger)
        events = scan_events(self.ledger, kinds=["newDomainContract"])
        self.address = events[-1].contract_address if events else None
        return tx_hash

    def send_nonces(self, ca_ids, round_=0):
        hashes = []
        for ca_id in ca_ids:
            address, key = self.cas[ca_id]
            nonce = self.schnorr.gen_nonce(key, nonce_message(self.cert_data), f"{self.address}:{round_}".encode())
            self.nonces[ca_id] = nonce
            hashes.append(
                self.ledger.submit_tx(
                    contract_call(
                        address,
                        self.address,
                        "send_cert_pub_nonce",
                        {"nonce": self.schnorr.group.encode(nonce.public).hex()},
                    )
                )
            )
        mine(self.ledger)
        return hashes

    def challenge(self):
        contract = self.runtime.domain_contract(self.address)
        signers = [self.runtime.ca_id_for(a) for a in contract.nonce_order]
        n_bar = self.schnorr.combine_nonces([self.nonces[c].public for c in signers])
        return self.schnorr.challenge(n_bar, canonical_encode(self.cert_data, signers))

    def send_signatures(self, ca_ids, tamper=()):
        e = self.challenge()
        hashes = []
        for ca_id in ca_ids:
            address, key = self.cas[ca_id]
            s = self.schnorr.partial_sign(key, self.nonces[ca_id], e, signer_id=ca_id).s
            if ca_id in tamper:
                s = (s + 1) % self.schnorr.params.q
            hashes.append(
                self.ledger.submit_tx(
                    contract_call(address, self.address, "send_cert_signature", {"s": self.schnorr.group.scalar_hex(s)})
                )
            )
        mine(self.ledger)
        return hashes


@pytest.fixture
def issuance(ledger, runtime, secp_schnorr, cas, requester, cert_data):
    return Issuance(ledger, runtime, secp_schnorr, cas, requester, cert_data)


class TestCreateDomainContract:
    def test_creates_contract_and_escrows_funds(self, issuance, ledger, runtime, requester):
        tx_hash = issuance.create(["CA1", "CA2"])

        receipt = ledger.get_tx(tx_hash)
        assert receipt.status == "success"
        assert runtime.created_domain_contracts() == [issuance.address]
        assert issuance.address == derive_address("domain-contract", requester, "0")

        contract = runtime.domain_contract(issuance.address)
        assert contract.threshold_T == 2
        assert contract.escrow == 2 * COMP
        assert ledger.balance(issuance.address) == 2 * COMP
        assert ledger.balance(CENTRAL_ADDRESS) == 0

        (event,) = scan_events(ledger)
        assert event.data["authorized_cas"] == ["CA1", "CA2"]
        assert event.data["subject_name"] == "www.example.com"
        assert event.data["requester"] == requester
        assert event.data["public_key"] == issuance.cert_data.public_key
        assert (event.data["not_before"], event.data["not_after"]) == (GENESIS, GENESIS + 86400)

    def test_creation_gas(self, issuance, ledger, cas):
        tx_hash = issuance.create(["CA1", "CA2"])
        args = create_args(issuance.cert_data, [cas["CA1"][0], cas["CA2"][0]])
        expected = 21000 + 32000 + 1200 * 640 + 640 * len(canonical_json(args)) + 375
        assert ledger.get_tx(tx_hash).gas_used == expected

    def test_underfunded_request_reverts(self, issuance, ledger, runtime, requester):
        tx_hash = issuance.create(["CA1", "CA2"], value=COMP)
        receipt = ledger.get_tx(tx_hash)
        assert receipt.status == "reverted"
        assert receipt.error == "InsufficientFunds"
        assert runtime.created_domain_contracts() == []
        assert ledger.balance(requester) == FUNDS - receipt.fee

    def test_unregistered_ca_reverts(self, ledger, requester, cert_data, bob):
        args = create_args(cert_data, [bob])
        tx_hash = ledger.submit_tx(
            contract_call(requester, CENTRAL_ADDRESS, "create_domain_contract", args, value=COMP)
        )
        mine(ledger)
        assert ledger.get_tx(tx_hash).error == "InvalidParams"

    def test_duplicate_ca_reverts(self, ledger, requester, cert_data, cas):
        address = cas["CA1"][0]
        args = create_args(cert_data, [address, address])
        tx_hash = ledger.submit_tx(
            contract_call(requester, CENTRAL_ADDRESS, "create_domain_contract", args, value=2 * COMP)
        )
        mine(ledger)
        assert ledger.get_tx(tx_hash).error == "InvalidParams"

    def test_threshold_must_match_without_first_t(self, issuance, ledger):
        tx_hash = issuance.create(["CA1", "CA2", "CA3"], threshold=2)
        assert ledger.get_tx(tx_hash).error == "InvalidParams"


class TestSigningRounds:
    def test_full_round(self, issuance, ledger, runtime, secp_schnorr, cas):
        issuance.create(["CA1", "CA2"])
        issuance.send_nonces(["CA1", "CA2"])

        contract = runtime.domain_contract(issuance.address)
        assert contract.all_cert_nonces
        (gathered,) = scan_events(ledger, kinds=["allCertNoncesGathered"])
        assert gathered.data["signers"] == ["CA1", "CA2"]

        sig_hashes = issuance.send_signatures(["CA1", "CA2"])
        contract = runtime.domain_contract(issuance.address)
        assert contract.round_complete
        assert contract.escrow == 0
        assert scan_events(ledger, kinds=["allCertSignaturesGathered"])

        for ca_id, tx_hash in zip(["CA1", "CA2"], sig_hashes):
            assert ledger.get_tx(tx_hash).gas_used == 21000 + 32 * 640 + (375 if ca_id == "CA2" else 0)

        payload = CertificateService(secp_schnorr).merge_signatures(contract, runtime.ca_registry())
        assert payload.issuers == ["CA1", "CA2"]
        assert ledger.check_conservation()

    def test_compensation_paid_to_signers(self, issuance, ledger, cas):
        issuance.create(["CA1", "CA2"])
        nonce_hashes = issuance.send_nonces(["CA1", "CA2"])
        sig_hashes = issuance.send_signatures(["CA1", "CA2"])

        for ca_id, n_hash, s_hash in zip(["CA1", "CA2"], nonce_hashes, sig_hashes):
            fees = ledger.get_tx(n_hash).fee + ledger.get_tx(s_hash).fee
            assert ledger.balance(cas[ca_id][0]) == FUNDS - fees + COMP

    def test_duplicate_and_unauthorized_nonces_ignored(self, issuance, ledger, runtime):
        issuance.create(["CA1", "CA2"])
        issuance.send_nonces(["CA1"])
        (duplicate,) = issuance.send_nonces(["CA1"])
        (outsider,) = issuance.send_nonces(["CA3"])

        for tx_hash in (duplicate, outsider):
            receipt = ledger.get_tx(tx_hash)
            assert receipt.status == "success"
            assert receipt.gas_used == 21000

        contract = runtime.domain_contract(issuance.address)
        assert contract.nonce_count == 1
        assert not contract.all_cert_nonces

    def test_signature_before_nonce_round_ignored(self, issuance, ledger, runtime, cas):
        issuance.create(["CA1", "CA2"])
        address = cas["CA1"][0]
        tx_hash = ledger.submit_tx(contract_call(address, issuance.address, "send_cert_signature", {"s": "01"}))
        mine(ledger)
        assert ledger.get_tx(tx_hash).status == "success"
        assert runtime.domain_contract(issuance.address).sig_count == 0

    def test_malformed_nonce_reverts(self, issuance, ledger, cas):
        issuance.create(["CA1", "CA2"])
        tx_hash = ledger.submit_tx(
            contract_call(cas["CA1"][0], issuance.address, "send_cert_pub_nonce", {"nonce": "zz"})
        )
        mine(ledger)
        assert ledger.get_tx(tx_hash).error == "InvalidParams"

    def test_first_t_mode_takes_first_signers(self, issuance, ledger, runtime, cas):
        issuance.create(["CA1", "CA2", "CA3"], threshold=2, first_t_mode=True)
        contract = runtime.domain_contract(issuance.address)
        assert contract.escrow == 2 * COMP

        issuance.send_nonces(["CA1", "CA2", "CA3"])
        contract = runtime.domain_contract(issuance.address)
        assert contract.nonce_order == [cas["CA1"][0], cas["CA2"][0]]

        *_, late = issuance.send_signatures(["CA1", "CA2", "CA3"])
        contract = runtime.domain_contract(issuance.address)
        assert contract.round_complete
        assert cas["CA3"][0] not in contract.paid
        assert ledger.get_tx(late).gas_used == 21000


class TestOnchainSignatureCheck:
    @pytest.fixture
    def runtime(self, secp_schnorr):
        return ContractRuntime(secp_schnorr, onchain_signature_check=True, issuance_timeout_blocks=20)

    def test_bad_partial_rejected_without_payment(self, issuance, ledger, runtime, cas):
        issuance.create(["CA1", "CA2"])
        issuance.send_nonces(["CA1", "CA2"])
        bad, good = issuance.send_signatures(["CA1", "CA2"], tamper=("CA1",))

        contract = runtime.domain_contract(issuance.address)
        assert contract.rejected_sigs == [cas["CA1"][0]]
        assert contract.paid == [cas["CA2"][0]]
        assert ledger.get_tx(bad).gas_used == 21000 + 3000
        assert ledger.get_tx(good).gas_used == 21000 + 3000 + 32 * 640


class TestRenewCancelWithdraw:
    def test_renew_starts_new_round(self, issuance, ledger, runtime, requester):
        issuance.create(["CA1", "CA2"])
        issuance.send_nonces(["CA1", "CA2"])
        issuance.send_signatures(["CA1", "CA2"])

        tx_hash = ledger.submit_tx(
            contract_call(
                requester,
                issuance.address,
                "renew",
                {"not_before": GENESIS + 86400, "not_after": GENESIS + 2 * 86400},
                value=2 * COMP,
            )
        )
        mine(ledger)
        assert ledger.get_tx(tx_hash).status == "success"

        contract = runtime.domain_contract(issuance.address)
        assert contract.round == 1
        assert contract.nonce_count == 0
        assert contract.cert_data.not_before == GENESIS + 86400
        renewal = scan_events(ledger, kinds=["newDomainContract"])[-1]
        assert renewal.data["renewal"] is True
        assert renewal.data["not_before"] == GENESIS + 86400
        assert renewal.round == 1

    def test_renew_refused_mid_round(self, issuance, ledger, requester):
        issuance.create(["CA1", "CA2"])
        tx_hash = ledger.submit_tx(
            contract_call(requester, issuance.address, "renew", {"not_before": GENESIS, "not_after": GENESIS + 10})
        )
        mine(ledger)
        assert ledger.get_tx(tx_hash).error == "RoundInProgress"

    def test_only_requester_renews(self, issuance, ledger, cas):
        issuance.create(["CA1", "CA2"])
        tx_hash = ledger.submit_tx(
            contract_call(cas["CA1"][0], issuance.address, "renew", {"not_before": GENESIS, "not_after": GENESIS + 10})
        )
        mine(ledger)
        assert ledger.get_tx(tx_hash).error == "InvalidParams"

    def test_cancel_after_timeout_refunds(self, issuance, ledger, runtime, requester):
        issuance.create(["CA1", "CA2"])
        early = ledger.submit_tx(contract_call(requester, issuance.address, "cancel", {}))
        mine(ledger)
        assert ledger.get_tx(early).error == "TooEarly"

        mine(ledger, 20)
        before = ledger.balance(requester)
        tx_hash = ledger.submit_tx(contract_call(requester, issuance.address, "cancel", {}))
        mine(ledger)

        receipt = ledger.get_tx(tx_hash)
        assert receipt.status == "success"
        assert ledger.balance(requester) == before + 2 * COMP - receipt.fee
        contract = runtime.domain_contract(issuance.address)
        assert contract.closed
        assert contract.escrow == 0

    def test_withdraw_surplus(self, issuance, ledger, runtime, requester):
        issuance.create(["CA1", "CA2"], value=2 * COMP + 5000)
        before = ledger.balance(requester)
        tx_hash = ledger.submit_tx(contract_call(requester, issuance.address, "withdraw_surplus", {}))
        mine(ledger)

        assert ledger.balance(requester) == before + 5000 - ledger.get_tx(tx_hash).fee
        assert runtime.domain_contract(issuance.address).escrow == 2 * COMP


class TestStorageContract:
    def test_unparseable_payload_kept_raw(self, ledger, runtime, requester):
        ledger.submit_tx(contract_call(requester, STORAGE_ADDRESS, "store_certificate", {"certificate": {"x": 1}}))
        mine(ledger)
        (record,) = runtime.stored_certificates()
        assert record.cert_data is None
        assert record.raw_payload == '{"x":1}'
        assert record.sender == requester


class TestScanEvents:
    def test_filters(self, issuance, ledger):
        issuance.create(["CA1", "CA2"])
        issuance.send_nonces(["CA1", "CA2"])
        assert len(scan_events(ledger)) == 2
        assert len(scan_events(ledger, from_height=2)) == 1
        assert scan_events(ledger, from_height=3, to_height=1) == []
        assert scan_events(ledger, contract_address="0x" + "0" * 40) == []


def test_ledger_without_runtime_treats_contracts_as_accounts(chain_config, alice):
    ledger = Ledger(chain_config)
    ledger.fund(alice, FUNDS)
    tx_hash = ledger.submit_tx(contract_call(alice, CENTRAL_ADDRESS, "create_domain_contract", {}, value=10))
    mine(ledger)
    assert ledger.get_tx(tx_hash).status == "success"
    assert ledger.balance(CENTRAL_ADDRESS) == 10
