"""
Custom Exceptions for the BlockPKI simulator
"""
from typing import Iterable, Optional

EXIT_REJECT = 1
EXIT_INPUT_ERROR = 2


class BlockPKIError(Exception):
    """Base exception for every BlockPKI error.

    ``exit_code`` is what the CLI returns when the error escapes a command:
    1 for protocol-level failures, 2 for input/environment problems.
    """

    error_code = "BLOCKPKI_ERROR"
    exit_code = EXIT_REJECT

    def __init__(self, detail: str = "BlockPKI operation failed", error_code: Optional[str] = None):
        super().__init__(detail)
        self.detail = detail
        if error_code is not None:
            self.error_code = error_code

    def to_dict(self) -> dict:
        return {"error": self.detail, "error_code": self.error_code}


# group_crypto


class EmptyAggregation(BlockPKIError):
    """Nothing to aggregate"""
    error_code = "EMPTY_AGGREGATION"

    def __init__(self, what: str = "values"):
        super().__init__(f"Cannot aggregate an empty list of {what}")


class DuplicateSigner(BlockPKIError):
    """Same signer submitted twice to one aggregation"""
    error_code = "DUPLICATE_SIGNER"

    def __init__(self, signer_id: str):
        super().__init__(f"Signer '{signer_id}' appears more than once")
        self.signer_id = signer_id


class NonceReuse(BlockPKIError):
    """A nonce pair was used a second time; doing so may leak the long-term key"""
    error_code = "NONCE_REUSE"

    def __init__(self, detail: str = "Nonce pair already consumed"):
        super().__init__(detail)


class InvalidGroupElement(BlockPKIError):
    """Bytes do not decode to an element of the group"""
    error_code = "INVALID_GROUP_ELEMENT"
    exit_code = EXIT_INPUT_ERROR


# merkle


class EmptyBlock(BlockPKIError):
    """Merkle tree requested over zero leaves"""
    error_code = "EMPTY_BLOCK"

    def __init__(self):
        super().__init__("Cannot build a Merkle tree without leaves")


class BadIndex(BlockPKIError):
    """Leaf index outside the tree"""
    error_code = "BAD_INDEX"

    def __init__(self, index: int, leaf_count: int):
        super().__init__(f"Leaf index {index} out of range for {leaf_count} leaves")


# ledger


class InsufficientBalance(BlockPKIError):
    """Sender cannot cover value plus the maximum fee"""
    error_code = "InsufficientBalance"
    exit_code = EXIT_INPUT_ERROR

    def __init__(self, address: str, needed: int, available: int):
        super().__init__(
            f"InsufficientBalance: {address} needs {needed}, has {available}"
        )
        self.address = address
        self.needed = needed
        self.available = available


class UnknownSender(BlockPKIError):
    """Transaction sender has no account"""
    error_code = "UnknownSender"
    exit_code = EXIT_INPUT_ERROR

    def __init__(self, address: str):
        super().__init__(f"UnknownSender: no account for {address}")


class UnknownTx(BlockPKIError):
    """Transaction hash never seen by the ledger"""
    error_code = "UnknownTx"

    def __init__(self, tx_hash: str):
        super().__init__(f"UnknownTx: {tx_hash}")


class Unmined(BlockPKIError):
    """Transaction still waiting in the mempool"""
    error_code = "Unmined"

    def __init__(self, tx_hash: str):
        super().__init__(f"Transaction {tx_hash} is not mined yet")


class ChainIntegrityError(BlockPKIError):
    """Chain dump does not verify (broken link, root mismatch, bad JSON)"""
    error_code = "CHAIN_INTEGRITY"
    exit_code = EXIT_INPUT_ERROR

    def __init__(self, detail: str, line_number: Optional[int] = None):
        if line_number is not None:
            detail = f"line {line_number}: {detail}"
        super().__init__(detail)
        self.line_number = line_number


# contracts


class ContractRevert(BlockPKIError):
    """Contract refused the call; state is rolled back, gas is still charged"""
    error_code = "REVERT"


class InvalidParams(ContractRevert):
    """Malformed contract parameters (empty or duplicate CA list, bad threshold)"""
    error_code = "InvalidParams"


class OutOfGas(ContractRevert):
    """Metered gas exceeded the transaction gas limit"""
    error_code = "OutOfGas"

    def __init__(self, gas_limit: int):
        super().__init__(f"Out of gas (limit {gas_limit})")


# validation


class NoControl(BlockPKIError):
    """Caller cannot serve content for the domain as seen by the challenging CA"""
    error_code = "NoControl"

    def __init__(self, caller: str, domain_name: str, ca_id: str):
        super().__init__(f"{caller} does not control {domain_name} from the view of {ca_id}")


class UnknownDomain(BlockPKIError):
    error_code = "UNKNOWN_DOMAIN"

    def __init__(self, domain_name: str):
        super().__init__(f"Domain '{domain_name}' is not registered in the simulation")


# certificates / actors


class AssemblyFailed(BlockPKIError):
    """Merged signature does not verify; the offending partials are named"""
    error_code = "AssemblyFailed"

    def __init__(self, bad_ca_ids: Iterable[str]):
        self.bad_ca_ids = sorted(bad_ca_ids)
        super().__init__(
            "AssemblyFailed: invalid partial signature from " + ", ".join(self.bad_ca_ids)
        )


class IssuanceTimeout(BlockPKIError):
    """Issuance did not complete before the timeout"""
    error_code = "IssuanceTimeout"

    def __init__(self, blocking_ca_ids: Iterable[str], blocks_waited: int):
        self.blocking_ca_ids = sorted(blocking_ca_ids)
        self.blocks_waited = blocks_waited
        super().__init__(
            f"IssuanceTimeout after {blocks_waited} blocks; blocking CAs: "
            + (", ".join(self.blocking_ca_ids) or "none")
        )


class CertificateFormatError(BlockPKIError):
    """Certificate file cannot be parsed"""
    error_code = "CERTIFICATE_FORMAT"
    exit_code = EXIT_INPUT_ERROR


class TrustStoreError(BlockPKIError):
    """Trust store cannot be loaded (parse error or failed proof of possession)"""
    error_code = "TRUST_STORE"
    exit_code = EXIT_INPUT_ERROR


class ScenarioError(BlockPKIError):
    """Scenario or config file is invalid"""
    error_code = "SCENARIO"
    exit_code = EXIT_INPUT_ERROR
