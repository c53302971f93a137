"""Deterministic discrete-event driver for the issuance workflow.

One simpy process mines blocks at exponential intervals; after every block
all agents see the block's events in agent-id order. Every stochastic choice
draws from its own numpy stream spawned from the run seed, so changing the
latency model does not shift block intervals or keys.
"""

from typing import Callable, Dict, List, Optional, Tuple, Union

import simpy
from numpy.random import SFC64, Generator, SeedSequence

from ...core.canonical import derive_address
from ...core.structured_logging import LoggerMixin
from ...exceptions import BlockPKIError, IssuanceTimeout
from ..certificates.models import ClientMode, ClientTrustStore
from ..certificates.service import CertificateService, build_trust_store
from ..contracts.events import scan_events
from ..contracts.runtime import ContractRuntime
from ..group_crypto.models import GroupParams
from ..group_crypto.service import SchnorrService
from ..ledger.models import Transaction
from ..ledger.service import Ledger
from ..validation.models import Challenge, SimulatedDomain
from ..validation.service import ValidationService
from .agents import CaAgent, RequesterAgent
from .models import IssuanceOutcome, ScenarioConfig

STREAMS = ("blocks", "latency", "validation", "tokens", "keys", "garbage")

Agent = Union[CaAgent, RequesterAgent]


def spawn_generators(seed: Optional[int], names: Tuple[str, ...] = STREAMS) -> Dict[str, Generator]:
    """Independent generators, one per named stream."""
    sequence = SeedSequence(seed)
    return {name: Generator(SFC64(stream)) for name, stream in zip(names, sequence.spawn(len(names)))}


class Simulation(LoggerMixin):
    def __init__(self, scenario: Optional[ScenarioConfig] = None, seed: Optional[int] = None):
        self.scenario = scenario or ScenarioConfig()
        self.seed = seed if seed is not None else self.scenario.seed
        self.rngs = spawn_generators(self.seed)

        self.schnorr = SchnorrService(GroupParams.named(self.scenario.group))
        self.group = self.schnorr.group
        self.certificates = CertificateService(self.schnorr)
        self.runtime = ContractRuntime(
            self.schnorr,
            onchain_signature_check=self.scenario.onchain_signature_check,
            issuance_timeout_blocks=self.scenario.issuance_timeout_blocks,
        )
        chain = self.scenario.chain
        self.ledger = Ledger(chain, self.runtime, rng=self.rngs["blocks"])
        self.validation = ValidationService(
            self.rngs["tokens"],
            deadline_seconds=self.scenario.challenge_deadline_blocks * chain.mean_block_interval,
            adversary=self.scenario.adversary,
        )
        self.env = simpy.Environment(initial_time=chain.genesis_time)
        self._miner: Optional[simpy.Process] = None

        self.cas: Dict[str, CaAgent] = {}
        self.requesters: Dict[str, RequesterAgent] = {}
        for spec in self.scenario.cas:
            self.add_ca(spec.ca_id, spec.behavior)

    @property
    def now(self) -> float:
        return float(self.env.now)

    # setup

    def _keypair(self, owner_id: str):
        return self.schnorr.keygen(self.rngs["keys"].bytes(32), owner_id=owner_id)

    def add_ca(self, ca_id: str, behavior: str = "honest") -> CaAgent:
        keypair = self._keypair(ca_id)
        address = derive_address("ca", ca_id)
        agent = CaAgent(self, ca_id, address, keypair, self.schnorr.create_pop(keypair), behavior)
        self.runtime.register_ca(ca_id, address, self.group.element_hex(keypair.public))
        self.ledger.fund(address, self.scenario.ca_funds)
        self.cas[ca_id] = agent
        return agent

    def add_requester(
        self,
        agent_id: str,
        domain_name: Optional[str] = None,
        funds: Optional[int] = None,
        owner: bool = True,
        log_certificate: bool = True,
    ) -> RequesterAgent:
        """Funded requester; ``owner=False`` makes it an impostor for an existing domain."""
        keypair = self._keypair(agent_id)
        address = derive_address("requester", agent_id)
        name = (domain_name or self.scenario.domain).strip().lower()

        if owner:
            domain = SimulatedDomain(name=name, owner=address, key=self.group.element_hex(keypair.public))
            self.validation.register_domain(domain)
            validation_id = address
        else:
            domain = self.validation.domains.get(name) or SimulatedDomain(name=name, owner="")
            adversary = self.scenario.adversary
            validation_id = adversary.adversary_id if adversary is not None else agent_id

        self.ledger.fund(address, self.scenario.requester_funds if funds is None else funds)
        agent = RequesterAgent(
            self,
            agent_id,
            address,
            domain,
            keypair,
            validation_id=validation_id,
            log_certificate=log_certificate,
        )
        self.requesters[agent_id] = agent
        return agent

    # event loop

    def _agents(self) -> List[Agent]:
        agents: List[Agent] = [*self.cas.values(), *self.requesters.values()]
        return sorted(agents, key=lambda a: a.agent_id)

    def _mine(self):
        while True:
            yield self.env.timeout(self.ledger.draw_block_interval())
            block = self.ledger.mine_next_block(self.now)
            events = scan_events(self.ledger, block.height, block.height)
            for agent in self._agents():
                agent.on_block(events)

    def start(self) -> None:
        if self._miner is None:
            self._miner = self.env.process(self._mine())

    def run_until(self, event: simpy.Event, max_blocks: Optional[int] = None) -> None:
        """Step the loop until ``event`` fires or ``max_blocks`` more blocks are mined."""
        self.start()
        if max_blocks is None:
            max_blocks = 10 * (self.scenario.issuance_timeout_blocks + self.scenario.chain.confirmation_depth + 4)
        limit = self.ledger.height + max_blocks
        while not event.triggered:
            if self.ledger.height >= limit:
                raise IssuanceTimeout([], max_blocks)
            self.env.step()

    def run_blocks(self, count: int) -> None:
        self.start()
        target = self.ledger.height + count
        while self.ledger.height < target:
            self.env.step()

    # services for agents

    def draw_tx_latency(self) -> float:
        mean = self.scenario.latency.mean_tx_latency
        return float(self.rngs["latency"].exponential(mean)) if mean > 0 else 0.0

    def draw_validation_delay(self) -> float:
        mean = self.scenario.latency.mean_validation_delay
        return float(self.rngs["validation"].exponential(mean)) if mean > 0 else 0.0

    def draw_garbage_scalar(self) -> int:
        q = self.schnorr.params.q
        raw = int.from_bytes(self.rngs["garbage"].bytes(self.group.scalar_size + 8), "big")
        return raw % (q - 1) + 1

    def submit(
        self,
        tx: Transaction,
        extra_delay: float = 0.0,
        on_submitted: Optional[Callable[[str], None]] = None,
        on_failed: Optional[Callable[[BlockPKIError], None]] = None,
    ) -> None:
        """Hand ``tx`` to the mempool after propagation latency plus ``extra_delay``."""
        delay = extra_delay + self.draw_tx_latency()
        if delay <= 0:
            self._submit_now(tx, on_submitted, on_failed)
        else:
            self.env.process(self._submit_later(tx, delay, on_submitted, on_failed))

    def _submit_later(self, tx, delay, on_submitted, on_failed):
        yield self.env.timeout(delay)
        self._submit_now(tx, on_submitted, on_failed)

    def _submit_now(
        self,
        tx: Transaction,
        on_submitted: Optional[Callable[[str], None]],
        on_failed: Optional[Callable[[BlockPKIError], None]],
    ) -> None:
        try:
            tx_hash = self.ledger.submit_tx(tx)
        except BlockPKIError as e:
            self.logger.warning("tx_rejected", sender=tx.sender, method=tx.method, error=e.error_code)
            if on_failed is not None:
                on_failed(e)
            return
        if on_submitted is not None:
            on_submitted(tx_hash)

    def deliver_challenge(self, challenge: Challenge) -> None:
        """Route a challenge to the requester behind the contract that caused it."""
        try:
            address = self.runtime.domain_contract(challenge.contract_address).requester
        except KeyError:
            return
        for requester in self.requesters.values():
            if requester.address == address:
                requester.complete_challenge(challenge)
                return

    # clients

    def trust_store(self, mode: ClientMode = "light", threshold: Optional[int] = None) -> ClientTrustStore:
        cas = [(ca.ca_id, ca.keypair.public, ca.pop) for ca in self.cas.values()]
        return build_trust_store(
            self.group.name,
            cas,
            threshold or self.scenario.policy_threshold,
            mode,
            self.ledger,
        )


def run_issuance(
    scenario: Optional[ScenarioConfig] = None,
    seed: Optional[int] = None,
    sim: Optional[Simulation] = None,
    requester: Optional[RequesterAgent] = None,
) -> Tuple[Simulation, RequesterAgent, IssuanceOutcome]:
    """One issuance from contract creation to the confirmed storage transaction."""
    if sim is None:
        sim = Simulation(scenario, seed)
    scenario = sim.scenario
    if requester is None:
        requester = sim.add_requester("requester", scenario.domain)

    requester.request_certificate(
        scenario.authorized_ca_ids,
        scenario.compensation_per_ca,
        scenario.cert_lifetime_seconds,
        threshold=scenario.threshold,
        first_t_mode=scenario.first_t_mode,
    )
    sim.run_until(requester.done)
    return sim, requester, requester.outcome()


def run_renewal(sim: Simulation, requester: RequesterAgent, lifetime_seconds: Optional[int] = None) -> IssuanceOutcome:
    """Next signing round on the requester's existing domain contract."""
    requester.renew(lifetime_seconds or sim.scenario.cert_lifetime_seconds)
    sim.run_until(requester.done)
    return requester.outcome()
