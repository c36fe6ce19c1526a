"""Round orchestration, trace auditing, and session-level verdicts.

Every round gets its own random stream derived from ``(seed, 0, round_index)``;
key sampling uses ``(seed, 1)``.  Within a round the draw order is fixed:

    theta1, theta2, k, b, phi, s1, s2,
    intensity-check coins (Bob pair receipt, Alice pair receipt, Bob final receipt),
    Eve choices (labeled index, fake theta1, fake theta2, b guess),
    measurement draws in event order (Eve1 then Bob).

Party secrets and check coins come first, so for a given seed they are the
same in every scenario.  The basic variant draws the same values and ignores
theta2, b, s1, s2.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .adversaries import AttackStrategy, make_strategy
from .events import Event, Trace
from .parties import (
    AliceRoundSecrets,
    BobRoundSecrets,
    ClassicalMessage,
    alice_encode_block,
    alice_encode_single,
    alice_prepare_pair,
    alice_prepare_single,
    bob_decode,
    bob_final_measure,
    bob_measure_basic,
    bob_rotate_single,
    bob_shuffle_rotate,
    qber_estimate,
)
from .photon import CANONICAL, LabelSet, Photon, PulsePair, intensity_check
from .quantum import InvariantViolation, RngStream

VARIANTS = ("basic", "strong")
SCENARIOS = ("honest", "impersonation", "labeling", "labeling_vs_scrub")
LABEL_SCENARIOS = ("labeling", "labeling_vs_scrub")

RNG_DRAW_ORDER = (
    "theta1",
    "theta2",
    "k",
    "b",
    "phi",
    "s1",
    "s2",
    "check_bob_pair",
    "check_alice_pair",
    "check_bob_final",
    "eve_labeled_index",
    "eve_fake_theta1",
    "eve_fake_theta2",
    "eve_b_guess",
    "measurements",
)

CANONICAL_SLOT = 0.0


class ConfigError(ValueError):
    pass


class TraceOrderError(InvariantViolation):
    def __init__(self, message: str, events: list[Event]):
        super().__init__(message)
        self.events = events


@dataclass(frozen=True)
class ProtocolParams:
    variant: str = "strong"
    scenario: str = "honest"
    rounds: int = 10_000
    seed: int = 42
    delta: float = 0.1
    canonical: LabelSet = CANONICAL
    sample_fraction: float = 0.2
    qber_threshold: float = 0.05
    intensity_tol: float = 0.01
    intensity_check_prob: float = 0.25

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.variant == "basic" and self.scenario in LABEL_SCENARIOS:
            raise ConfigError(f"scenario {self.scenario!r} needs the strong (two-pulse) variant")
        if not isinstance(self.rounds, int) or self.rounds < 1:
            raise ConfigError("rounds must be a positive integer")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not 0 < self.sample_fraction <= 1:
            raise ConfigError("sample_fraction must be in (0, 1]")
        if not 0 <= self.qber_threshold < 1:
            raise ConfigError("qber_threshold must be in [0, 1)")
        if not self.intensity_tol > 0:
            raise ConfigError("intensity_tol must be > 0")
        if not 0 <= self.intensity_check_prob <= 1:
            raise ConfigError("intensity_check_prob must be in [0, 1]")
        if self.canonical.wavelength + self.delta <= 0:
            raise ConfigError("delta would make the labeled wavelength non-positive")

    @property
    def countermeasure(self) -> bool:
        return self.scenario == "labeling_vs_scrub"


@dataclass
class RoundRecord:
    index: int
    theta1: float
    theta2: float
    phi: float
    s1: int
    s2: int
    k_alice: int
    b: int
    m_bob: int
    k_bob: int
    eve_k: Optional[int]
    eve_b: Optional[int]
    b_was_guess: bool
    intensity_checks_passed: bool
    intensity_checks_run: int
    receipts_ok: bool
    labeled_index: Optional[int]
    alice_out: Photon
    events: list[Event] = field(repr=False)


@dataclass(frozen=True)
class SessionReport:
    params: ProtocolParams
    n_rounds: int
    agreement_rate: float
    qber_sampled: float
    eve_k_rate: float
    eve_b_rate: float
    intensity_pass_rate: float
    verdict: str
    abort_reasons: tuple[str, ...]
    final_key_bits_a: str
    final_key_bits_b: str
    sampled_bits: int

    @property
    def accepted(self) -> bool:
        return self.verdict == "accepted"


# -- schedule ----------------------------------------------------------------


def schedule_events(scenario: str, variant: str = "strong") -> list[str]:
    """Canonical event order for one round."""
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}")
    if variant == "basic" and scenario in LABEL_SCENARIOS:
        raise ConfigError(f"scenario {scenario!r} needs the strong variant")
    eve = scenario != "honest"
    ev = ["alice_send"]
    if eve:
        ev += ["eve1_label_store", "eve2_send_fakes"]
    ev += ["bob_receive", "bob_rotate", "bob_return"]
    if eve:
        # Eve1 may only release once Eve2 has Bob's fakes back
        ev += ["eve2_receive_fakes", "eve1_release"]
    ev += ["alice_receive", "alice_encode", "alice_send_final"]
    if eve:
        ev += ["eve1_measure", "eve2_finalize"]
    ev += ["bob_receive_final", "bob_measure"]
    if variant == "strong":
        ev += ["alice_disclose_b"]
        if eve:
            ev += ["eve_relay_classical"]
        ev += ["bob_decode"]
    return ev


def audit_trace(events: list[Event], template: list[str]) -> None:
    names = [e.name for e in events]
    if names == template:
        return
    for i, (got, want) in enumerate(zip(names, template)):
        if got != want:
            raise TraceOrderError(
                f"event #{i} is {got!r}, schedule expects {want!r}; trace={names}", events
            )
    raise TraceOrderError(
        f"trace has {len(names)} events, schedule expects {len(template)}; trace={names}", events
    )


def receipts_on_time(events: list[Event]) -> bool:
    """Public receipts: Bob acknowledges before returning, Alice's pulses
    come back only after Bob sent his away."""
    names = [e.name for e in events]
    try:
        return (
            names.index("bob_receive")
            < names.index("bob_return")
            < names.index("alice_receive")
            < names.index("alice_send_final")
        )
    except ValueError:
        return False


# -- rounds ------------------------------------------------------------------


def _check_point(coin: float, params: ProtocolParams, photons, count: int) -> Optional[bool]:
    if coin >= params.intensity_check_prob:
        return None
    return intensity_check(
        photons, params.canonical.intensity, params.intensity_tol, expected_count=count
    )


def run_round(
    params: ProtocolParams,
    round_index: int,
    rng: RngStream,
    strategy: Optional[AttackStrategy] = None,
) -> RoundRecord:
    if strategy is None:
        strategy = make_strategy(params.scenario, params.delta, params.canonical)
    strong = params.variant == "strong"
    trace = Trace(round_index)

    alice = AliceRoundSecrets.draw(rng)
    bob = BobRoundSecrets.draw(rng)
    coins = (rng.uniform(), rng.uniform(), rng.uniform())
    strategy.begin_round(trace, rng)

    checks: list[bool] = []

    def receive(name: str, actor: str, coin: float, pulses, count: int):
        passed = _check_point(coin, params, list(pulses), count)
        if passed is not None:
            checks.append(passed)
        msg = ClassicalMessage.receipt(round_index, actor)
        trace.emit(name, actor, receipt=msg, intensity_checked=passed is not None, passed=passed)

    canonical = params.canonical
    if strong:
        sent = alice_prepare_pair(alice, canonical)
    else:
        sent = alice_prepare_single(alice.theta1, canonical)
    trace.emit("alice_send", "alice")
    strategy.on_alice_emits(sent)

    at_bob = strategy.on_bob_turn()
    as_list = list(at_bob) if isinstance(at_bob, PulsePair) else [at_bob]
    receive("bob_receive", "bob", coins[0], as_list, 2 if strong else 1)
    if strong:
        rotated = bob_shuffle_rotate(at_bob, bob)
    else:
        rotated = bob_rotate_single(at_bob, bob.phi)
    trace.emit("bob_rotate", "bob")
    trace.emit("bob_return", "bob")

    at_alice = strategy.on_bob_returns(rotated)
    as_list = list(at_alice) if isinstance(at_alice, PulsePair) else [at_alice]
    receive("alice_receive", "alice", coins[1], as_list, 2 if strong else 1)
    if strong:
        out = alice_encode_block(
            at_alice, alice, CANONICAL_SLOT, scrub_to=canonical if params.countermeasure else None
        )
    else:
        out = alice_encode_single(at_alice, alice.theta1, alice.k)
    trace.emit("alice_encode", "alice")
    trace.emit("alice_send_final", "alice", photon=out)

    final = strategy.on_alice_final(out, rng)
    receive("bob_receive_final", "bob", coins[2], [final], 1)
    if strong:
        m = bob_final_measure(final, bob, rng)
        trace.emit("bob_measure", "bob", m=m)
        disclosure = ClassicalMessage.block_disclosure(round_index, alice.b)
        trace.emit("alice_disclose_b", "alice", message=disclosure)
        disclosure = strategy.on_classical(disclosure)
        k_bob = bob_decode(m, disclosure, bob)
        trace.emit("bob_decode", "bob", k=k_bob)
    else:
        m = bob_measure_basic(final, bob.phi, rng)
        k_bob = m
        trace.emit("bob_measure", "bob", m=m)

    audit_trace(trace.events, schedule_events(params.scenario, params.variant))

    if params.scenario == "honest" and k_bob != alice.k:
        raise TraceOrderError(
            f"honest round {round_index}: Bob decoded {k_bob}, Alice sent {alice.k}", trace.events
        )

    know = strategy.knowledge
    labeled = getattr(strategy, "choices", None)
    return RoundRecord(
        index=round_index,
        theta1=alice.theta1,
        theta2=alice.theta2,
        phi=bob.phi,
        s1=bob.s1,
        s2=bob.s2,
        k_alice=alice.k,
        b=alice.b,
        m_bob=m,
        k_bob=k_bob,
        eve_k=know.k_inferred,
        eve_b=know.b_inferred,
        b_was_guess=know.b_was_guess,
        intensity_checks_passed=all(checks),
        intensity_checks_run=len(checks),
        receipts_ok=receipts_on_time(trace.events),
        labeled_index=labeled.labeled_index if (labeled is not None and strong) else None,
        alice_out=out,
        events=trace.events,
    )


# -- sessions ----------------------------------------------------------------


def detection_decision(
    qber: float,
    intensity_failures: int,
    receipt_violations: int,
    params: ProtocolParams,
) -> tuple[str, tuple[str, ...]]:
    reasons = []
    if qber > params.qber_threshold:
        reasons.append("qber")
    if intensity_failures:
        reasons.append("intensity")
    if receipt_violations:
        reasons.append("receipt")
    if reasons:
        return "aborted", tuple(reasons)
    return "accepted", ()


def run_rounds(
    params: ProtocolParams,
    strategy_factory: Optional[Callable[[], AttackStrategy]] = None,
) -> list[RoundRecord]:
    root = RngStream(params.seed)
    if strategy_factory is None:
        strategy = make_strategy(params.scenario, params.delta, params.canonical)
    else:
        strategy = strategy_factory()
    return [run_round(params, i, root.child(0, i), strategy) for i in range(params.rounds)]


def summarize(params: ProtocolParams, records: list[RoundRecord]) -> SessionReport:
    n = len(records)
    key_a = [r.k_alice for r in records]
    key_b = [r.k_bob for r in records]
    qber, sampled = qber_estimate(key_a, key_b, params.sample_fraction, RngStream(params.seed).child(1))
    burned = set(sampled)
    final_a = "".join(str(b) for i, b in enumerate(key_a) if i not in burned)
    final_b = "".join(str(b) for i, b in enumerate(key_b) if i not in burned)

    verdict, reasons = detection_decision(
        qber,
        sum(1 for r in records if not r.intensity_checks_passed),
        sum(1 for r in records if not r.receipts_ok),
        params,
    )
    return SessionReport(
        params=params,
        n_rounds=n,
        agreement_rate=sum(a == b for a, b in zip(key_a, key_b)) / n,
        qber_sampled=qber,
        eve_k_rate=sum(r.eve_k == r.k_alice for r in records) / n,
        eve_b_rate=sum(r.eve_b == r.b for r in records) / n,
        intensity_pass_rate=sum(r.intensity_checks_passed for r in records) / n,
        verdict=verdict,
        abort_reasons=reasons,
        final_key_bits_a=final_a,
        final_key_bits_b=final_b,
        sampled_bits=len(sampled),
    )


def run_session(params: ProtocolParams) -> SessionReport:
    return summarize(params, run_rounds(params))
