"""Channel adversaries.

A strategy sits on both the quantum and the classical channel and sees only
what crosses them.  The harness calls the hooks in protocol order:

    begin_round -> on_alice_emits -> on_bob_turn -> on_bob_returns
                -> on_alice_final -> on_classical

The two-agent attacks follow the Eve1/Eve2 split: Eve1 faces Alice, Eve2
faces Bob, and Eve1 only releases Alice's stored pulses once Eve2 has Bob's
fakes back, so both round trips look on time to the honest parties.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

from .events import Trace
from .parties import QUARTER, encode_transform
from .photon import LabelSet, Photon, PulsePair, read_labels, scrub_temporal, shift_wavelength
from .quantum import InvariantViolation, RngStream, measure, prepare, rotate

Pulses = Union[PulsePair, Photon]

WAVELENGTH_TOL = 1e-9


@dataclass(frozen=True)
class EveRoundKnowledge:
    k_inferred: int | None = None
    b_inferred: int | None = None
    b_was_guess: bool = False


NO_KNOWLEDGE = EveRoundKnowledge()


@dataclass(frozen=True)
class EveChoices:
    """Eve's per-round random choices, drawn up front in this field order."""

    labeled_index: int
    fake_theta1: float
    fake_theta2: float
    b_guess: int

    @classmethod
    def draw(cls, rng: RngStream) -> "EveChoices":
        labeled = rng.bit()
        t1 = rng.angle()
        t2 = rng.angle()
        guess = rng.bit()
        return cls(labeled, t1, t2, guess)

    @property
    def fake_thetas(self) -> tuple[float, float]:
        return (self.fake_theta1, self.fake_theta2)


# -- Eve1 / Eve2 primitives ---------------------------------------------------


def eve1_label_and_store(pair: PulsePair, delta: float, labeled_index: int) -> PulsePair:
    """Shift the wavelength of one pulse by ``delta``; keep both."""
    return pair.with_photon(labeled_index, shift_wavelength(pair[labeled_index], delta))


def eve2_fake_pair(
    canonical: LabelSet, thetas: tuple[float, float] | None = None, rng: RngStream | None = None
) -> tuple[PulsePair, tuple[float, float]]:
    """Prepare a fake pulse pair exactly the way Alice would."""
    if thetas is None:
        if rng is None:
            raise ValueError("need either thetas or rng")
        thetas = (rng.angle(), rng.angle())
    first = Photon(prepare(thetas[0]), replace(canonical, time_slot=1.0))
    second = Photon(prepare(thetas[1]), replace(canonical, time_slot=2.0))
    return PulsePair(first, second), thetas


def eve1_release_stored(stored: PulsePair) -> PulsePair:
    # no stand-in for Bob's rotation: Alice never checks polarization
    return stored


def eve1_read_final(
    p: Photon,
    lambda_labeled: float,
    labeled_index: int,
    rng: RngStream,
    lambda_plain: float | None = None,
    b_guess: int | None = None,
) -> EveRoundKnowledge:
    """Read the pulse leaving Alice.

    Its polarization is U_y((-1)^k pi/4)|0>, so a pi/4-basis measurement gives
    k with certainty.  The wavelength says whether the labeled pulse survived.
    When the label carries no information (``lambda_plain`` equal to
    ``lambda_labeled``, or ``lambda_plain`` None meaning labels are not
    trusted) b falls back to ``b_guess``.
    """
    k, _ = measure(p.pol, QUARTER, rng)
    informative = lambda_plain is not None and abs(lambda_labeled - lambda_plain) > WAVELENGTH_TOL
    if not informative:
        if b_guess is None:
            raise ValueError("labels uninformative and no b guess supplied")
        return EveRoundKnowledge(k, b_guess, True)
    wl = read_labels(p).wavelength
    if abs(wl - lambda_labeled) <= WAVELENGTH_TOL:
        b = 1 - labeled_index  # labeled pulse kept
    elif abs(wl - lambda_plain) <= WAVELENGTH_TOL:
        b = labeled_index
    else:
        raise InvariantViolation(
            f"final pulse wavelength {wl} matches neither {lambda_labeled} nor {lambda_plain}"
        )
    return EveRoundKnowledge(k, b, False)


def eve2_finalize(
    returned_fakes: PulsePair,
    knowledge: EveRoundKnowledge,
    thetas_fake: tuple[float, float],
    canonical_slot: float,
) -> Photon:
    """Play Alice's second pass on the fakes Bob sent back, with the stolen (k, b)."""
    if knowledge.k_inferred is None or knowledge.b_inferred is None:
        raise ValueError("Eve2 needs both k and b")
    j = 1 - knowledge.b_inferred
    p = returned_fakes[j]
    p = replace(p, pol=rotate(p.pol, encode_transform(thetas_fake[j], knowledge.k_inferred)))
    return scrub_temporal(p, canonical_slot)


# -- strategies ---------------------------------------------------------------


class AttackStrategy:
    """Base strategy: an empty channel that forwards everything untouched."""

    name = "none"
    draws_choices = False

    def __init__(self):
        self.trace: Trace | None = None
        self.knowledge = NO_KNOWLEDGE
        self.messages: list = []
        self._in_flight: Pulses | None = None

    def begin_round(self, trace: Trace, rng: RngStream) -> None:
        self.trace = trace
        self.knowledge = NO_KNOWLEDGE
        self._in_flight = None

    def on_alice_emits(self, pulses: Pulses) -> None:
        self._in_flight = pulses

    def on_bob_turn(self) -> Pulses:
        out, self._in_flight = self._in_flight, None
        return out

    def on_bob_returns(self, pulses: Pulses) -> Pulses:
        return pulses

    def on_alice_final(self, photon: Photon, rng: RngStream) -> Photon:
        return photon

    def on_classical(self, msg):
        return msg

    def emit(self, name: str, actor: str, **detail) -> None:
        assert self.trace is not None
        self.trace.emit(name, actor, **detail)


PassThrough = AttackStrategy


class LabelingAttack(AttackStrategy):
    """Label-and-measure attack with synchronized Eve1/Eve2.

    ``trust_labels=False`` models an Eve who knows Alice re-emits the kept
    polarization on a fresh carrier: the countermeasure is public, so the
    wavelength read-out is known to be meaningless and b is guessed.
    """

    name = "labeling"
    draws_choices = True

    def __init__(self, delta: float, canonical: LabelSet, trust_labels: bool = True):
        super().__init__()
        self.delta = delta
        self.canonical = canonical
        self.trust_labels = trust_labels
        self.choices: EveChoices | None = None
        self._stored: Pulses | None = None
        self._fakes: Pulses | None = None
        self._returned: Pulses | None = None
        self._lambda_plain = canonical.wavelength

    def begin_round(self, trace: Trace, rng: RngStream) -> None:
        super().begin_round(trace, rng)
        self.choices = EveChoices.draw(rng)
        self._stored = self._fakes = self._returned = None

    @property
    def labeled_index(self) -> int:
        return self.choices.labeled_index

    # step 1
    def on_alice_emits(self, pulses: Pulses) -> None:
        if isinstance(pulses, PulsePair):
            self._lambda_plain = pulses[1 - self.labeled_index].labels.wavelength
            self._stored = eve1_label_and_store(pulses, self.delta, self.labeled_index)
            self.emit("eve1_label_store", "eve1", labeled_index=self.labeled_index, delta=self.delta)
        else:
            self._lambda_plain = pulses.labels.wavelength
            self._stored = pulses
            self.emit("eve1_label_store", "eve1", labeled_index=None, delta=0.0)

    # step 2
    def on_bob_turn(self) -> Pulses:
        pair, _ = eve2_fake_pair(self.canonical, self.choices.fake_thetas)
        self._fakes = pair if isinstance(self._stored, PulsePair) else pair.first
        self.emit("eve2_send_fakes", "eve2")
        return self._fakes

    # step 3
    def on_bob_returns(self, pulses: Pulses) -> Pulses:
        self._returned = pulses
        self.emit("eve2_receive_fakes", "eve2")
        out = self._stored
        if isinstance(out, PulsePair):
            out = eve1_release_stored(out)
        self._stored = None
        self.emit("eve1_release", "eve1")
        return out

    def on_alice_final(self, photon: Photon, rng: RngStream) -> Photon:
        if self._returned is None:
            raise InvariantViolation("Eve2 has no returned fakes to finalize")
        if isinstance(self._returned, PulsePair):
            lambda_labeled = self._lambda_plain + self.delta
            self.knowledge = eve1_read_final(
                photon,
                lambda_labeled,
                self.labeled_index,
                rng,
                lambda_plain=self._lambda_plain if self.trust_labels else None,
                b_guess=self.choices.b_guess,
            )
            self.emit("eve1_measure", "eve1", k=self.knowledge.k_inferred, b=self.knowledge.b_inferred)
            out = eve2_finalize(
                self._returned, self.knowledge, self.choices.fake_thetas, photon.labels.time_slot
            )
        else:
            k, _ = measure(photon.pol, QUARTER, rng)
            self.knowledge = EveRoundKnowledge(k, None, False)
            self.emit("eve1_measure", "eve1", k=k, b=None)
            out = replace(
                self._returned,
                pol=rotate(self._returned.pol, encode_transform(self.choices.fake_theta1, k)),
            )
        self.emit("eve2_finalize", "eve2")
        return out

    def on_classical(self, msg):
        self.messages.append(msg)
        self.emit("eve_relay_classical", "eve", kind=str(msg.kind.value))
        return msg


def impersonation_no_label(canonical: LabelSet) -> LabelingAttack:
    """Same Eve1/Eve2 pipeline without any label: k is still read, b is guessed."""
    s = LabelingAttack(0.0, canonical)
    s.name = "impersonation"
    return s


def make_strategy(scenario: str, delta: float, canonical: LabelSet) -> AttackStrategy:
    if scenario == "honest":
        return PassThrough()
    if scenario == "impersonation":
        return impersonation_no_label(canonical)
    if scenario == "labeling":
        return LabelingAttack(delta, canonical)
    if scenario == "labeling_vs_scrub":
        s = LabelingAttack(delta, canonical, trust_labels=False)
        s.name = "labeling_vs_scrub"
        return s
    raise ValueError(f"unknown scenario {scenario!r}")
