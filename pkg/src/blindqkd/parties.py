"""Honest Alice and Bob for the basic and the two-pulse (blocking) protocol."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

from .photon import LabelSet, Photon, PulsePair, scrub_all_labels, scrub_temporal
from .quantum import RngStream, measure, prepare, rotate

QUARTER = math.pi / 4


def sign(bit: int) -> int:
    """(-1)**bit"""
    return -1 if bit else 1


@dataclass(frozen=True)
class AliceRoundSecrets:
    theta1: float
    theta2: float
    k: int
    b: int  # index of the BLOCKED pulse

    @classmethod
    def draw(cls, rng: RngStream) -> "AliceRoundSecrets":
        theta1 = rng.angle()
        theta2 = rng.angle()
        k = rng.bit()
        b = rng.bit()
        return cls(theta1, theta2, k, b)

    @property
    def kept(self) -> int:
        return 1 - self.b

    def theta(self, index: int) -> float:
        return self.theta1 if index == 0 else self.theta2


@dataclass(frozen=True)
class BobRoundSecrets:
    phi: float
    s1: int
    s2: int

    @classmethod
    def draw(cls, rng: RngStream) -> "BobRoundSecrets":
        phi = rng.angle()
        s1 = rng.bit()
        s2 = rng.bit()
        return cls(phi, s1, s2)

    def shuffle(self, index: int) -> int:
        return self.s1 if index == 0 else self.s2


class MessageKind(str, Enum):
    RECEIPT = "receipt"
    BLOCK_DISCLOSURE = "block_disclosure"
    SAMPLE_REQUEST = "sample_request"
    SAMPLE_RESPONSE = "sample_response"
    ABORT = "abort"


@dataclass(frozen=True)
class ClassicalMessage:
    kind: MessageKind
    round_index: int
    sender: str = ""
    b: int | None = None
    indices: tuple[int, ...] = ()
    bits: tuple[int, ...] = ()
    reason: str = ""

    @classmethod
    def receipt(cls, round_index: int, sender: str) -> "ClassicalMessage":
        return cls(MessageKind.RECEIPT, round_index, sender)

    @classmethod
    def block_disclosure(cls, round_index: int, b: int) -> "ClassicalMessage":
        return cls(MessageKind.BLOCK_DISCLOSURE, round_index, "alice", b=b)


# -- strong (two-pulse) protocol ---------------------------------------------


def alice_prepare_pair(secrets: AliceRoundSecrets, canonical: LabelSet) -> PulsePair:
    first = Photon(prepare(secrets.theta1), replace(canonical, time_slot=1.0))
    second = Photon(prepare(secrets.theta2), replace(canonical, time_slot=2.0))
    return PulsePair(first, second)


def bob_shuffle_rotate(pair: PulsePair, secrets: BobRoundSecrets) -> PulsePair:
    first, second = pair
    a1 = secrets.phi + sign(secrets.s1) * QUARTER
    a2 = secrets.phi + sign(secrets.s2) * QUARTER
    return PulsePair(
        replace(first, pol=rotate(first.pol, a1)),
        replace(second, pol=rotate(second.pol, a2)),
    )


def encode_transform(theta: float, k: int) -> float:
    """Angle of the second-pass transform: strips theta, adds the key."""
    return -theta + sign(k) * QUARTER


def alice_encode_block(
    pair: PulsePair,
    secrets: AliceRoundSecrets,
    canonical_slot: float,
    scrub_to: LabelSet | None = None,
) -> Photon:
    """Encode k on both pulses, block pulse b, forward the other.

    With ``scrub_to`` set the kept polarization is moved onto a fresh carrier
    with those labels (the label-removal countermeasure).
    """
    encoded = [
        replace(p, pol=rotate(p.pol, encode_transform(secrets.theta(i), secrets.k)))
        for i, p in enumerate(pair)
    ]
    kept = encoded[secrets.kept]
    if scrub_to is not None:
        return scrub_all_labels(kept, replace(scrub_to, time_slot=canonical_slot))
    return scrub_temporal(kept, canonical_slot)


def bob_final_measure(p: Photon, secrets: BobRoundSecrets, rng: RngStream) -> int:
    compensated = rotate(p.pol, -secrets.phi)
    m, _ = measure(compensated, 0.0, rng)
    return m


def bob_decode(m: int, disclosure: ClassicalMessage, secrets: BobRoundSecrets) -> int:
    if disclosure.kind is not MessageKind.BLOCK_DISCLOSURE or disclosure.b is None:
        raise ValueError(f"expected a block disclosure, got {disclosure.kind}")
    s_kept = secrets.shuffle(1 - disclosure.b)
    return (1 ^ m) ^ s_kept


# -- basic (single-pulse) protocol -------------------------------------------


def alice_prepare_single(theta: float, canonical: LabelSet) -> Photon:
    return Photon(prepare(theta), replace(canonical, time_slot=1.0))


def bob_rotate_single(p: Photon, phi: float) -> Photon:
    return replace(p, pol=rotate(p.pol, phi))


def alice_encode_single(p: Photon, theta: float, k: int) -> Photon:
    return replace(p, pol=rotate(p.pol, encode_transform(theta, k)))


def bob_measure_basic(p: Photon, phi: float, rng: RngStream) -> int:
    compensated = rotate(p.pol, -phi)
    outcome, _ = measure(compensated, QUARTER, rng)
    return outcome


# -- key comparison ----------------------------------------------------------


def qber_estimate(
    key_a: Sequence[int],
    key_b: Sequence[int],
    sample_fraction: float,
    rng: RngStream,
) -> tuple[float, list[int]]:
    """Publicly compare a random sample of key positions.

    Returns the mismatch fraction on the sample and the sorted sampled
    indices; those positions are burned and must be dropped from the key.
    """
    if len(key_a) != len(key_b):
        raise ValueError(f"key length mismatch: {len(key_a)} != {len(key_b)}")
    n = len(key_a)
    if n < 1:
        raise ValueError("keys must be non-empty")
    if not 0 < sample_fraction <= 1:
        raise ValueError(f"sample_fraction must be in (0, 1], got {sample_fraction}")
    # guard against 0.7 * 10 == 7.000000000000001
    size = min(n, max(1, math.ceil(sample_fraction * n - 1e-9)))
    idx = rng.sample_indices(n, size)
    errors = sum(1 for i in idx if key_a[i] != key_b[i])
    return errors / size, idx
