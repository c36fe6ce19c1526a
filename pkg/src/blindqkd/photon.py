"""Photons: a polarization qubit plus the non-polarization labels Eve can touch."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable

from .quantum import PolarizationState

_uid_counter = itertools.count()


def _next_uid() -> int:
    return next(_uid_counter)


@dataclass(frozen=True)
class LabelSet:
    wavelength: float = 1550.0  # nm
    time_slot: float = 0.0
    intensity: float = 1.0  # mean photon number

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength}")
        if not self.intensity >= 0:
            raise ValueError(f"intensity must be >= 0, got {self.intensity}")


CANONICAL = LabelSet()


@dataclass(frozen=True)
class Photon:
    pol: PolarizationState
    labels: LabelSet
    # harness bookkeeping only; excluded from equality so no decision can hinge on it
    uid: int = field(default_factory=_next_uid, compare=False, repr=False)


@dataclass(frozen=True)
class PulsePair:
    first: Photon
    second: Photon

    def __getitem__(self, index: int) -> Photon:
        if index == 0:
            return self.first
        if index == 1:
            return self.second
        raise IndexError(index)

    def __iter__(self):
        yield self.first
        yield self.second

    def with_photon(self, index: int, photon: Photon) -> "PulsePair":
        if index == 0:
            return PulsePair(photon, self.second)
        return PulsePair(self.first, photon)


def shift_wavelength(p: Photon, delta: float) -> Photon:
    new_wl = p.labels.wavelength + delta
    if not new_wl > 0:
        raise ValueError(
            f"wavelength shift {delta} nm would give non-positive wavelength {new_wl}"
        )
    return replace(p, labels=replace(p.labels, wavelength=new_wl))


def scrub_temporal(p: Photon, canonical_slot: float) -> Photon:
    return replace(p, labels=replace(p.labels, time_slot=canonical_slot))


def scrub_all_labels(p: Photon, canonical: LabelSet) -> Photon:
    """Move the polarization onto a fresh carrier with canonical labels.

    Idealizes teleporting the polarization onto a photon Eve never handled.
    """
    return Photon(p.pol, canonical)


def read_labels(p: Photon) -> LabelSet:
    # non-demolition: polarization is not disturbed
    return p.labels


def intensity_check(
    observed: Iterable[Photon],
    expected_intensity: float,
    tol: float,
    expected_count: int | None = None,
) -> bool:
    if not tol > 0:
        raise ValueError("tol must be > 0")
    photons = list(observed)
    if expected_count is not None and len(photons) != expected_count:
        return False
    if not photons:
        return False
    return all(abs(p.labels.intensity - expected_intensity) <= tol for p in photons)
