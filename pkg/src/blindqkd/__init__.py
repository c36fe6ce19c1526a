"""Simulator for the blind three-way QKD protocol and the wavelength-labeling attack on it."""
from .harness import ProtocolParams, RoundRecord, SessionReport, run_round, run_session
from .photon import LabelSet, Photon, PulsePair
from .quantum import InvariantViolation, PolarizationState, RngStream, measure, overlap, prepare, rotate

__all__ = [
    "InvariantViolation",
    "LabelSet",
    "Photon",
    "PolarizationState",
    "ProtocolParams",
    "PulsePair",
    "RngStream",
    "RoundRecord",
    "SessionReport",
    "measure",
    "overlap",
    "prepare",
    "rotate",
    "run_round",
    "run_session",
]
