"""Per-round event trace shared by parties, adversaries and the harness."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class Event:
    name: str
    actor: str
    detail: dict[str, Any] = field(default_factory=dict, compare=False)


class Trace:
    def __init__(self, round_index: int):
        self.round_index = round_index
        self.events: list[Event] = []

    def emit(self, name: str, actor: str, **detail: Any) -> Event:
        ev = Event(name, actor, detail)
        self.events.append(ev)
        return ev

    @property
    def names(self) -> list[str]:
        return [e.name for e in self.events]

    def index(self, name: str) -> int:
        return self.names.index(name)

    def first(self, name: str) -> Event:
        return self.events[self.index(name)]
