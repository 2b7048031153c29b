"""Engine run records: ordered tests with stage tags plus outcome counters."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .sets import nodes_of

# Stage tags.
SPLIT = "split"  # weight-window test found in stage 1
RESIDUAL = "residual"  # group test of the accumulated low-weight nodes
INDIVIDUAL = "individual"  # stage-2 single-node test
COMPLEMENT = "complement"  # regular-variant edge-complement test
RANDOM = "random"  # preplanned random test (semi-non-adaptive)


@dataclass
class TestEntry:
    query: tuple[int, ...]
    outcome: bool
    stage: str
    mass_removed: float | None = None
    rep_group: int | None = None
    sg_size: int | None = None
    sg_max_time: int | None = None

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "query": list(self.query),
            "outcome": bool(self.outcome),
            "stage": self.stage,
        }
        for key in ("mass_removed", "rep_group", "sg_size", "sg_max_time"):
            val = getattr(self, key)
            if val is not None:
                doc[key] = val
        return doc


@dataclass
class Transcript:
    """What a run did: every issued test, counters, and the returned answer.

    stage1 + stage2 always equals len(records); empty queries are resolved as
    negative at zero cost and never appear here (the preplanned engines are
    the exception: their empty tests are real scheduled tests).
    """

    records: list[TestEntry] = field(default_factory=list)
    stage1: int = 0
    stage2: int = 0
    informative: int = 0
    pn: int = 0
    result_edge: int | None = None
    result_nodes: tuple[int, ...] | None = None
    halted: bool = False
    mu_stage2: float | None = None  # expected infections at stage-2 entry

    @property
    def total(self) -> int:
        return len(self.records)

    def returned_mask(self) -> int | None:
        if self.result_nodes is None:
            return None
        m = 0
        for v in self.result_nodes:
            m |= 1 << v
        return m

    def add(self, query_mask: int, outcome: bool, stage: str, **extras: Any) -> TestEntry:
        entry = TestEntry(nodes_of(query_mask), bool(outcome), stage, **extras)
        self.records.append(entry)
        if stage in (INDIVIDUAL, COMPLEMENT):
            self.stage2 += 1
        else:
            self.stage1 += 1
        return entry

    def to_json(self) -> dict[str, Any]:
        return {
            "records": [r.to_json() for r in self.records],
            "stage1": self.stage1,
            "stage2": self.stage2,
            "informative": self.informative,
            "pn": self.pn,
            "result_edge": self.result_edge,
            "result_nodes": list(self.result_nodes) if self.result_nodes is not None else None,
            "halted": self.halted,
            "mu_stage2": self.mu_stage2,
        }
