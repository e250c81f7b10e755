"""
Pydantic models for the machine-readable documents the CLI prints
"""
import json
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from . import __version__


class RunManifest(BaseModel):
    subcommand: str
    source: str
    policy: str = "default"
    output_format: str = "doc"
    check: bool = False
    seed: int = 0
    jobs: int = 1
    arguments: Dict[str, str] = Field(default_factory=dict)


class DocumentBase(BaseModel):
    tool_version: str = __version__
    manifest: RunManifest


class RoundEntry(BaseModel):
    tally: Dict[int, int]
    eliminated: int


class TraceDocument(DocumentBase):
    candidates: List[int]
    rounds: List[RoundEntry]
    winner: int


class KillStatsEntry(BaseModel):
    tables_built: int
    outer_tuples: int
    peak_inner_states: int
    state_cap: int


class KillDocument(DocumentBase):
    u: int
    allowed: List[int]
    result: bool
    witness: Optional[List[int]] = None
    witness_winner: Optional[int] = None
    stats: KillStatsEntry
    oracle_result: Optional[bool] = None


class RefutationEntry(BaseModel):
    u: int
    candidates: List[int]
    winner: int


class ZoneEntry(BaseModel):
    zone: List[int]
    is_zone: bool
    per_vertex: Dict[int, bool]
    refutation: Optional[RefutationEntry] = None
    generator: Optional[int] = None


class ZoneDocument(DocumentBase):
    action: str
    zones: List[ZoneEntry]
    tournament_edges: List[List[int]] = Field(default_factory=list)
    nesting_violations: List[List[List[int]]] = Field(default_factory=list)
    oracle_agrees: Optional[bool] = None


class ConfigEntry(BaseModel):
    candidates: List[int]
    winner: int
    winner_cost: int
    optimum: int
    optimum_cost: int
    ratio: str


class DistortionDocument(DocumentBase):
    n: int
    anchors: Dict[str, int] = Field(default_factory=dict)
    configs: int
    max_ratio: str
    max_ratio_value: float
    argmax: ConfigEntry
    by_size: Dict[int, str] = Field(default_factory=dict)


class TreeDocument(DocumentBase):
    n: int
    edges: List[List[int]]
    ids: List[int]
    anchors: Dict[str, int] = Field(default_factory=dict)
    social_costs: Dict[int, int] = Field(default_factory=dict)


class CheckEntry(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class SelftestDocument(DocumentBase):
    checks: List[CheckEntry]
    passed: bool


def render_document(document: BaseModel) -> str:
    """Stable JSON: sorted keys, fixed indentation, no timestamps"""
    return json.dumps(document.model_dump(mode="json"), sort_keys=True, indent=2)
