"""Request/response models for the gateway API."""
from __future__ import annotations

from pydantic import BaseModel, Field

from .store import Role


class EntityCreate(BaseModel):
    name: str


class UserAdd(BaseModel):
    user_id: str
    role: Role


class EntityOut(BaseModel):
    id: str
    name: str
    users: list[dict]


class BuildingCreate(BaseModel):
    entity_id: str
    name: str


class BuildingOut(BaseModel):
    id: str
    entity_id: str
    name: str


class FloorOut(BaseModel):
    id: str
    building_id: str
    name: str
    max_density: int
    map_media_type: str


class PlacementCreate(BaseModel):
    scanner_id: str
    x: float = Field(ge=0, le=1)
    y: float = Field(ge=0, le=1)


class PlacementOut(BaseModel):
    scanner_id: str
    floor_id: str
    x: float
    y: float


class MaxDensityUpdate(BaseModel):
    max_density: int = Field(ge=1)


class SeriesPoint(BaseModel):
    ts: int
    count: int


class DensityHistoryOut(BaseModel):
    floor_id: str
    from_ms: int
    to_ms: int
    bucket_s: int
    series: dict[str, list[SeriesPoint]]  # scanner_id -> points


class SankeyNode(BaseModel):
    id: str


class SankeyLink(BaseModel):
    source: str
    target: str
    value: int


class SankeyOut(BaseModel):
    nodes: list[SankeyNode]
    links: list[SankeyLink]
    ambiguous_devices: int = 0


class ApiError(BaseModel):
    code: int
    message: str
