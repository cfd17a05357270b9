"""Configuration state behind the gateway: entities, buildings, floors with
maps, scanner placements, and the static token -> (user, role) auth table.

Persisted as one JSON document rewritten atomically on every mutation; map
images live as verbatim files beside it.
"""
from __future__ import annotations

import json
import os
import tempfile
import threading
import uuid
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path


class Role(str, Enum):
    SUPER_ADMIN = "SuperAdmin"
    ADMIN = "Admin"
    USER = "User"


_RANK = {Role.USER: 0, Role.ADMIN: 1, Role.SUPER_ADMIN: 2}


def role_at_least(role: Role, required: Role) -> bool:
    return _RANK[role] >= _RANK[required]


class ConflictError(Exception):
    pass


class NotFoundError(Exception):
    pass


@dataclass
class ConfigStore:
    path: Path
    tokens: dict[str, tuple[str, Role]] = field(default_factory=dict)
    entities: dict[str, dict] = field(default_factory=dict)
    buildings: dict[str, dict] = field(default_factory=dict)
    floors: dict[str, dict] = field(default_factory=dict)
    placements: dict[str, dict] = field(default_factory=dict)  # scanner_id -> placement

    def __post_init__(self):
        self.path = Path(self.path)
        self._lock = threading.Lock()
        self.maps_dir = self.path.parent / "maps"

    # --- persistence ---

    @classmethod
    def load(cls, path: str | Path, tokens: dict[str, tuple[str, Role]]) -> "ConfigStore":
        store = cls(path=Path(path), tokens=tokens)
        if store.path.is_file():
            doc = json.loads(store.path.read_text())
            store.entities = doc.get("entities", {})
            store.buildings = doc.get("buildings", {})
            store.floors = doc.get("floors", {})
            store.placements = doc.get("placements", {})
        return store

    @staticmethod
    def load_tokens(path: str | Path) -> dict[str, tuple[str, Role]]:
        doc = json.loads(Path(path).read_text())
        return {tok: (u["user"], Role(u["role"])) for tok, u in doc.items()}

    def _save(self) -> None:
        doc = {
            "entities": self.entities,
            "buildings": self.buildings,
            "floors": self.floors,
            "placements": self.placements,
        }
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.path.parent, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
        os.replace(tmp, self.path)

    # --- mutations (serialized through one lock) ---

    def create_entity(self, name: str) -> dict:
        with self._lock:
            entity = {"id": uuid.uuid4().hex[:12], "name": name, "users": []}
            self.entities[entity["id"]] = entity
            self._save()
            return entity

    def add_user(self, entity_id: str, user_id: str, role: Role) -> dict:
        with self._lock:
            entity = self._get(self.entities, entity_id, "entity")
            entity["users"] = [u for u in entity["users"] if u["user_id"] != user_id]
            entity["users"].append({"user_id": user_id, "role": role.value})
            self._save()
            return entity

    def create_building(self, entity_id: str, name: str) -> dict:
        with self._lock:
            self._get(self.entities, entity_id, "entity")
            building = {"id": uuid.uuid4().hex[:12], "entity_id": entity_id, "name": name}
            self.buildings[building["id"]] = building
            self._save()
            return building

    def create_floor(self, building_id: str, name: str, max_density: int,
                     map_image: bytes, media_type: str) -> dict:
        if max_density < 1:
            raise ValueError("max_density must be a positive integer")
        with self._lock:
            self._get(self.buildings, building_id, "building")
            floor_id = uuid.uuid4().hex[:12]
            self.maps_dir.mkdir(parents=True, exist_ok=True)
            (self.maps_dir / floor_id).write_bytes(map_image)
            floor = {
                "id": floor_id,
                "building_id": building_id,
                "name": name,
                "max_density": max_density,
                "map_media_type": media_type,
            }
            self.floors[floor_id] = floor
            self._save()
            return floor

    def set_max_density(self, floor_id: str, max_density: int) -> dict:
        if max_density < 1:
            raise ValueError("max_density must be a positive integer")
        with self._lock:
            floor = self._get(self.floors, floor_id, "floor")
            floor["max_density"] = max_density
            self._save()
            return floor

    def place_scanner(self, floor_id: str, scanner_id: str, x: float, y: float) -> dict:
        if not (0 <= x <= 1 and 0 <= y <= 1):
            raise ValueError("scanner coordinates must be fractional, in [0, 1]")
        with self._lock:
            self._get(self.floors, floor_id, "floor")
            if scanner_id in self.placements:
                raise ConflictError(f"scanner {scanner_id!r} is already placed")
            placement = {"scanner_id": scanner_id, "floor_id": floor_id, "x": x, "y": y}
            self.placements[scanner_id] = placement
            self._save()
            return placement

    def remove_placement(self, scanner_id: str) -> None:
        with self._lock:
            self._get(self.placements, scanner_id, "placement")
            del self.placements[scanner_id]
            self._save()

    # --- reads ---

    def map_image(self, floor_id: str) -> tuple[bytes, str]:
        floor = self._get(self.floors, floor_id, "floor")
        return (self.maps_dir / floor_id).read_bytes(), floor["map_media_type"]

    def floor_scanners(self, floor_id: str) -> list[str]:
        self._get(self.floors, floor_id, "floor")
        return sorted(p["scanner_id"] for p in self.placements.values()
                      if p["floor_id"] == floor_id)

    def building_scanners(self, building_id: str) -> list[str]:
        self._get(self.buildings, building_id, "building")
        floor_ids = {f["id"] for f in self.floors.values()
                     if f["building_id"] == building_id}
        return sorted(p["scanner_id"] for p in self.placements.values()
                      if p["floor_id"] in floor_ids)

    def floor_of_scanner(self, scanner_id: str) -> str | None:
        placement = self.placements.get(scanner_id)
        return placement["floor_id"] if placement else None

    @staticmethod
    def _get(mapping: dict, key: str, kind: str) -> dict:
        try:
            return mapping[key]
        except KeyError:
            raise NotFoundError(f"no such {kind}: {key}")
