"""HTTP/WebSocket API over the config store, count store, and archive."""
from __future__ import annotations

import json
import queue
from pathlib import Path

from fastapi import Depends, FastAPI, File, Form, Query, Request, UploadFile, WebSocket, WebSocketDisconnect
from fastapi.concurrency import run_in_threadpool
from fastapi.exceptions import HTTPException
from fastapi.responses import JSONResponse, Response

from ..agent import TOPIC_PREFIX
from ..bus import InMemoryBus
from ..density import read_density_series
from ..journey import DEFAULT_GAP_THRESHOLD_S, sankey_export
from ..pipeline import compute_flows
from . import models
from .hub import RealtimeHub
from .store import ConfigStore, ConflictError, NotFoundError, Role, role_at_least


def create_app(store: ConfigStore, data_root: str | Path,
               hub: RealtimeHub | None = None,
               bus: InMemoryBus | None = None,
               gap_threshold_s: float = DEFAULT_GAP_THRESHOLD_S) -> FastAPI:
    app = FastAPI(title="probesense gateway")
    data_root = Path(data_root)
    hub = hub or RealtimeHub(store)
    app.state.hub = hub
    app.state.store = store

    if bus is not None:
        conn = bus.connect("gateway")

        def on_log(topic: str, payload: bytes) -> None:
            try:
                doc = json.loads(payload)
                kind = doc["type"]
                status = {"birth": "online", "offline": "offline"}[kind]
                hub.publish_status(doc["scanner_id"], status, doc.get("ts", 0))
            except (ValueError, KeyError):
                pass

        conn.subscribe(f"{TOPIC_PREFIX}/#", callback=lambda t, p: on_log(t, p) if t.endswith("/log") else None)

    # --- errors & auth ---

    @app.exception_handler(HTTPException)
    async def http_error(_request: Request, exc: HTTPException):
        return JSONResponse(status_code=exc.status_code,
                            content={"code": exc.status_code, "message": str(exc.detail)})

    def caller_role(request: Request) -> Role:
        auth = request.headers.get("authorization", "")
        if not auth.lower().startswith("bearer "):
            raise HTTPException(401, "missing bearer token")
        token = auth.split(" ", 1)[1].strip()
        if token not in store.tokens:
            raise HTTPException(401, "unknown token")
        return store.tokens[token][1]

    def require(required: Role):
        def check(role: Role = Depends(caller_role)) -> Role:
            if not role_at_least(role, required):
                raise HTTPException(403, f"requires {required.value} role")
            return role
        return check

    def _found(fn, *args):
        try:
            return fn(*args)
        except NotFoundError as e:
            raise HTTPException(404, str(e))
        except ConflictError as e:
            raise HTTPException(409, str(e))
        except ValueError as e:
            raise HTTPException(422, str(e))

    # --- config CRUD ---

    @app.post("/entities", response_model=models.EntityOut, status_code=201)
    def create_entity(body: models.EntityCreate, _role: Role = Depends(require(Role.SUPER_ADMIN))):
        return store.create_entity(body.name)

    @app.get("/entities", response_model=list[models.EntityOut])
    def list_entities(_role: Role = Depends(require(Role.USER))):
        return sorted(store.entities.values(), key=lambda e: e["id"])

    @app.post("/entities/{entity_id}/users", response_model=models.EntityOut)
    def add_user(entity_id: str, body: models.UserAdd, _role: Role = Depends(require(Role.ADMIN))):
        return _found(store.add_user, entity_id, body.user_id, body.role)

    @app.post("/buildings", response_model=models.BuildingOut, status_code=201)
    def create_building(body: models.BuildingCreate, _role: Role = Depends(require(Role.ADMIN))):
        return _found(store.create_building, body.entity_id, body.name)

    @app.get("/buildings", response_model=list[models.BuildingOut])
    def list_buildings(_role: Role = Depends(require(Role.USER))):
        return sorted(store.buildings.values(), key=lambda b: b["id"])

    @app.post("/buildings/{building_id}/floors", response_model=models.FloorOut, status_code=201)
    async def create_floor(building_id: str, name: str = Form(...), max_density: int = Form(...),
                           map_image: UploadFile = File(...),
                           _role: Role = Depends(require(Role.ADMIN))):
        content = await map_image.read()
        media_type = map_image.content_type or "application/octet-stream"
        return _found(store.create_floor, building_id, name, max_density, content, media_type)

    @app.get("/floors/{floor_id}", response_model=models.FloorOut)
    def get_floor(floor_id: str, _role: Role = Depends(require(Role.USER))):
        return _found(store._get, store.floors, floor_id, "floor")

    @app.get("/floors/{floor_id}/map")
    def get_floor_map(floor_id: str, _role: Role = Depends(require(Role.USER))):
        content, media_type = _found(store.map_image, floor_id)
        return Response(content=content, media_type=media_type)

    @app.post("/floors/{floor_id}/scanners", response_model=models.PlacementOut, status_code=201)
    def place_scanner(floor_id: str, body: models.PlacementCreate,
                      _role: Role = Depends(require(Role.ADMIN))):
        return _found(store.place_scanner, floor_id, body.scanner_id, body.x, body.y)

    @app.get("/floors/{floor_id}/scanners", response_model=list[models.PlacementOut])
    def list_placements(floor_id: str, _role: Role = Depends(require(Role.USER))):
        _found(store._get, store.floors, floor_id, "floor")
        return [store.placements[s] for s in store.floor_scanners(floor_id)]

    @app.delete("/floors/{floor_id}/scanners/{scanner_id}", status_code=204)
    def remove_scanner(floor_id: str, scanner_id: str, _role: Role = Depends(require(Role.ADMIN))):
        _found(store.remove_placement, scanner_id)
        return Response(status_code=204)

    @app.put("/floors/{floor_id}/max_density", response_model=models.FloorOut)
    def set_max_density(floor_id: str, body: models.MaxDensityUpdate,
                        _role: Role = Depends(require(Role.ADMIN))):
        return _found(store.set_max_density, floor_id, body.max_density)

    # --- data endpoints ---

    @app.get("/floors/{floor_id}/density", response_model=models.DensityHistoryOut)
    def density_history(floor_id: str, from_: int = Query(alias="from"), to: int = Query(),
                        bucket: int = 60,
                        _role: Role = Depends(require(Role.USER))):
        scanners = _found(store.floor_scanners, floor_id)
        if bucket < 1:
            raise HTTPException(422, "bucket must be >= 1 seconds")
        bucket_ms = bucket * 1000
        series = {}
        for scanner_id in scanners:
            buckets: dict[int, int] = {}
            for sample in read_density_series(data_root, scanner_id):
                if not (from_ <= sample.ts < to):
                    continue
                start = from_ + ((sample.ts - from_) // bucket_ms) * bucket_ms
                buckets[start] = max(buckets.get(start, 0), sample.count)
            series[scanner_id] = [
                models.SeriesPoint(ts=ts, count=c) for ts, c in sorted(buckets.items())
            ]
        return models.DensityHistoryOut(
            floor_id=floor_id, from_ms=from_, to_ms=to, bucket_s=bucket, series=series
        )

    @app.get("/buildings/{building_id}/journeys", response_model=models.SankeyOut)
    def journeys(building_id: str, from_: int = Query(alias="from"), to: int = Query(),
                 _role: Role = Depends(require(Role.USER))):
        scanners = _found(store.building_scanners, building_id)
        matrix = compute_flows(data_root, from_, to, gap_threshold_s, scanner_ids=scanners)
        doc = sankey_export(matrix)
        return models.SankeyOut(**doc, ambiguous_devices=matrix.ambiguous_devices)

    @app.websocket("/realtime/{floor_id}")
    async def realtime(ws: WebSocket, floor_id: str):
        if floor_id not in store.floors:
            await ws.close(code=4404)
            return
        await ws.accept()
        q = hub.subscribe(floor_id)
        try:
            while True:
                try:
                    frame = await run_in_threadpool(q.get, True, 0.1)
                except queue.Empty:
                    continue
                await ws.send_json(frame)
        except WebSocketDisconnect:
            pass
        finally:
            hub.unsubscribe(floor_id, q)

    return app
