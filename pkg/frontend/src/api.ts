/** Typed client for the gateway HTTP API.
 *
 * All state shown in the dashboard comes from these endpoints; the client
 * never recomputes counts or flows itself. The fetch implementation is
 * injectable so tests can replay recorded gateway payloads.
 */
import {
  ApiErrorSchema,
  Building,
  BuildingSchema,
  DensityHistory,
  DensityHistorySchema,
  Entity,
  EntitySchema,
  Floor,
  FloorSchema,
  Placement,
  PlacementSchema,
  Sankey,
  SankeySchema,
} from "./types.js";

export interface ResponseLike {
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: unknown },
) => Promise<ResponseLike>;

export class GatewayError extends Error {
  constructor(
    public readonly code: number,
    message: string,
  ) {
    super(message);
    this.name = "GatewayError";
  }
}

interface RequestOptions {
  method?: string;
  json?: unknown;
  body?: unknown;
  query?: Record<string, string | number>;
}

export class GatewayClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
    private readonly fetchImpl: FetchLike = fetch as unknown as FetchLike,
  ) {}

  private async request(path: string, opts: RequestOptions = {}): Promise<unknown> {
    let url = this.baseUrl + path;
    if (opts.query) {
      const qs = new URLSearchParams(
        Object.entries(opts.query).map(([k, v]) => [k, String(v)]),
      );
      url += `?${qs.toString()}`;
    }
    const headers: Record<string, string> = {
      Authorization: `Bearer ${this.token}`,
    };
    let body = opts.body;
    if (opts.json !== undefined) {
      headers["Content-Type"] = "application/json";
      body = JSON.stringify(opts.json);
    }
    const res = await this.fetchImpl(url, {
      method: opts.method ?? "GET",
      headers,
      body,
    });
    if (res.status === 204) return null;
    const doc = await res.json();
    if (res.status >= 400) {
      const parsed = ApiErrorSchema.safeParse(doc);
      if (parsed.success) {
        throw new GatewayError(parsed.data.code, parsed.data.message);
      }
      throw new GatewayError(res.status, `request failed with ${res.status}`);
    }
    return doc;
  }

  async createEntity(name: string): Promise<Entity> {
    return EntitySchema.parse(
      await this.request("/entities", { method: "POST", json: { name } }),
    );
  }

  async createBuilding(entityId: string, name: string): Promise<Building> {
    return BuildingSchema.parse(
      await this.request("/buildings", {
        method: "POST",
        json: { entity_id: entityId, name },
      }),
    );
  }

  /** `mapForm` is a multipart FormData carrying name, max_density, map_image. */
  async createFloor(buildingId: string, mapForm: unknown): Promise<Floor> {
    return FloorSchema.parse(
      await this.request(`/buildings/${buildingId}/floors`, {
        method: "POST",
        body: mapForm,
      }),
    );
  }

  async getFloor(floorId: string): Promise<Floor> {
    return FloorSchema.parse(await this.request(`/floors/${floorId}`));
  }

  async placeScanner(
    floorId: string,
    scannerId: string,
    x: number,
    y: number,
  ): Promise<Placement> {
    return PlacementSchema.parse(
      await this.request(`/floors/${floorId}/scanners`, {
        method: "POST",
        json: { scanner_id: scannerId, x, y },
      }),
    );
  }

  async listScanners(floorId: string): Promise<Placement[]> {
    const doc = await this.request(`/floors/${floorId}/scanners`);
    return (doc as unknown[]).map((p) => PlacementSchema.parse(p));
  }

  async removeScanner(floorId: string, scannerId: string): Promise<void> {
    await this.request(`/floors/${floorId}/scanners/${scannerId}`, {
      method: "DELETE",
    });
  }

  async setMaxDensity(floorId: string, maxDensity: number): Promise<Floor> {
    return FloorSchema.parse(
      await this.request(`/floors/${floorId}/max_density`, {
        method: "PUT",
        json: { max_density: maxDensity },
      }),
    );
  }

  async densityHistory(
    floorId: string,
    fromMs: number,
    toMs: number,
    bucketS: number,
  ): Promise<DensityHistory> {
    return DensityHistorySchema.parse(
      await this.request(`/floors/${floorId}/density`, {
        query: { from: fromMs, to: toMs, bucket: bucketS },
      }),
    );
  }

  async journeys(buildingId: string, fromMs: number, toMs: number): Promise<Sankey> {
    return SankeySchema.parse(
      await this.request(`/buildings/${buildingId}/journeys`, {
        query: { from: fromMs, to: toMs },
      }),
    );
  }
}
