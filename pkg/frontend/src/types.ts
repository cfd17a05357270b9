/** Wire types of the gateway HTTP/WebSocket contract, with runtime parsing. */
import { z } from "zod";

export const PlacementSchema = z.object({
  scanner_id: z.string(),
  floor_id: z.string(),
  x: z.number().min(0).max(1),
  y: z.number().min(0).max(1),
});
export type Placement = z.infer<typeof PlacementSchema>;

export const FloorSchema = z.object({
  id: z.string(),
  building_id: z.string(),
  name: z.string(),
  max_density: z.number().int().positive(),
  map_media_type: z.string(),
});
export type Floor = z.infer<typeof FloorSchema>;

export const EntitySchema = z.object({
  id: z.string(),
  name: z.string(),
  users: z.array(z.object({ user_id: z.string(), role: z.string() })),
});
export type Entity = z.infer<typeof EntitySchema>;

export const BuildingSchema = z.object({
  id: z.string(),
  entity_id: z.string(),
  name: z.string(),
});
export type Building = z.infer<typeof BuildingSchema>;

export const ApiErrorSchema = z.object({
  code: z.number(),
  message: z.string(),
});
export type ApiError = z.infer<typeof ApiErrorSchema>;

export const SeriesPointSchema = z.object({ ts: z.number(), count: z.number() });
export type SeriesPoint = z.infer<typeof SeriesPointSchema>;

export const DensityHistorySchema = z.object({
  floor_id: z.string(),
  from_ms: z.number(),
  to_ms: z.number(),
  bucket_s: z.number(),
  series: z.record(z.string(), z.array(SeriesPointSchema)),
});
export type DensityHistory = z.infer<typeof DensityHistorySchema>;

export const SankeySchema = z.object({
  nodes: z.array(z.object({ id: z.string() })),
  links: z.array(
    z.object({ source: z.string(), target: z.string(), value: z.number() }),
  ),
  ambiguous_devices: z.number(),
});
export type Sankey = z.infer<typeof SankeySchema>;

export const SampleFrameSchema = z.object({
  type: z.literal("sample"),
  scanner_id: z.string(),
  ts: z.number(),
  count: z.number(),
  floor_total: z.number(),
  breach: z.boolean(),
});
export type SampleFrame = z.infer<typeof SampleFrameSchema>;

export const StatusFrameSchema = z.object({
  type: z.literal("status"),
  scanner_id: z.string(),
  status: z.string(),
  ts: z.number(),
});
export type StatusFrame = z.infer<typeof StatusFrameSchema>;

export const RealtimeFrameSchema = z.discriminatedUnion("type", [
  SampleFrameSchema,
  StatusFrameSchema,
]);
export type RealtimeFrame = z.infer<typeof RealtimeFrameSchema>;
