/** Pure state model behind one open floor view.
 *
 * Everything rendered (markers, counts, breach state, charts) is derived from
 * gateway responses and realtime frames; the reducer never recomputes counts
 * on its own.
 */
import {
  Floor,
  Placement,
  RealtimeFrame,
  SeriesPoint,
} from "./types.js";

export const STALE_AFTER_MS = 10_000;

export type ConnectionState = "connecting" | "live" | "stale" | "closed";

export interface FloorViewState {
  floor: Floor;
  markers: Placement[];
  counts: Record<string, number>;
  series: Record<string, SeriesPoint[]>;
  scannerStatus: Record<string, string>;
  floorTotal: number;
  breach: boolean;
  lastFrameAtMs: number | null;
  closed: boolean;
}

export function initialFloorView(floor: Floor, markers: Placement[]): FloorViewState {
  const series: Record<string, SeriesPoint[]> = {};
  for (const marker of markers) series[marker.scanner_id] = [];
  return {
    floor,
    markers,
    counts: {},
    series,
    scannerStatus: {},
    floorTotal: 0,
    breach: false,
    lastFrameAtMs: null,
    closed: false,
  };
}

export function applyFrame(
  state: FloorViewState,
  frame: RealtimeFrame,
  receivedAtMs: number,
): FloorViewState {
  const next: FloorViewState = {
    ...state,
    counts: { ...state.counts },
    series: { ...state.series },
    scannerStatus: { ...state.scannerStatus },
    lastFrameAtMs: receivedAtMs,
  };
  if (frame.type === "sample") {
    next.counts[frame.scanner_id] = frame.count;
    const points = next.series[frame.scanner_id] ?? [];
    next.series[frame.scanner_id] = [...points, { ts: frame.ts, count: frame.count }];
    next.floorTotal = frame.floor_total;
    next.breach = frame.breach;
  } else {
    next.scannerStatus[frame.scanner_id] = frame.status;
  }
  return next;
}

export function markClosed(state: FloorViewState): FloorViewState {
  return { ...state, closed: true };
}

export function connectionState(
  state: FloorViewState,
  nowMs: number,
  staleAfterMs: number = STALE_AFTER_MS,
): ConnectionState {
  if (state.closed) return "closed";
  if (state.lastFrameAtMs === null) return "connecting";
  return nowMs - state.lastFrameAtMs > staleAfterMs ? "stale" : "live";
}
