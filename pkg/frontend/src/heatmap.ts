/** Heatmap model: per-scanner radial intensity around each marker, scaled by
 * the floor's max density. No interpolation between scanners.
 */
import { Placement } from "./types.js";

export interface HeatSpot {
  scannerId: string;
  /** fractional map coordinates, straight from the placement */
  x: number;
  y: number;
  /** 0..1, count relative to the floor max density (clamped) */
  intensity: number;
  radius: number;
}

export function heatSpots(
  markers: Placement[],
  counts: Record<string, number>,
  maxDensity: number,
  radius = 0.12,
): HeatSpot[] {
  return markers.map((marker) => {
    const count = counts[marker.scanner_id] ?? 0;
    return {
      scannerId: marker.scanner_id,
      x: marker.x,
      y: marker.y,
      intensity: Math.min(1, maxDensity > 0 ? count / maxDensity : 0),
      radius,
    };
  });
}
