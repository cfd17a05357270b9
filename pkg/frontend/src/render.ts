/** HTML/SVG string rendering. Pure functions of gateway-derived state, so the
 * same code paths run in the browser and in fixture tests without a DOM.
 */
import { GatewayError } from "./api.js";
import { ConnectionState, FloorViewState } from "./floorView.js";
import { HeatSpot } from "./heatmap.js";
import { SankeyLayout } from "./sankey.js";
import { DensityHistory, Placement, SeriesPoint } from "./types.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const ADMIN_ROLES = new Set(["Admin", "SuperAdmin"]);

/** The admin portal (building/floor/placement management) is hidden outside
 * the admin roles; the gateway enforces the same rule server-side. */
export function renderAdminPortal(role: string): string {
  if (!ADMIN_ROLES.has(role)) {
    return `<p class="forbidden">Administration requires an Admin role.</p>`;
  }
  return [
    `<section class="admin-portal">`,
    `<h2>Administration</h2>`,
    `<form data-action="create-building"></form>`,
    `<form data-action="create-floor" enctype="multipart/form-data"></form>`,
    `<form data-action="place-scanner"></form>`,
    `<form data-action="set-max-density"></form>`,
    `</section>`,
  ].join("");
}

export function renderErrorBanner(err: unknown): string {
  if (err instanceof GatewayError) {
    return `<div class="error-banner" data-code="${err.code}">${escapeHtml(err.message)}</div>`;
  }
  return `<div class="error-banner">Request failed.</div>`;
}

/** Scanner markers positioned by their fractional placement coordinates. */
export function renderMarkers(markers: Placement[]): string {
  const circles = markers
    .map(
      (m) =>
        `<circle class="scanner-marker" data-scanner="${escapeHtml(m.scanner_id)}" ` +
        `cx="${(m.x * 100).toFixed(2)}%" cy="${(m.y * 100).toFixed(2)}%" r="6"/>`,
    )
    .join("");
  return `<svg class="floor-markers" viewBox="0 0 100 100">${circles}</svg>`;
}

export function renderHeatmap(spots: HeatSpot[]): string {
  const blobs = spots
    .map(
      (s) =>
        `<circle class="heat-spot" data-scanner="${escapeHtml(s.scannerId)}" ` +
        `cx="${(s.x * 100).toFixed(2)}" cy="${(s.y * 100).toFixed(2)}" ` +
        `r="${(s.radius * 100).toFixed(2)}" fill-opacity="${s.intensity.toFixed(3)}"/>`,
    )
    .join("");
  return `<svg class="floor-heatmap" viewBox="0 0 100 100">${blobs}</svg>`;
}

export function renderAlert(state: FloorViewState): string {
  if (!state.breach) return "";
  return (
    `<div class="alert breach" role="alert">` +
    `Maximum density exceeded: ${state.floorTotal} &gt; ${state.floor.max_density}` +
    `</div>`
  );
}

export function renderLineChart(scannerId: string, points: SeriesPoint[]): string {
  if (points.length === 0) {
    return `<p class="empty-state" data-scanner="${escapeHtml(scannerId)}">No samples yet.</p>`;
  }
  const t0 = points[0].ts;
  const maxCount = Math.max(1, ...points.map((p) => p.count));
  const coords = points
    .map((p) => `${((p.ts - t0) / 1000).toFixed(1)},${(100 - (p.count / maxCount) * 100).toFixed(1)}`)
    .join(" ");
  return (
    `<svg class="density-chart" data-scanner="${escapeHtml(scannerId)}">` +
    `<polyline data-points="${points.length}" points="${coords}"/></svg>`
  );
}

export function renderConnection(conn: ConnectionState): string {
  return `<span class="connection ${conn}">${conn}</span>`;
}

export function renderStatusBadges(state: FloorViewState): string {
  return state.markers
    .map((m) => {
      const status = state.scannerStatus[m.scanner_id] ?? "online";
      return `<span class="scanner-status ${status}" data-scanner="${escapeHtml(m.scanner_id)}">${status}</span>`;
    })
    .join("");
}

export function renderHistory(history: DensityHistory): string {
  const charts = Object.entries(history.series)
    .filter(([, points]) => points.length > 0)
    .map(([scannerId, points]) => renderLineChart(scannerId, points));
  if (charts.length === 0) {
    return `<p class="empty-state">No data for the selected range.</p>`;
  }
  return `<div class="history" data-bucket="${history.bucket_s}">${charts.join("")}</div>`;
}

export function renderSankey(layout: SankeyLayout): string {
  if (layout.ribbons.length === 0) {
    return `<p class="empty-state">No journeys in the selected range.</p>`;
  }
  const ribbons = layout.ribbons
    .map(
      (r) =>
        `<path class="ribbon" data-source="${escapeHtml(r.source)}" ` +
        `data-target="${escapeHtml(r.target)}" data-value="${r.value}" ` +
        `d="M0,${r.y0.toFixed(1)} L100,${r.y0.toFixed(1)} L100,${r.y1.toFixed(1)} L0,${r.y1.toFixed(1)} Z"/>` +
        `<text class="ribbon-label" y="${((r.y0 + r.y1) / 2).toFixed(1)}">${r.value}</text>`,
    )
    .join("");
  const note =
    layout.ambiguousDevices > 0
      ? `<p class="ambiguous-note">${layout.ambiguousDevices} ambiguous device(s) excluded.</p>`
      : "";
  return `<svg class="journey-sankey">${ribbons}</svg>${note}`;
}
