/** Browser entry point: wires the gateway client, the realtime feed, and the
 * string renderers into the page. All logic lives in the imported modules so
 * it is exercised by the fixture tests.
 */
import { GatewayClient } from "./api.js";
import {
  applyFrame,
  connectionState,
  FloorViewState,
  initialFloorView,
} from "./floorView.js";
import { heatSpots } from "./heatmap.js";
import { LiveFeed, SocketLike } from "./live.js";
import {
  renderAdminPortal,
  renderAlert,
  renderConnection,
  renderHeatmap,
  renderHistory,
  renderLineChart,
  renderMarkers,
  renderSankey,
  renderStatusBadges,
} from "./render.js";
import { layoutSankey } from "./sankey.js";

interface DashboardConfig {
  baseUrl: string;
  wsBaseUrl: string;
  token: string;
  role: string;
  floorId: string;
  buildingId: string;
}

export async function mountDashboard(root: HTMLElement, config: DashboardConfig): Promise<void> {
  const client = new GatewayClient(config.baseUrl, config.token);
  const floor = await client.getFloor(config.floorId);
  const markers = await client.listScanners(config.floorId);
  let state: FloorViewState = initialFloorView(floor, markers);

  const adminEl = el(root, "admin");
  const liveEl = el(root, "live");
  const chartsEl = el(root, "charts");
  const historyEl = el(root, "history");
  const sankeyEl = el(root, "sankey");

  adminEl.innerHTML = renderAdminPortal(config.role);

  const redraw = () => {
    liveEl.innerHTML =
      renderConnection(connectionState(state, Date.now())) +
      renderAlert(state) +
      renderStatusBadges(state) +
      renderMarkers(state.markers) +
      renderHeatmap(heatSpots(state.markers, state.counts, state.floor.max_density));
    chartsEl.innerHTML = state.markers
      .map((m) => renderLineChart(m.scanner_id, state.series[m.scanner_id] ?? []))
      .join("");
  };

  const feed = new LiveFeed(
    `${config.wsBaseUrl}/realtime/${config.floorId}`,
    (url) => new WebSocket(url) as unknown as SocketLike,
    (frame) => {
      state = applyFrame(state, frame, Date.now());
      redraw();
    },
  );
  feed.connect();
  setInterval(redraw, 2000); // refresh the stale indicator between frames

  const showRange = async (fromMs: number, toMs: number, bucketS: number) => {
    historyEl.innerHTML = renderHistory(
      await client.densityHistory(config.floorId, fromMs, toMs, bucketS),
    );
    sankeyEl.innerHTML = renderSankey(
      layoutSankey(await client.journeys(config.buildingId, fromMs, toMs)),
    );
  };
  const now = Date.now();
  await showRange(now - 3_600_000, now, 60);
  redraw();
}

function el(root: HTMLElement, name: string): HTMLElement {
  const node = document.createElement("section");
  node.dataset.panel = name;
  root.appendChild(node);
  return node;
}
