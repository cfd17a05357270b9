import { describe, expect, it } from "vitest";
import { GatewayClient } from "../src/api.js";
import { renderHistory } from "../src/render.js";
import { fixtureFetch, loadFixture, RecordedCall } from "./fixtures.js";

const floorId = (loadFixture("floor_created").body as { id: string }).id;

function historyClient(calls: RecordedCall[] = []) {
  return new GatewayClient(
    "http://gw",
    "tok-user",
    fixtureFetch(
      { [`GET /floors/${floorId}/density`]: loadFixture("density_history") },
      calls,
    ),
  );
}

describe("density history", () => {
  it("renders one chart per scanner that has samples", async () => {
    const history = await historyClient().densityHistory(floorId, 0, 1, 120);
    const html = renderHistory(history);
    expect(html).toContain('data-scanner="scan-A"');
    expect(html).not.toContain('data-scanner="scan-B"'); // no samples recorded
    expect(html).toContain('data-bucket="120"');
    expect(html).toContain('data-points="3"');
  });

  it("shows the empty state for an empty range", async () => {
    const client = new GatewayClient(
      "http://gw",
      "tok-user",
      fixtureFetch({
        [`GET /floors/${floorId}/density`]: loadFixture("density_history_empty"),
      }),
    );
    const history = await client.densityHistory(floorId, 0, 1, 60);
    expect(renderHistory(history)).toContain("No data for the selected range.");
  });

  it("re-queries with the new bucket parameter on toggle", async () => {
    const calls: RecordedCall[] = [];
    const client = historyClient(calls);
    await client.densityHistory(floorId, 1000, 2000, 60);
    await client.densityHistory(floorId, 1000, 2000, 300); // bucket toggle
    expect(calls).toHaveLength(2);
    expect(calls[0].url).toContain("bucket=60");
    expect(calls[1].url).toContain("bucket=300");
    expect(calls[1].url).toContain("from=1000");
    expect(calls[1].url).toContain("to=2000");
  });
});
