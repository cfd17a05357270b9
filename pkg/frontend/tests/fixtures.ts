/** Helpers for replaying recorded gateway payloads through the client. */
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { FetchLike } from "../src/api.js";

const FIXTURE_DIR = join(dirname(fileURLToPath(import.meta.url)), "fixtures", "gateway");

export interface RecordedResponse {
  status: number;
  body: unknown;
}

export function loadFixture(name: string): RecordedResponse {
  return JSON.parse(readFileSync(join(FIXTURE_DIR, `${name}.json`), "utf-8"));
}

export interface RecordedCall {
  method: string;
  url: string;
}

/** fetch stand-in routing `METHOD path-prefix` to a recorded response. */
export function fixtureFetch(
  routes: Record<string, RecordedResponse>,
  calls: RecordedCall[] = [],
): FetchLike {
  return async (url, init) => {
    const method = init?.method ?? "GET";
    calls.push({ method, url });
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    for (const [route, recorded] of Object.entries(routes)) {
      const [routeMethod, routePath] = route.split(" ", 2);
      if (routeMethod === method && path.startsWith(routePath)) {
        return { status: recorded.status, json: async () => recorded.body };
      }
    }
    throw new Error(`no fixture for ${method} ${path}`);
  };
}
