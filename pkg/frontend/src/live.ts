/** Realtime feed: one websocket subscription per open floor view, with
 * exponential-backoff reconnect. The socket factory, clock, and timer are
 * injectable so tests can script connection lifecycles.
 */
import { RealtimeFrame, RealtimeFrameSchema } from "./types.js";

export interface SocketLike {
  onopen: ((event?: unknown) => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
  onclose: ((event?: unknown) => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;
export type Scheduler = (fn: () => void, delayMs: number) => void;

export interface LiveFeedOptions {
  backoffBaseMs?: number;
  backoffCapMs?: number;
  now?: () => number;
  schedule?: Scheduler;
}

export class LiveFeed {
  lastFrameAtMs: number | null = null;
  reconnectAttempts = 0;
  private socket: SocketLike | null = null;
  private stopped = false;
  private readonly backoffBaseMs: number;
  private readonly backoffCapMs: number;
  private readonly now: () => number;
  private readonly schedule: Scheduler;

  constructor(
    private readonly url: string,
    private readonly factory: SocketFactory,
    private readonly onFrame: (frame: RealtimeFrame) => void,
    opts: LiveFeedOptions = {},
  ) {
    this.backoffBaseMs = opts.backoffBaseMs ?? 1000;
    this.backoffCapMs = opts.backoffCapMs ?? 30_000;
    this.now = opts.now ?? Date.now;
    this.schedule = opts.schedule ?? ((fn, ms) => setTimeout(fn, ms));
  }

  connect(): void {
    if (this.stopped) return;
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.reconnectAttempts = 0;
    };
    socket.onmessage = (event) => {
      const parsed = RealtimeFrameSchema.safeParse(JSON.parse(event.data));
      if (!parsed.success) return; // unknown frame types are ignored
      this.lastFrameAtMs = this.now();
      this.onFrame(parsed.data);
    };
    socket.onclose = () => {
      if (this.stopped) return;
      const delay = Math.min(
        this.backoffBaseMs * 2 ** this.reconnectAttempts,
        this.backoffCapMs,
      );
      this.reconnectAttempts += 1;
      this.schedule(() => this.connect(), delay);
    };
  }

  /** True when no frame arrived for longer than `staleAfterMs`. */
  isStale(nowMs: number, staleAfterMs = 10_000): boolean {
    if (this.lastFrameAtMs === null) return false;
    return nowMs - this.lastFrameAtMs > staleAfterMs;
  }

  stop(): void {
    this.stopped = true;
    this.socket?.close();
  }
}
