// Reconnecting WebSocket client with capped exponential backoff.

import { parseServerMsg } from "./protocol.js";
import type { ServerMsg } from "./types.js";

export type SocketStatus = "connecting" | "open" | "closed";

export interface SocketCallbacks {
  onMessage: (msg: ServerMsg) => void;
  onStatus: (status: SocketStatus) => void;
  onSchemaError?: () => void;
}

export class ReconnectingSocket {
  private ws: WebSocket | null = null;
  private backoffMs = 250;
  private closed = false;

  constructor(private readonly url: string,
              private readonly callbacks: SocketCallbacks) {}

  connect(): void {
    if (this.closed) return;
    this.callbacks.onStatus("connecting");
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.backoffMs = 250;
      this.callbacks.onStatus("open");
    };
    ws.onmessage = (ev: MessageEvent) => {
      const msg = parseServerMsg(String(ev.data));
      if (msg === null) {
        // Frame failed schema validation: dropped, surfaced as an error.
        this.callbacks.onSchemaError?.();
        return;
      }
      this.callbacks.onMessage(msg);
    };
    ws.onclose = () => {
      this.callbacks.onStatus("closed");
      this.scheduleReconnect();
    };
    ws.onerror = () => {
      ws.close();
    };
  }

  private scheduleReconnect(): void {
    if (this.closed) return;
    setTimeout(() => this.connect(), this.backoffMs);
    this.backoffMs = Math.min(this.backoffMs * 2, 4000);
  }

  send(obj: unknown): boolean {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(obj));
      return true;
    }
    return false;
  }

  get isOpen(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}
