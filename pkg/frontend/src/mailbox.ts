// Latest-frame mailbox decoupling WebSocket receive from rendering: the
// render loop always shows the newest frame and never queues stale ones.

export class LatestFrameMailbox<T> {
  private value: T | null = null;
  private fresh = false;

  put(frame: T): void {
    this.value = frame;
    this.fresh = true;
  }

  /** Newest frame if one arrived since the last take, else null. */
  take(): T | null {
    if (!this.fresh) return null;
    this.fresh = false;
    return this.value;
  }

  /** Newest frame regardless of freshness (for resize redraws). */
  peek(): T | null {
    return this.value;
  }
}
