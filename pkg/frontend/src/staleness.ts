// Stale-stream detection: the console flags itself when no frame has
// arrived for longer than the threshold.

export const STALE_AFTER_MS = 1000;

export class StalenessTracker {
  private lastFrameAt: number | null = null;

  constructor(private readonly staleAfterMs: number = STALE_AFTER_MS) {}

  markFrame(nowMs: number): void {
    this.lastFrameAt = nowMs;
  }

  /** True when no frame was ever seen or the stream paused too long. */
  isStale(nowMs: number): boolean {
    if (this.lastFrameAt === null) return true;
    return nowMs - this.lastFrameAt > this.staleAfterMs;
  }

  ageMs(nowMs: number): number | null {
    return this.lastFrameAt === null ? null : nowMs - this.lastFrameAt;
  }
}
