// Trailing-edge rate limiter for outgoing commands: at most one send per
// interval, and the newest pending value always goes out eventually.

export class CommandRateLimiter<T> {
  private lastSentAt = -Infinity;
  private pending: T | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly send: (value: T) => void,
    private readonly minIntervalMs: number = 50,
    private readonly now: () => number = () => Date.now(),
  ) {}

  submit(value: T): void {
    const t = this.now();
    if (t - this.lastSentAt >= this.minIntervalMs) {
      this.lastSentAt = t;
      this.send(value);
      return;
    }
    this.pending = value;
    if (this.timer === null) {
      const wait = this.minIntervalMs - (t - this.lastSentAt);
      this.timer = setTimeout(() => this.flush(), wait);
    }
  }

  private flush(): void {
    this.timer = null;
    if (this.pending === null) return;
    this.lastSentAt = this.now();
    const value = this.pending;
    this.pending = null;
    this.send(value);
  }

  dispose(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
    this.pending = null;
  }
}
