// Scrolling strip charts for torque and current telemetry.

export interface Series {
  label: string;
  color: string;
}

export class StripChart {
  private samples: { t: number; values: number[] }[] = [];

  constructor(
    private readonly series: Series[],
    private readonly windowS: number = 10,
    private readonly unit: string = "",
  ) {}

  push(t: number, values: number[]): void {
    const last = this.samples[this.samples.length - 1];
    if (last && t <= last.t) return;
    this.samples.push({ t, values });
    const cutoff = t - this.windowS;
    while (this.samples.length && this.samples[0]!.t < cutoff) {
      this.samples.shift();
    }
  }

  clear(): void {
    this.samples = [];
  }

  draw(ctx: CanvasRenderingContext2D, width: number, height: number): void {
    ctx.clearRect(0, 0, width, height);
    if (this.samples.length < 2) return;
    const t1 = this.samples[this.samples.length - 1]!.t;
    const t0 = t1 - this.windowS;
    let lo = Infinity, hi = -Infinity;
    for (const s of this.samples) {
      for (const v of s.values) {
        lo = Math.min(lo, v);
        hi = Math.max(hi, v);
      }
    }
    if (!isFinite(lo)) return;
    const pad = Math.max((hi - lo) * 0.1, 0.05);
    lo -= pad; hi += pad;
    const xAt = (t: number) => ((t - t0) / (t1 - t0)) * width;
    const yAt = (v: number) => height - ((v - lo) / (hi - lo)) * height;

    ctx.strokeStyle = "rgba(140,150,160,0.3)";
    ctx.lineWidth = 1;
    const zeroY = yAt(0);
    if (zeroY >= 0 && zeroY <= height) {
      ctx.beginPath(); ctx.moveTo(0, zeroY); ctx.lineTo(width, zeroY); ctx.stroke();
    }

    this.series.forEach((s, k) => {
      ctx.strokeStyle = s.color;
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      let started = false;
      for (const sample of this.samples) {
        const v = sample.values[k];
        if (v === undefined) continue;
        const x = xAt(sample.t);
        const y = yAt(v);
        if (!started) { ctx.moveTo(x, y); started = true; }
        else ctx.lineTo(x, y);
      }
      ctx.stroke();
    });

    ctx.fillStyle = "rgba(200,210,220,0.8)";
    ctx.font = "10px sans-serif";
    ctx.fillText(`${hi.toFixed(2)} ${this.unit}`, 4, 10);
    ctx.fillText(`${lo.toFixed(2)} ${this.unit}`, 4, height - 3);
  }
}
