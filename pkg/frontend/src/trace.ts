// Time-response panel for on-demand simulations.
import { linearScale } from "./scales.js";
import { DrawContext } from "./nichols.js";
import { TraceJson } from "./types.js";

export class TraceView {
  data: TraceJson | null = null;

  constructor(
    private width: number,
    private height: number,
  ) {}

  setData(trace: TraceJson): void {
    this.data = trace;
  }

  draw(ctx: DrawContext): void {
    ctx.clearRect(0, 0, this.width, this.height);
    const d = this.data;
    if (!d || d.t.length === 0) return;
    const lo = Math.min(...d.y, 0);
    const hi = Math.max(...d.y, 1);
    const pad = 0.1 * (hi - lo || 1);
    const x = linearScale([d.t[0], d.t[d.t.length - 1]], [40, this.width - 8]);
    const y = linearScale([lo - pad, hi + pad], [this.height - 18, 8]);

    ctx.strokeStyle = "#2a6f97";
    ctx.lineWidth = 1.5;
    ctx.setLineDash([]);
    ctx.beginPath();
    for (let i = 0; i < d.t.length; i++) {
      if (i === 0) ctx.moveTo(x(d.t[i]), y(d.y[i]));
      else ctx.lineTo(x(d.t[i]), y(d.y[i]));
    }
    ctx.stroke();

    // slow samples as dots
    ctx.fillStyle = "#c21807";
    for (let i = 0; i < d.t_slow.length; i++) {
      ctx.beginPath();
      ctx.arc(x(d.t_slow[i]), y(d.y_slow[i]), 2, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
}
