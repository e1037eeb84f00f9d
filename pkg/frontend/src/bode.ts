// Sensitivity magnitude panel: service-computed curves with their bounds.
import { linearScale } from "./scales.js";
import { DrawContext } from "./nichols.js";
import { SensitivityCurveJson } from "./types.js";

export class BodeView {
  data: SensitivityCurveJson | null = null;
  title = "";

  constructor(
    private width: number,
    private height: number,
  ) {}

  setData(curve: SensitivityCurveJson, title: string): void {
    this.data = curve;
    this.title = title;
  }

  draw(ctx: DrawContext): void {
    ctx.clearRect(0, 0, this.width, this.height);
    const d = this.data;
    if (!d || d.omega.length === 0) return;
    const wLo = Math.log10(d.omega[0]);
    const wHi = Math.log10(d.omega[d.omega.length - 1]);
    const lo = Math.min(...d.value_db, ...d.bound_db) - 5;
    const hi = Math.max(...d.value_db, ...d.bound_db) + 5;
    const x = linearScale([wLo, wHi], [40, this.width - 8]);
    const y = linearScale([lo, hi], [this.height - 18, 8]);

    ctx.strokeStyle = "#999";
    ctx.lineWidth = 1;
    ctx.setLineDash([4, 3]);
    ctx.beginPath();
    for (let i = 0; i < d.omega.length; i++) {
      const px = x(Math.log10(d.omega[i]));
      const py = y(d.bound_db[i]);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    }
    ctx.stroke();

    ctx.setLineDash([]);
    ctx.strokeStyle = "#2a6f97";
    ctx.lineWidth = 2;
    ctx.beginPath();
    for (let i = 0; i < d.omega.length; i++) {
      const px = x(Math.log10(d.omega[i]));
      const py = y(d.value_db[i]);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    }
    ctx.stroke();

    ctx.fillStyle = "#333";
    ctx.font = "11px sans-serif";
    ctx.fillText(this.title, 44, 14);
  }
}
