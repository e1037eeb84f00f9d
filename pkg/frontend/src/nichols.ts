// Nichols-plane rendering: specification boundaries, the nominal open-loop
// curve, and design-frequency markers.
//
// The renderer never transforms payload values: `data` holds the exact
// arrays received from the service (snapshot-tested against the payload),
// and scaling to pixels happens only inside draw().
import { linearScale, Scale, wrapPhase } from "./scales.js";
import { BoundaryJson, CurveJson, MarkerJson } from "./types.js";

export interface NicholsData {
  boundaries: BoundaryJson[];
  curve: CurveJson | null;
  markers: MarkerJson[];
}

export interface DrawContext {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fill(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fillText(text: string, x: number, y: number): void;
  strokeStyle: string;
  fillStyle: string;
  lineWidth: number;
  font: string;
  setLineDash(segments: number[]): void;
}

const BOUNDARY_COLORS: Record<string, string> = {
  stability: "#b5452a",
  dtrack: "#886a1d",
  ctrack: "#2a6f97",
  worst: "#5f2a97",
};

export class NicholsView {
  data: NicholsData = { boundaries: [], curve: null, markers: [] };
  phaseRange: [number, number] = [-360, 0];
  gainRange: [number, number] = [-60, 60];

  constructor(
    private width: number,
    private height: number,
  ) {}

  setBoundaries(boundaries: BoundaryJson[]): void {
    this.data = { ...this.data, boundaries };
  }

  setCurve(curve: CurveJson, markers: MarkerJson[]): void {
    this.data = { ...this.data, curve, markers };
  }

  scales(): { x: Scale; y: Scale } {
    return {
      x: linearScale(this.phaseRange, [40, this.width - 8]),
      y: linearScale(this.gainRange, [this.height - 24, 8]),
    };
  }

  /** Forbidden-gain segments per phase column of one boundary. */
  forbiddenSegments(b: BoundaryJson): Array<{ phase: number; lo: number; hi: number }> {
    const [gLo, gHi] = this.gainRange;
    const out: Array<{ phase: number; lo: number; hi: number }> = [];
    for (let i = 0; i < b.phases.length; i++) {
      const allowed = b.allowed[i];
      let cursor = gLo;
      for (const [lo, hi] of allowed) {
        if (lo > cursor) out.push({ phase: b.phases[i], lo: cursor, hi: Math.min(lo, gHi) });
        cursor = Math.max(cursor, hi);
      }
      if (cursor < gHi) out.push({ phase: b.phases[i], lo: cursor, hi: gHi });
    }
    return out;
  }

  draw(ctx: DrawContext): void {
    const { x, y } = this.scales();
    ctx.clearRect(0, 0, this.width, this.height);

    // grid
    ctx.strokeStyle = "#ddd";
    ctx.lineWidth = 1;
    ctx.setLineDash([]);
    for (let p = this.phaseRange[0]; p <= this.phaseRange[1]; p += 45) {
      ctx.beginPath();
      ctx.moveTo(x(p), y(this.gainRange[0]));
      ctx.lineTo(x(p), y(this.gainRange[1]));
      ctx.stroke();
    }
    for (let g = this.gainRange[0]; g <= this.gainRange[1]; g += 20) {
      ctx.beginPath();
      ctx.moveTo(x(this.phaseRange[0]), y(g));
      ctx.lineTo(x(this.phaseRange[1]), y(g));
      ctx.stroke();
    }
    // critical point
    ctx.fillStyle = "#000";
    ctx.beginPath();
    ctx.arc(x(-180), y(0), 4, 0, 2 * Math.PI);
    ctx.fill();

    // boundaries as vertical forbidden strokes
    for (const b of this.data.boundaries) {
      ctx.strokeStyle = BOUNDARY_COLORS[b.kind] ?? "#777";
      ctx.lineWidth = 1;
      for (const seg of this.forbiddenSegments(b)) {
        ctx.beginPath();
        ctx.moveTo(x(seg.phase), y(seg.lo));
        ctx.lineTo(x(seg.phase), y(seg.hi));
        ctx.stroke();
      }
    }

    // open-loop curve
    const curve = this.data.curve;
    if (curve) {
      ctx.strokeStyle = "#111";
      ctx.lineWidth = 2;
      ctx.beginPath();
      let pen = false;
      for (let i = 0; i < curve.phase_deg.length; i++) {
        const px = x(wrapPhase(curve.phase_deg[i]));
        const py = y(curve.gain_db[i]);
        const prev = i > 0 ? wrapPhase(curve.phase_deg[i - 1]) : null;
        const jump = prev !== null && Math.abs(wrapPhase(curve.phase_deg[i]) - prev) > 180;
        if (!pen || jump) {
          ctx.moveTo(px, py);
          pen = true;
        } else {
          ctx.lineTo(px, py);
        }
      }
      ctx.stroke();
    }

    // design-frequency markers
    ctx.fillStyle = "#c21807";
    ctx.font = "10px sans-serif";
    for (const m of this.data.markers) {
      if (m.gain_db === null) continue;
      const px = x(wrapPhase(m.phase_deg));
      const py = y(m.gain_db);
      ctx.beginPath();
      ctx.arc(px, py, 3, 0, 2 * Math.PI);
      ctx.fill();
      ctx.fillText(m.label, px + 4, py - 4);
    }
  }
}
