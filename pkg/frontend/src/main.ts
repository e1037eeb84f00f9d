// App wiring: load a problem file, render boundaries once, round-trip every
// controller edit through the service, and paint whatever comes back.
import { Client, ServiceError } from "./api.js";
import { BodeView } from "./bode.js";
import { NicholsView } from "./nichols.js";
import { describeSection, SECTION_DEFAULTS, sectionFields, updateSection } from "./sections.js";
import { initialState, LatestWins, SessionState, withoutSection, withSection } from "./state.js";
import { TraceView } from "./trace.js";
import { ControllerResponse, Section } from "./types.js";

const $ = (id: string) => document.getElementById(id)!;

const nichols = new NicholsView(760, 520);
const bode = new BodeView(760, 200);
const trace = new TraceView(760, 200);
const gate = new LatestWins<ControllerResponse>();

let state: SessionState = initialState();
let client = new Client("");

function ctx2d(id: string) {
  return ($(id) as HTMLCanvasElement).getContext("2d") as unknown as
    import("./nichols.js").DrawContext;
}

function paint(): void {
  nichols.draw(ctx2d("nichols"));
  bode.draw(ctx2d("bode"));
  trace.draw(ctx2d("trace"));
}

function renderVerdict(resp: ControllerResponse): void {
  const v = resp.verdict;
  const gm = resp.margins.gain_margin_db;
  const pm = resp.margins.phase_margin_deg;
  $("verdict").textContent =
    `${v.stable ? "stable" : "UNSTABLE"} | crossings ${v.net_crossings}` +
    ` (required ${v.required_crossings}) | GM ${gm === null ? "inf" : gm.toFixed(2)} dB` +
    ` | PM ${pm === null ? "inf" : pm.toFixed(1)} deg`;

  const rows = resp.validation.boundaries
    .map((b) => {
      const cls = b.passed ? "pass" : "fail";
      const over = b.passed || b.violation_db === null
        ? ""
        : ` (+${b.violation_db.toFixed(2)} dB)`;
      return `<tr class="${cls}"><td>#${b.index}</td><td>${b.label}</td>` +
        `<td>${b.omega_design.toFixed(3)}</td><td>${b.passed ? "pass" : "FAIL"}${over}</td></tr>`;
    })
    .join("");
  $("validation").innerHTML =
    `<table><tr><th>#</th><th>bound</th><th>omega</th><th>status</th></tr>${rows}</table>`;
}

function renderSections(): void {
  const list = $("sections");
  list.innerHTML = "";
  state.sections.forEach((s, i) => {
    const row = document.createElement("div");
    row.className = "section-row";
    const label = document.createElement("span");
    label.textContent = describeSection(s);
    row.appendChild(label);
    for (const f of sectionFields(s)) {
      const input = document.createElement("input");
      input.type = "number";
      input.step = "0.01";
      input.value = String(f.value);
      input.title = f.key;
      input.addEventListener("change", () => {
        state.sections[i] = updateSection(state.sections[i], f.key, Number(input.value));
        void recompute();
      });
      row.appendChild(input);
    }
    const del = document.createElement("button");
    del.textContent = "remove";
    del.addEventListener("click", () => {
      state = withoutSection(state, i);
      renderSections();
      void recompute();
    });
    row.appendChild(del);
    list.appendChild(row);
  });
}

async function recompute(): Promise<void> {
  if (!state.problemId) return;
  $("status").textContent = "computing...";
  try {
    const resp = await gate.run(() => client.controller(state.problemId!, state.sections));
    if (resp === null) return; // superseded by a newer edit
    state.lastResponse = resp;
    nichols.setCurve(resp.l0_curve, resp.markers);
    const sens = resp.sensitivity.tracking ?? resp.sensitivity.sampled;
    if (sens) {
      bode.setData(sens, resp.sensitivity.tracking ? "tracking error vs bound (dB)"
        : "sampled sensitivity vs bound (dB)");
    }
    renderVerdict(resp);
    paint();
    $("status").textContent = "ready";
  } catch (err) {
    $("status").textContent =
      err instanceof ServiceError ? `service error ${err.status}: ${err.message}` : String(err);
  }
}

async function loadProblem(text: string): Promise<void> {
  client = new Client(($("base-url") as HTMLInputElement).value.replace(/\/$/, ""));
  const problem = JSON.parse(text);
  const id = await client.postProblem(problem);
  state = { ...initialState(), problemId: id };
  nichols.setBoundaries(await client.boundaries(id));
  renderSections();
  await recompute();
}

function wire(): void {
  ($("problem-file") as HTMLInputElement).addEventListener("change", async (ev) => {
    const input = ev.target as HTMLInputElement;
    if (!input.files || input.files.length === 0) return;
    try {
      await loadProblem(await input.files[0].text());
    } catch (err) {
      $("status").textContent = String(err);
    }
  });

  ($("add-section") as HTMLSelectElement).addEventListener("change", (ev) => {
    const sel = ev.target as HTMLSelectElement;
    if (!sel.value) return;
    const proto = SECTION_DEFAULTS[sel.value];
    state = withSection(state, JSON.parse(JSON.stringify(proto)) as Section);
    sel.value = "";
    renderSections();
    void recompute();
  });

  async function runSimulation(reference: unknown): Promise<void> {
    if (!state.problemId) return;
    const tEnd = Number(($("t-end") as HTMLInputElement).value);
    try {
      const resp = await client.simulate(state.problemId, state.sections, tEnd, reference);
      trace.setData(resp.trace);
      paint();
    } catch (err) {
      $("status").textContent = String(err);
    }
  }

  $("simulate-step").addEventListener("click", () =>
    runSimulation({ kind: "step", amplitude: 1.0 }));

  $("simulate-sin").addEventListener("click", () => {
    const w0 = Number(($("sin-freq") as HTMLInputElement).value);
    // cosine phase so a fundamental at the slow Nyquist rate still excites
    void runSimulation({ kind: "sinusoid", amplitude: 1.0, frequency: w0, phase: Math.PI / 2 });
  });

  paint();
}

wire();
