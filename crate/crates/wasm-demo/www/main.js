import init, { phaseErrorMap, aoRun, couplingCurve } from "./pkg/holoxl_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function guard(out, f) {
  try {
    out.classList.remove("error");
    f();
  } catch (e) {
    out.classList.add("error");
    out.textContent = String(e.message ?? e);
  }
}

// Polyline plot; series is a list of [xs, ys, color].
function plot(canvas, series, { logY = false } = {}) {
  const g = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 36;
  g.clearRect(0, 0, w, h);
  const tf = (v) => (logY ? Math.log10(Math.max(v, 1e-12)) : v);
  const xs = series.flatMap((s) => s[0]);
  const ys = series.flatMap((s) => s[1].map(tf));
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y1 - y0 < 1e-9) { y0 -= 0.5; y1 += 0.5; }
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const py = (y) => h - pad - ((tf(y) - y0) / (y1 - y0)) * (h - 2 * pad);
  g.strokeStyle = "#999";
  g.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  g.fillStyle = "#444";
  g.fillText((logY ? "1e" : "") + y1.toFixed(logY ? 1 : 3), 2, pad);
  g.fillText((logY ? "1e" : "") + y0.toFixed(logY ? 1 : 3), 2, h - pad);
  g.fillText(x0.toPrecision(3), pad, h - pad + 14);
  g.fillText(x1.toPrecision(3), w - pad - 24, h - pad + 14);
  for (const [sx, sy, color] of series) {
    g.strokeStyle = color;
    g.beginPath();
    sx.forEach((x, i) => (i ? g.lineTo(px(x), py(sy[i])) : g.moveTo(px(x), py(sy[i]))));
    g.stroke();
  }
}

function drawPhase() {
  guard($("phase-out"), () => {
    const m = JSON.parse(phaseErrorMap(num("phase-a"), num("phase-fc"), 60, 25));
    const c = $("phase-canvas"), g = c.getContext("2d");
    const cw = c.width / m.ranges.length, ch = c.height / m.angles_deg.length;
    m.error.forEach((row, a) =>
      row.forEach((e, r) => {
        // Full scale at π.
        const t = Math.min(e / Math.PI, 1);
        g.fillStyle = `rgb(${Math.round(255 * t)}, ${Math.round(80 * (1 - t))}, ${Math.round(255 * (1 - t))})`;
        g.fillRect(r * cw, a * ch, cw + 1, ch + 1);
      }));
    const edge = m.ranges.findIndex((r) => r >= 1);
    g.strokeStyle = "#fff";
    g.beginPath(); g.moveTo(edge * cw, 0); g.lineTo(edge * cw, c.height); g.stroke();
    $("phase-out").textContent =
      `d_F = ${m.fraunhofer_m.toFixed(3)} m; ranges ${m.ranges[0].toFixed(2)} to ${m.ranges.at(-1).toFixed(0)} d_F ` +
      `(white line at d_F), angles ${m.angles_deg[0]} to ${m.angles_deg.at(-1)} deg top to bottom`;
  });
}

function runAo() {
  const out = $("ao-out");
  out.textContent = "running...";
  // Let the status paint before the solver blocks the thread.
  setTimeout(() => guard(out, () => {
    const t = performance.now();
    const r = JSON.parse(aoRun($("ao-set").value, num("ao-a"), num("ao-p"), num("ao-b"), num("ao-seed")));
    plot($("ao-trace"), [[r.rate_trace.map((_, i) => i), r.rate_trace, "#1565c0"]]);
    const c = $("ao-weights"), g = c.getContext("2d");
    g.clearRect(0, 0, c.width, c.height);
    const xs = r.positions.map((p) => p[0]), ys = r.positions.map((p) => p[1]);
    const sx = (c.width - 40) / (Math.max(...xs) - Math.min(...xs) || 1);
    const sy = (c.height - 40) / (Math.max(...ys) - Math.min(...ys) || 1);
    const top = Math.max(...r.weight_abs) || 1;
    r.positions.forEach(([x, y], i) => {
      const hue = ((r.weight_arg[i] + Math.PI) / (2 * Math.PI)) * 360;
      g.fillStyle = `hsl(${hue}, 70%, ${20 + 50 * (r.weight_abs[i] / top)}%)`;
      g.fillRect(20 + (x - Math.min(...xs)) * sx - 5, 20 + (y - Math.min(...ys)) * sy - 3, 10, 6);
    });
    out.textContent =
      `${r.set}: ${r.num_microstrips} microstrips x ${r.elements_per_strip} elements, ` +
      `${r.rate_trace.length - 1} iterations${r.converged ? "" : " (cap reached)"}\n` +
      `wideband design ${r.rate.toFixed(3)} bit/s/Hz, narrowband design ${r.narrowband_rate.toFixed(3)}, ` +
      `fully digital UPA ${r.fully_digital_rate.toFixed(3)}\n` +
      `right: weights on the array, hue = phase, lightness = magnitude; ${(performance.now() - t).toFixed(0)} ms`;
  }), 10);
}

function drawCoupling() {
  guard($("cp-out"), () => {
    const c = JSON.parse(couplingCurve(0.1, num("cp-max"), 120));
    plot($("cp-canvas"), [
      [c.spacing, c.metamaterial, "#2e7d32"],
      [c.spacing, c.half_wave, "#c62828"],
    ], { logY: true });
  });
}

await init();
$("phase-go").onclick = drawPhase;
$("ao-go").onclick = runAo;
$("cp-go").onclick = drawCoupling;
drawPhase();
drawCoupling();
