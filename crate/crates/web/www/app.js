import init, { run_2d, threshold_trace, rule_points } from "./pkg/pagani_web.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => Number(x).toPrecision(6);

function table(el, header, rows) {
  el.innerHTML = "<tr>" + header.map((h) => `<th>${h}</th>`).join("") + "</tr>" +
    rows.map((r) => "<tr>" + r.map((c) => `<td>${c}</td>`).join("") + "</tr>").join("");
}

function fail(el, err) {
  el.innerHTML = `<span class="error">${err}</span>`;
}

let lastRun = null;

function drawRun() {
  const run = lastRun;
  const canvas = $("run-canvas");
  const ctx = canvas.getContext("2d");
  const s = canvas.width;
  ctx.clearRect(0, 0, s, s);
  const upTo = Number($("run-slider").value);
  const last = run.iterations;
  for (const [x, y, w, h, it] of run.finished) {
    if (it > upTo) continue;
    const shade = Math.round(235 - 170 * (it - 1) / Math.max(1, last - 1));
    ctx.fillStyle = `rgb(${shade}, ${shade}, 255)`;
    ctx.fillRect(x * s, (1 - y - h) * s, w * s, h * s);
    ctx.strokeStyle = "rgba(0,0,0,0.25)";
    ctx.strokeRect(x * s, (1 - y - h) * s, w * s, h * s);
  }
  if (upTo >= last) {
    ctx.strokeStyle = "#d22";
    for (const [x, y, w, h] of run.active) ctx.strokeRect(x * s, (1 - y - h) * s, w * s, h * s);
  }
}

$("run-form").addEventListener("submit", (ev) => {
  ev.preventDefault();
  try {
    lastRun = JSON.parse(run_2d($("run-id").value, Number($("run-tau").value),
      Number($("run-init").value), Number($("run-itmax").value)));
  } catch (e) {
    fail($("run-summary"), e);
    return;
  }
  const r = lastRun;
  $("run-summary").textContent =
    `${r.integrand}: ${r.status} after ${r.iterations} iterations, estimate ${fmt(r.estimate)} ± ${fmt(r.errorest)} ` +
    `(reference ${fmt(r.reference)}), ${r.regions_generated} regions generated` + (r.truncated ? " — drawing truncated" : "");
  $("run-slider").max = r.iterations;
  $("run-slider").value = r.iterations;
  table($("run-history"), ["it", "regions", "kept", "estimate", "error", "threshold"],
    r.history.map((h) => [h.iteration, h.regions, h.active_after, fmt(h.estimate), fmt(h.errorest),
      h.threshold ? (h.threshold.success ? `ok (${h.threshold.probes} probes)` : "failed") : ""]));
  drawRun();
});
$("run-slider").addEventListener("input", () => lastRun && drawRun());

$("trace-form").addEventListener("submit", (ev) => {
  ev.preventDefault();
  let t;
  try {
    t = JSON.parse(threshold_trace($("trace-errors").value, Number($("trace-v").value), Number($("trace-tau").value)));
  } catch (e) {
    fail($("trace-summary"), e);
    return;
  }
  const kept = t.flags.filter((f) => f).length;
  $("trace-summary").textContent = (t.success ? "Success" : `Failed (${t.failure})`) +
    `: error budget ${fmt(t.error_budget)}, ${kept} of ${t.flags.length} regions kept active.`;
  table($("trace-table"), ["probe", "t", "P_max", "finished", "finished error"],
    t.probes.map((p, i) => [i + 1, fmt(p.t), p.p_max.toFixed(2), p.finished_count, fmt(p.finished_error)]));
});

let rule = null;

function drawRule() {
  const canvas = $("rule-canvas");
  const ctx = canvas.getContext("2d");
  const s = canvas.width;
  const pad = 20;
  ctx.clearRect(0, 0, s, s);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, s - 2 * pad, s - 2 * pad);
  const w = rule.weights[Number($("rule-set").value)];
  const scale = Math.max(...w.map(Math.abs));
  rule.points.forEach(([x, y], k) => {
    const r = 2 + 14 * Math.sqrt(Math.abs(w[k]) / scale);
    ctx.fillStyle = w[k] < 0 ? "rgba(210,30,30,0.7)" : "rgba(30,80,210,0.7)";
    ctx.beginPath();
    ctx.arc(pad + x * (s - 2 * pad), s - pad - y * (s - 2 * pad), r, 0, 2 * Math.PI);
    ctx.fill();
  });
}

$("rule-set").addEventListener("change", drawRule);

await init();
rule = JSON.parse(rule_points(2));
drawRule();
