import init, { demoFit, robustnessCurve } from "./pkg/ddgroup_web.js";

const $ = (id) => document.getElementById(id);
const status = (msg) => ($("status").textContent = msg);

let fit = null;
let shown = 0;

// data lives in [-1, 1]^2; leave a margin around it
function toCanvas(canvas, x, y) {
  const pad = 20;
  const s = (canvas.width - 2 * pad) / 2;
  return [pad + (x + 1) * s, canvas.height - pad - (y + 1) * s];
}

function strokeRect(ctx, canvas, [x0, x1, y0, y1]) {
  const [ax, ay] = toCanvas(canvas, x0, y1);
  const [bx, by] = toCanvas(canvas, x1, y0);
  ctx.strokeRect(ax, ay, bx - ax, by - ay);
}

function drawScatter() {
  const canvas = $("scatter");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!fit) return;

  for (const p of fit.points) {
    ctx.fillStyle = p.in_core ? "#27c" : p.rejected ? "#d33" : "#bbb";
    const [cx, cy] = toCanvas(canvas, p.x, p.y);
    ctx.fillRect(cx - 1.5, cy - 1.5, 3, 3);
  }

  ctx.setLineDash([6, 4]);
  ctx.strokeStyle = "#000";
  ctx.lineWidth = 1.5;
  strokeRect(ctx, canvas, fit.truth);
  ctx.setLineDash([]);

  const box = shown === 0 ? [-1, 1, -1, 1] : fit.steps[shown - 1].region;
  ctx.strokeStyle = "#2a2";
  ctx.lineWidth = 2.5;
  strokeRect(ctx, canvas, box);

  if (shown > 0) {
    const step = fit.steps[shown - 1];
    const p = fit.points[step.support];
    const [cx, cy] = toCanvas(canvas, p.x, p.y);
    ctx.strokeStyle = "#000";
    ctx.beginPath();
    ctx.arc(cx, cy, 6, 0, 2 * Math.PI);
    ctx.stroke();
    $("step").textContent = `face ${shown}/${fit.steps.length}: ${step.face} fixed at ${step.value.toFixed(3)}`;
  } else {
    $("step").textContent = `${fit.steps.length} faces to fix`;
  }
}

function drawCurve(points) {
  const canvas = $("curve");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const pad = 36;
  const maxOff = points[points.length - 1].offset;
  const px = (o) => pad + (o / maxOff) * (canvas.width - 2 * pad);
  const py = (v) => canvas.height - pad - v * (canvas.height - 2 * pad);

  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, canvas.width - 2 * pad, canvas.height - 2 * pad);
  ctx.fillStyle = "#222";
  ctx.fillText("offset of core center", canvas.width / 2 - 50, canvas.height - 8);
  ctx.fillText("1", pad - 14, py(1) + 4);
  ctx.fillText("0", pad - 14, py(0) + 4);

  const series = [
    ["f1", "#2a2"],
    ["precision", "#27c"],
    ["recall", "#d33"],
  ];
  series.forEach(([key, color], i) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    points.forEach((p, j) => {
      const f = j === 0 ? "moveTo" : "lineTo";
      ctx[f](px(p.offset), py(p[key].mean));
    });
    ctx.stroke();
    for (const p of points) {
      const x = px(p.offset);
      ctx.beginPath();
      ctx.moveTo(x, py(p[key].mean - p[key].sem));
      ctx.lineTo(x, py(p[key].mean + p[key].sem));
      ctx.stroke();
    }
    ctx.fillStyle = color;
    ctx.fillText(key, canvas.width - pad - 60, pad + 14 + 14 * i);
  });
}

function timed(label, f) {
  status(`${label}...`);
  // let the status paint before the synchronous wasm call
  setTimeout(() => {
    const t0 = performance.now();
    try {
      const msg = f();
      const ms = (performance.now() - t0).toFixed(0);
      status(msg ? `${msg} (${ms} ms)` : `${label} took ${ms} ms`);
    } catch (e) {
      status(`error: ${e.message ?? e}`);
    }
  }, 10);
}

function runFit() {
  timed("fitting", () => {
    fit = JSON.parse(
      demoFit(+$("n").value, BigInt($("seed").value), +$("delta").value, $("bbox").checked),
    );
    shown = fit.steps.length;
    drawScatter();
    const s = fit.score;
    return `precision ${s.precision.toFixed(3)}, recall ${s.recall.toFixed(3)}, F1 ${s.f1.toFixed(3)}`;
  });
}

await init();
$("fit").onclick = runFit;
$("prev").onclick = () => { if (fit && shown > 0) { shown--; drawScatter(); } };
$("next").onclick = () => { if (fit && shown < fit.steps.length) { shown++; drawScatter(); } };
$("all").onclick = () => { if (fit) { shown = fit.steps.length; drawScatter(); } };
$("robust").onclick = () =>
  timed("robustness sweep", () => {
    drawCurve(JSON.parse(robustnessCurve(1000, +$("trials").value, BigInt($("seed").value))));
  });
runFit();
