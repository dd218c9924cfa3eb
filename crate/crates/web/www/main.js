import init, { plan_grid, flop_curve, factor_demo } from "./pkg/bandchol_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function call(fn, ...args) {
  try {
    return { ok: JSON.parse(fn(...args)) };
  } catch (e) {
    return { err: String(e) };
  }
}

function showError(el, msg) {
  el.textContent = msg;
  el.className = "error";
}

function drawPlan() {
  const info = $("plan-info");
  const ctx = $("plan-canvas").getContext("2d");
  ctx.clearRect(0, 0, 480, 480);
  const res = call(plan_grid, num("plan-n"), num("plan-k"), num("plan-g"));
  if (res.err) return showError(info, res.err);
  const p = res.ok;
  info.className = "";
  info.textContent = `b = ${p.block_size}, n = ${p.grid_dim}, ${p.window_count} windows (first ${new Set(p.cells.map((c) => c.window)).size} drawn)`;

  const s = 480 / p.dim;
  ctx.fillStyle = "#eee";
  for (let j = 0; j < p.dim; j++) {
    ctx.fillRect(j * s, j * s, s, Math.min(p.bandwidth + 1, p.dim - j) * s);
  }
  for (const c of p.cells) {
    const hue = (c.window * 67) % 360;
    ctx.strokeStyle = `hsl(${hue} 70% 40%)`;
    ctx.fillStyle = `hsl(${hue} 70% 60% / ${c.window === 0 ? 0.45 : 0.12})`;
    const x = c.col0 * s, y = c.row0 * s, w = c.cols * s, h = c.rows * s;
    if (c.trapezoid) {
      // Only the upper triangle of this block is in the band.
      ctx.beginPath();
      ctx.moveTo(x, y);
      ctx.lineTo(x + w, y);
      ctx.lineTo(x + w, y + Math.min(h, w));
      ctx.closePath();
      ctx.fill();
      ctx.stroke();
    } else {
      ctx.fillRect(x, y, w, h);
      ctx.strokeRect(x, y, w, h);
    }
  }
}

function drawFlops() {
  const info = $("flop-info");
  const ctx = $("flop-canvas").getContext("2d");
  const W = 640, H = 320, pad = 40;
  ctx.clearRect(0, 0, W, H);
  const res = call(flop_curve, num("flop-n"), num("flop-k"), 50);
  if (res.err) return showError(info, res.err);
  const pts = res.ok;
  const maxK = pts[pts.length - 1].bandwidth || 1;
  const maxY = Math.max(...pts.map((q) => Math.max(q.exact, q.approx)));
  const px = (k) => pad + (k / maxK) * (W - 2 * pad);
  const py = (v) => H - pad - (v / maxY) * (H - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, W - 2 * pad, H - 2 * pad);
  for (const [key, color] of [["exact", "#1f77b4"], ["approx", "#d62728"]]) {
    ctx.strokeStyle = color;
    ctx.beginPath();
    pts.forEach((q, i) => (i ? ctx.lineTo : ctx.moveTo).call(ctx, px(q.bandwidth), py(q[key])));
    ctx.stroke();
    ctx.fillStyle = color;
    ctx.fillText(key, W - pad - 50, key === "exact" ? pad + 15 : pad + 30);
  }
  ctx.fillStyle = "#222";
  ctx.fillText("k", W - pad, H - pad + 15);
  ctx.fillText(maxY.toExponential(2), 2, pad);

  const last = pts[pts.length - 1];
  info.className = "";
  info.textContent = `at k = ${last.bandwidth}: exact ${last.exact.toExponential(4)}, approx ${last.approx.toExponential(4)}, relative error ${(100 * last.relative_error).toFixed(2)}%`;
}

function runFactor() {
  const out = $("fac-out");
  const t0 = performance.now();
  const res = call(factor_demo, num("fac-n"), num("fac-k"), num("fac-g"), num("fac-seed"));
  const ms = performance.now() - t0;
  if (res.err) return showError(out, res.err);
  const r = res.ok;
  out.className = "";
  out.textContent = [
    `N = ${r.dim}, k = ${r.bandwidth}, n = ${r.grid_dim}, ${r.windows} windows`,
    `tasks ${r.tasks}, edges ${r.edges}, critical path ${r.critical_path} tasks`,
    ...r.kinds.map(([kind, count]) => `  ${kind.padEnd(17)} ${count}`),
    `residual ${r.residual.toExponential(3)}`,
    `max |blocked - reference| ${r.max_deviation_from_reference.toExponential(3)}`,
    `${ms.toFixed(1)} ms including the reference factorization`,
  ].join("\n");
}

await init();
$("plan-go").onclick = drawPlan;
$("flop-go").onclick = drawFlops;
$("fac-go").onclick = runFactor;
drawPlan();
drawFlops();
runFactor();
