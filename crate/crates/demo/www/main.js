import init, { h_u_curve, landscape_1d, trajectory_2d, objective_grid_2d } from "./pkg/lpirl_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function call(fn, ...args) {
  const v = JSON.parse(fn(...args));
  if (v.error) throw new Error(v.error);
  return v;
}

// Maps data coordinates to canvas pixels with a small margin.
function frame(ctx, xs, ys) {
  const w = ctx.canvas.width, h = ctx.canvas.height, m = 20;
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y1 - y0 < 1e-12) y1 = y0 + 1;
  ctx.clearRect(0, 0, w, h);
  return {
    x: (v) => m + (v - x0) / (x1 - x0) * (w - 2 * m),
    y: (v) => h - m - (v - y0) / (y1 - y0) * (h - 2 * m),
  };
}

function line(ctx, f, xs, ys, color, dash = []) {
  ctx.strokeStyle = color;
  ctx.setLineDash(dash);
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(f.x(x), f.y(ys[i])) : ctx.moveTo(f.x(x), f.y(ys[i]))));
  ctx.stroke();
  ctx.setLineDash([]);
}

function drawCurve() {
  const p = num("c-p"), knee = Math.pow(10, num("c-k"));
  $("c-p-v").textContent = p.toFixed(2);
  $("c-k-v").textContent = knee.toPrecision(3);
  const ctx = $("curve").getContext("2d");
  try {
    const c = call(h_u_curve, p, knee, 3 * knee + 1, 600);
    const f = frame(ctx, c.t, c.abs_p.concat(c.h));
    line(ctx, f, c.t, c.abs_p, "#999", [4, 4]);
    line(ctx, f, c.t, c.h, "#c33");
    $("c-out").textContent = `knee |t| = ${c.knee.toPrecision(4)}, max h_u - |t|^p <= ${c.gap_bound.toPrecision(4)}`;
  } catch (e) {
    $("c-out").textContent = e.message;
  }
}

function drawLandscape() {
  const ctx = $("land").getContext("2d");
  try {
    const a = num("l-a"), b = num("l-b");
    const r = 1.5 * Math.max(1, Math.abs(b / (a || 1)));
    const l = call(landscape_1d, a, b, num("l-lam"), num("l-p"), num("l-eps"), r, 800);
    const f = frame(ctx, l.t, l.f.concat(l.f_eps));
    line(ctx, f, l.t, l.f, "#333");
    line(ctx, f, l.t, l.f_eps, "#c33", [5, 3]);
    ctx.fillStyle = "#36c";
    for (const s of l.stationary) {
      const i = l.t.reduce((best, t, j) => (Math.abs(t - s) < Math.abs(l.t[best] - s) ? j : best), 0);
      ctx.beginPath();
      ctx.arc(f.x(s), f.y(l.f[i]), 4, 0, 2 * Math.PI);
      ctx.fill();
    }
    ctx.strokeStyle = "#3a3";
    for (const v of [l.lower_bound_second, -l.lower_bound_second]) {
      ctx.beginPath();
      ctx.moveTo(f.x(v), 0);
      ctx.lineTo(f.x(v), ctx.canvas.height);
      ctx.stroke();
    }
    $("l-out").textContent =
      `stationary points: ${l.stationary.map((s) => s.toPrecision(6)).join(", ")}\n` +
      `first-order bound (start at 0): ${l.lower_bound_first?.toPrecision(4)}, second-order bound (green): ${l.lower_bound_second.toPrecision(4)}`;
  } catch (e) {
    $("l-out").textContent = e.message;
  }
}

const A = [1.0, 0.4, 0.2, 0.8], B = [1.0, -0.5], R = 2.0;
let start = [0.5, -0.5];

function drawPlane() {
  const cv = $("plane"), ctx = cv.getContext("2d");
  const cells = 100, lam = num("t-lam"), p = num("t-p");
  try {
    const g = call(objective_grid_2d, ...A, ...B, lam, p, R, cells);
    const flat = g.flat(), lo = Math.min(...flat), hi = Math.max(...flat);
    const w = cv.width / cells;
    g.forEach((row, j) => row.forEach((v, i) => {
      const s = Math.pow((v - lo) / (hi - lo), 0.35);
      ctx.fillStyle = `hsl(${220 - 200 * s}, 60%, ${30 + 50 * s}%)`;
      ctx.fillRect(i * w, cv.height - (j + 1) * w, w + 1, w + 1);
    }));
    const px = (x) => (x + R) / (2 * R) * cv.width, py = (y) => cv.height - (y + R) / (2 * R) * cv.height;
    const t = call(trajectory_2d, ...A, ...B, lam, p, $("t-m").value, parseInt($("t-a").value), ...start);
    ctx.strokeStyle = "#fff";
    ctx.beginPath();
    t.path.forEach(([x, y], i) => (i ? ctx.lineTo(px(x), py(y)) : ctx.moveTo(px(x), py(y))));
    ctx.stroke();
    ctx.fillStyle = "#fff";
    for (const [x, y] of t.path) ctx.fillRect(px(x) - 2, py(y) - 2, 4, 4);
    $("t-out").textContent =
      `${t.method}: ${t.status} after ${t.path.length - 1} steps, residual ${t.residual.toExponential(2)}\n` +
      `x = (${t.final_x.map((v) => v.toPrecision(6)).join(", ")}), F = ${t.objective.at(-1).toPrecision(6)}`;
  } catch (e) {
    $("t-out").textContent = e.message;
  }
}

await init();
for (const id of ["c-p", "c-k"]) $(id).addEventListener("input", drawCurve);
for (const id of ["l-a", "l-b", "l-lam", "l-p", "l-eps"]) $(id).addEventListener("change", drawLandscape);
for (const id of ["t-m", "t-a", "t-lam", "t-p"]) $(id).addEventListener("change", drawPlane);
$("plane").addEventListener("click", (ev) => {
  const r = ev.target.getBoundingClientRect();
  start = [((ev.clientX - r.left) / r.width) * 2 * R - R, R - ((ev.clientY - r.top) / r.height) * 2 * R];
  drawPlane();
});
drawCurve();
drawLandscape();
drawPlane();
