import init, { conditionalDraws, selectSupports, BasicExampleFit } from './pkg/gpdisc_demo.js';

const $ = (id) => document.getElementById(id);

function plotArea(canvas, xr, yr) {
  const ctx = canvas.getContext('2d');
  const pad = 30;
  const w = canvas.width - 2 * pad;
  const h = canvas.height - 2 * pad;
  const sx = (x) => pad + ((x - xr[0]) / (xr[1] - xr[0])) * w;
  const sy = (y) => pad + h - ((y - yr[0]) / (yr[1] - yr[0])) * h;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = '#999';
  ctx.strokeRect(pad, pad, w, h);
  ctx.fillStyle = '#666';
  ctx.font = '10px sans-serif';
  ctx.fillText(xr[0].toFixed(2), pad, canvas.height - 10);
  ctx.fillText(xr[1].toFixed(2), pad + w - 20, canvas.height - 10);
  ctx.fillText(yr[1].toFixed(2), 2, pad + 4);
  ctx.fillText(yr[0].toFixed(2), 2, pad + h);
  return {
    ctx,
    line(xs, ys, color, width = 1) {
      ctx.strokeStyle = color;
      ctx.lineWidth = width;
      ctx.beginPath();
      xs.forEach((x, i) => (i ? ctx.lineTo(sx(x), sy(ys[i])) : ctx.moveTo(sx(x), sy(ys[i]))));
      ctx.stroke();
      ctx.lineWidth = 1;
    },
    dots(xs, ys, color, r = 2) {
      ctx.fillStyle = color;
      xs.forEach((x, i) => {
        ctx.beginPath();
        ctx.arc(sx(x), sy(ys[i]), r, 0, 2 * Math.PI);
        ctx.fill();
      });
    },
    inverse(px, py) {
      return [xr[0] + ((px - pad) / w) * (xr[1] - xr[0]), yr[0] + ((pad + h - py) / h) * (yr[1] - yr[0])];
    },
  };
}

function bindLabel(input) {
  const span = input.parentElement.querySelector('span');
  const show = () => span && (span.textContent = input.value);
  input.addEventListener('input', show);
  show();
}

function showError(el, e) {
  el.textContent = String(e.message ?? e);
  el.classList.add('err');
}

// conditional draws
const cd = { x: [0.15, 0.5, 0.8], z: [0.8, -0.6, 0.3] };
const grid = Array.from({ length: 301 }, (_, i) => i / 300);

function drawConditional() {
  const canvas = $('cd-canvas');
  const p = plotArea(canvas, [0, 1], [-2.5, 2.5]);
  p.line([0, 1], [0, 0], '#ddd');
  if (cd.x.length > 0) {
    try {
      const n = Math.max(0, Math.min(30, Number($('cd-draws').value) | 0));
      const out = conditionalDraws(
        Float64Array.from(cd.x), Float64Array.from(cd.z), Number($('cd-noise').value), Float64Array.from(grid),
        Number($('cd-psi').value), Number($('cd-s2').value), n, 7,
      );
      for (let d = 1; d <= n; d++) p.line(grid, out.subarray(d * grid.length, (d + 1) * grid.length), 'rgba(60,110,200,0.45)');
      p.line(grid, out.subarray(0, grid.length), '#1a3f8f', 2.5);
    } catch (e) {
      p.ctx.fillStyle = '#b00';
      p.ctx.fillText(String(e.message ?? e), 40, 20);
    }
  }
  p.dots(cd.x, cd.z, '#c33', 4);
}

function setupConditional() {
  ['cd-psi', 'cd-s2', 'cd-noise'].forEach((id) => {
    bindLabel($(id));
    $(id).addEventListener('input', drawConditional);
  });
  $('cd-draws').addEventListener('change', drawConditional);
  const canvas = $('cd-canvas');
  canvas.addEventListener('click', (ev) => {
    const rect = canvas.getBoundingClientRect();
    const p = plotArea(canvas, [0, 1], [-2.5, 2.5]);
    const [x, z] = p.inverse(ev.clientX - rect.left, ev.clientY - rect.top);
    if (ev.shiftKey) {
      if (cd.x.length === 0) return;
      let best = 0;
      cd.x.forEach((v, i) => { if (Math.abs(v - x) < Math.abs(cd.x[best] - x)) best = i; });
      cd.x.splice(best, 1);
      cd.z.splice(best, 1);
    } else if (x >= 0 && x <= 1) {
      cd.x.push(x);
      cd.z.push(z);
    }
    drawConditional();
  });
  drawConditional();
}

// support selection on reproducible pseudo-random locations
function lcgPoints(n) {
  let s = 12345;
  const out = [];
  for (let i = 0; i < n; i++) {
    s = (s * 1103515245 + 12345) % 2147483648;
    out.push(s / 2147483648);
  }
  return out.sort((a, b) => a - b);
}

function drawSupports() {
  const n = Math.max(5, Math.min(2000, Number($('sp-n').value) | 0));
  const psi = Number($('sp-psi').value);
  const offset = Number($('sp-off').value) * 1.5 * psi;
  const xs = lcgPoints(n);
  const p = plotArea($('sp-canvas'), [0, 1], [-1, 1]);
  p.dots(xs, xs.map(() => 0), '#999', 2);
  try {
    const idx = Array.from(selectSupports(Float64Array.from(xs), psi, offset));
    p.dots(idx.map((i) => xs[i]), idx.map(() => 0), '#c33', 5);
    $('sp-out').textContent = `${idx.length} supports: ${idx.join(' ')}`;
    $('sp-out').classList.remove('err');
  } catch (e) {
    showError($('sp-out'), e);
  }
}

function setupSupports() {
  ['sp-psi', 'sp-off'].forEach((id) => {
    bindLabel($(id));
    $(id).addEventListener('input', drawSupports);
  });
  $('sp-n').addEventListener('change', drawSupports);
  drawSupports();
}

// basic example
function order(xs) {
  return xs.map((_, i) => i).sort((a, b) => xs[a] - xs[b]);
}

function plotStream(canvas, fit, k, title) {
  const x = Array.from(fit.locations(k));
  const obs = Array.from(fit.observations(k));
  const series = [
    [Array.from(fit.truth(k)), '#2a2'],
    [Array.from(fit.modelPrediction(k, false)), '#c33'],
    [Array.from(fit.modelPrediction(k, true)), '#36c'],
    [Array.from(fit.processPrediction(k)), '#36c'],
  ];
  const all = obs.concat(...series.map((s) => s[0]));
  const lo = Math.min(...all);
  const hi = Math.max(...all);
  const m = 0.05 * (hi - lo);
  const p = plotArea(canvas, [Math.min(...x), Math.max(...x)], [lo - m, hi + m]);
  p.dots(x, obs, k === 0 ? '#000' : 'rgba(0,0,0,0.25)', k === 0 ? 4 : 1.5);
  const ord = order(x);
  const ox = ord.map((i) => x[i]);
  series.forEach(([ys, color], j) => {
    const oy = ord.map((i) => ys[i]);
    if (j === 2) p.ctx.setLineDash([5, 4]);
    p.line(ox, oy, color, j === 3 ? 2 : 1.5);
    p.ctx.setLineDash([]);
  });
  const sup = Array.from(fit.supports(k));
  p.dots(sup.map((i) => x[i]), sup.map((i) => obs[i]), '#f90', 4);
  p.ctx.fillStyle = '#222';
  p.ctx.font = '12px sans-serif';
  p.ctx.fillText(title, 40, 20);
}

function runBasic() {
  const out = $('be-out');
  out.classList.remove('err');
  try {
    const fit = new BasicExampleFit(Number($('be-seed').value) >>> 0, Number($('be-n').value) | 0, $('be-var').checked);
    plotStream($('be-sparse'), fit, 0, 'sparse stream');
    plotStream($('be-rich'), fit, 1, 'rich stream');
    const f = (v) => Array.from(v).map((x) => x.toFixed(4)).join(', ');
    out.textContent =
      `truth (green): a = 1, b = 2\n` +
      `ignore fit (red):            (a, b) = (${f(fit.ignoreTheta())}), sparse RMS/sd = ${fit.rmsMisfit(0, false).toFixed(2)}\n` +
      `fixed-GP fit (blue dashed):  (a, b) = (${f(fit.gpTheta())}), sparse RMS/sd of model + discrepancy (blue) = ${fit.rmsMisfit(0, true).toFixed(2)}\n` +
      `orange: supporting locations`;
    fit.free();
  } catch (e) {
    showError(out, e);
  }
}

await init();
$('status').textContent = '';
setupConditional();
setupSupports();
$('be-run').addEventListener('click', runBasic);
runBasic();
