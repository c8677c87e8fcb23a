import init, { trace, angenent_torus, family } from "./pkg/shrinker_wasm.js";

const canvas = document.getElementById("plot");
const ctx = canvas.getContext("2d");
const info = document.getElementById("info");
const colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function draw(reference, curves) {
  const all = curves.flat();
  let xmax = reference.sphere_radius * 1.15;
  let rmax = reference.sphere_radius * 1.15;
  for (const [x, r] of all) {
    xmax = Math.max(xmax, Math.abs(x));
    rmax = Math.max(rmax, r);
  }
  xmax = Math.min(xmax, 12);
  rmax = Math.min(rmax, 12);
  const pad = 30;
  const scale = Math.min((canvas.width - 2 * pad) / (2 * xmax), (canvas.height - 2 * pad) / rmax);
  const px = (x) => canvas.width / 2 + x * scale;
  const py = (r) => canvas.height - pad - r * scale;

  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#999";
  ctx.lineWidth = 1;
  ctx.setLineDash([]);
  ctx.beginPath();
  ctx.moveTo(0, py(0));
  ctx.lineTo(canvas.width, py(0));
  ctx.moveTo(px(0), py(0));
  ctx.lineTo(px(0), 0);
  ctx.stroke();

  ctx.setLineDash([5, 4]);
  ctx.beginPath();
  ctx.arc(px(0), py(0), reference.sphere_radius * scale, Math.PI, 2 * Math.PI);
  ctx.moveTo(0, py(reference.cylinder_radius));
  ctx.lineTo(canvas.width, py(reference.cylinder_radius));
  ctx.stroke();
  ctx.setLineDash([]);

  ctx.lineWidth = 1.5;
  curves.forEach((pts, i) => {
    ctx.strokeStyle = colors[i % colors.length];
    ctx.beginPath();
    pts.forEach(([x, r], j) => (j ? ctx.lineTo(px(x), py(r)) : ctx.moveTo(px(x), py(r))));
    ctx.stroke();
  });
}

function run(fn) {
  info.textContent = "working…";
  // let the status paint before the computation blocks the page
  setTimeout(() => {
    try {
      fn();
    } catch (e) {
      info.textContent = "error: " + (e.message ?? e);
    }
  }, 10);
}

$("trace").onclick = () =>
  run(() => {
    const out = JSON.parse(trace(num("n"), num("x0"), num("r0"), num("a0"), num("vt")));
    draw(out.reference, out.branches.map((b) => b.points));
    info.textContent = out.branches
      .map((b, i) => {
        const segs = b.segments.map((s) => `  Λ[${s.index}] type ${s.type_tag}${s.half_entire ? " " + s.half_entire : ""}`);
        return `branch ${i + 1}: ${b.points.length} samples, ends by ${b.termination}\n${segs.join("\n")}`;
      })
      .join("\n");
  });

$("torus").onclick = () =>
  run(() => {
    const out = JSON.parse(angenent_torus(num("n")));
    draw(out.reference, [out.points]);
    info.textContent =
      `r_Ang = ${out.r_ang}\nclosure defect = ${out.defect.toExponential(2)}\n` +
      `Gauss-Bonnet integral = ${out.gauss_bonnet} (2π = ${2 * Math.PI})`;
  });

$("family").onclick = () =>
  run(() => {
    const out = JSON.parse(family(num("n"), $("near").value, num("count")));
    draw(out.reference, out.members.map((m) => m.points));
    const rows = out.members.map((m) => `k = ${m.k}: t = ${m.t.toFixed(12)}, ${m.topology}, ${m.segments} segments`);
    info.textContent = rows.concat(out.diagnostics.map((d) => "warning: " + d)).join("\n");
  });

await init();
$("trace").click();
