import init, { enumerate, error_curve, theta_legendre } from "./pkg/repfib_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function guard(out, f) {
  try {
    f();
  } catch (e) {
    out.innerHTML = `<p class="err">${e.message ?? e}</p>`;
  }
}

function runEnumerate() {
  const out = $("enum-out");
  guard(out, () => {
    const sols = JSON.parse(enumerate(num("kmin"), num("kmax"), num("nmax")));
    const rows = sols
      .map((s) => {
        const d = s.decomposition;
        return `<tr><td>${s.k}</td><td>${s.n}</td><td>${s.value}</td><td>${d.d1}</td><td>${d.d2}</td><td>${d.ell}</td><td>${d.m}</td></tr>`;
      })
      .join("");
    out.innerHTML =
      `<p>${sols.length} solutions</p><table><tr><th>k</th><th>n</th><th>value</th>` +
      `<th>d1</th><th>d2</th><th>l</th><th>m</th></tr>${rows}</table>`;
  });
}

function runErrorCurve() {
  const text = $("err-out");
  const canvas = $("plot");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  guard(text, () => {
    const r = JSON.parse(error_curve(num("ek"), num("en")));
    const pts = r.points;
    const w = canvas.width, h = canvas.height, pad = 30;
    const x = (n) => pad + ((n - 1) / Math.max(1, pts.length - 1)) * (w - 2 * pad);
    const y = (v) => h / 2 - v * (h - 2 * pad);
    ctx.strokeStyle = "#bbb";
    for (const v of [-0.5, 0, 0.5]) {
      ctx.beginPath();
      ctx.moveTo(pad, y(v));
      ctx.lineTo(w - pad, y(v));
      ctx.stroke();
      ctx.fillStyle = "#666";
      ctx.fillText(String(v), 2, y(v) + 4);
    }
    ctx.strokeStyle = "#1565c0";
    ctx.fillStyle = "#1565c0";
    for (const p of pts) {
      ctx.beginPath();
      ctx.moveTo(x(p.n), y(p.lo));
      ctx.lineTo(x(p.n), y(p.hi));
      ctx.stroke();
      ctx.fillRect(x(p.n) - 1.5, y((p.lo + p.hi) / 2) - 1.5, 3, 3);
    }
    text.textContent =
      `alpha = ${r.alpha}\nf_k(alpha) = ${r.fk_alpha}\n` +
      `|e(n)| < 1/2 certified for every plotted n: ${r.all_below_half}`;
  });
}

function runCf() {
  const out = $("cf-out");
  guard(out, () => {
    const r = JSON.parse(theta_legendre($("bound").value));
    out.textContent =
      `M = ${r.M}\n` +
      `q_${r.n_index} <= M < q_${r.n_index + 1}\n` +
      `a_M = ${r.a_max} (first at index ${r.argmax}), factor a_M + 2 = ${r.factor}\n` +
      `certified at ${r.precision_bits} bits\n\n` +
      `[${r.quotients.join(", ")}]`;
  });
}

init()
  .then(() => {
    $("status").textContent = "Ready.";
    $("run-enum").onclick = runEnumerate;
    $("run-err").onclick = runErrorCurve;
    $("run-cf").onclick = runCf;
    runEnumerate();
    runErrorCurve();
  })
  .catch((e) => {
    $("status").innerHTML = `<span class="err">Failed to load: ${e}</span>`;
  });
