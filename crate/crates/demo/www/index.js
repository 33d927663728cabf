import init, { surprisalAttention, tfidfAttention, trainTagAttention } from "./pkg/attnsent_demo.js";

const $ = (id) => document.getElementById(id);

function clear(el) {
  while (el.firstChild) el.removeChild(el.firstChild);
}

function fail(el, e) {
  clear(el);
  const p = document.createElement("p");
  p.className = "err";
  p.textContent = e.message ?? String(e);
  el.appendChild(p);
}

// darker cell = more attention; scaled to the largest weight in the sentence
function showTokens(el, tokens) {
  clear(el);
  const max = Math.max(...tokens.map((t) => t.weight));
  for (const t of tokens) {
    const cell = document.createElement("span");
    cell.className = "tok";
    const a = (0.1 + 0.8 * t.weight / max).toFixed(2);
    cell.style.background = `rgba(58, 123, 213, ${a})`;
    cell.textContent = t.word;
    const small = document.createElement("small");
    small.textContent = `${t.weight.toFixed(3)} (${t.score.toFixed(2)})`;
    cell.appendChild(small);
    cell.title = `${t.tag}: score ${t.score}`;
    el.appendChild(cell);
  }
}

function showProfile(el, rows) {
  clear(el);
  const max = Math.max(...rows.map((r) => r.mean_attention));
  for (const r of rows) {
    const row = document.createElement("div");
    row.className = "bar";
    const label = document.createElement("span");
    label.textContent = r.tag;
    const bar = document.createElement("div");
    bar.style.width = `${(20 * r.mean_attention / max).toFixed(2)}rem`;
    const value = document.createElement("span");
    value.textContent = `${r.mean_attention.toFixed(3)} over ${r.count} tokens`;
    row.append(label, bar, value);
    el.appendChild(row);
  }
}

function runWeights(fn) {
  try {
    const r = JSON.parse(fn());
    showTokens($("weights"), r.tokens);
  } catch (e) {
    fail($("weights"), e);
  }
}

function train() {
  $("summary").textContent = "training…";
  // yield so the status text paints before the synchronous run
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const r = JSON.parse(trainTagAttention(+$("docs").value, +$("epochs").value, +$("seed").value));
      const ms = Math.round(performance.now() - t0);
      $("summary").textContent =
        `${r.sentences} sentences, ${ms} ms. Held-out Pearson: uniform ${r.pearson_uniform.toFixed(3)}, ` +
        `POS attention ${r.pearson_pos.toFixed(3)}. Loss per epoch: ${r.losses.map((l) => l.toFixed(3)).join(", ")}`;
      showProfile($("profile"), r.profile);
      showTokens($("example"), r.example);
    } catch (e) {
      fail($("summary"), e);
    }
  }, 20);
}

await init();
$("status").textContent = "ready";
$("sur").onclick = () => runWeights(() => surprisalAttention($("corpus").value, $("sentence").value, +$("order").value));
$("tfidf").onclick = () => runWeights(() => tfidfAttention($("corpus").value, $("sentence").value));
$("train").onclick = train;
