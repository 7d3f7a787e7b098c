import init, { SearchWorld, SurveyWorld } from "./pkg/clairvoyant_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function report(e) {
  $("error").textContent = e ? String(e.message ?? e) : "";
}

let world = null;
let timer = null;

function paintCells(ctx, w, h, cells, colour) {
  const img = ctx.createImageData(w, h);
  for (let i = 0; i < w * h; i++) {
    const c = cells[i] ? [0, 0, 0] : colour(i);
    img.data.set([...c, 255], i * 4);
  }
  return img;
}

function setPixel(img, i, c) {
  img.data.set([...c, 255], i * 4);
}

function runSearch() {
  clearInterval(timer);
  report(null);
  try {
    world = new SearchWorld($("family").value, num("size"), BigInt(num("seed")));
  } catch (e) {
    return report(e);
  }
  const { width: w, height: h } = world;
  const canvas = $("search");
  canvas.width = w;
  canvas.height = h;
  const ctx = canvas.getContext("2d");
  const cells = world.cells;
  const img = paintCells(ctx, w, h, cells, () => [255, 255, 255]);
  let front;
  try {
    front = world.search($("method").value, 20000);
  } catch (e) {
    return report(e);
  }
  const order = front.order;
  const path = front.path;
  const [s, g] = [world.start, world.goal];
  const perTick = Math.max(1, Math.ceil(order.length / 200));
  let k = 0;
  timer = setInterval(() => {
    for (let n = 0; n < perTick && k < order.length; n++, k++) setPixel(img, order[k], [0, 0, 255]);
    if (k >= order.length) {
      clearInterval(timer);
      for (const i of path) setPixel(img, i, [0, 200, 0]);
    }
    setPixel(img, s, [0, 200, 0]);
    setPixel(img, g, [255, 0, 0]);
    ctx.putImageData(img, 0, 0);
    $("search-status").textContent =
      `${k} / ${order.length} expansions` + (k >= order.length ? (front.found ? `, path ${path.length - 1} edges` : ", no path") : "");
  }, 16);
}

function showCostToGo(ev) {
  if (!world) return;
  clearInterval(timer);
  const canvas = $("search");
  const r = canvas.getBoundingClientRect();
  const x = Math.floor(((ev.clientX - r.left) / r.width) * world.width);
  const y = Math.floor(((ev.clientY - r.top) / r.height) * world.height);
  let costs;
  try {
    costs = world.costToGo(x, y);
  } catch (e) {
    return report(e);
  }
  report(null);
  const max = Math.max(1, ...costs);
  const ctx = canvas.getContext("2d");
  const img = paintCells(ctx, world.width, world.height, world.cells, (i) => {
    if (costs[i] < 0) return [90, 90, 90];
    const t = costs[i] / max;
    return [Math.round(255 * (1 - t)), Math.round(180 * (1 - t) + 40), Math.round(255 * t)];
  });
  setPixel(img, y * world.width + x, [255, 0, 0]);
  ctx.putImageData(img, 0, 0);
  $("search-status").textContent = `cost-to-go towards (${x}, ${y}), farthest reachable cell ${max}`;
}

function runSurvey() {
  report(null);
  let map, run;
  try {
    map = new SurveyWorld(48, BigInt(num("ipp-seed")), 100);
    run = map.survey($("gain").value, num("lambda"), num("horizon"));
  } catch (e) {
    return report(e);
  }
  const canvas = $("ipp");
  const ctx = canvas.getContext("2d");
  const scale = canvas.width / map.width;
  const cells = map.cells;
  ctx.fillStyle = "#fff";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#333";
  for (let i = 0; i < cells.length; i++) {
    if (cells[i]) ctx.fillRect((i % map.width) * scale, Math.floor(i / map.width) * scale, scale, scale);
  }
  const nodes = map.nodes;
  const at = (n) => [(nodes[2 * n] + 0.5) * scale, (nodes[2 * n + 1] + 0.5) * scale];
  ctx.fillStyle = "#aaa";
  for (let n = 0; n < nodes.length / 2; n++) {
    const [x, y] = at(n);
    ctx.fillRect(x - 1.5, y - 1.5, 3, 3);
  }
  const route = run.route;
  ctx.strokeStyle = "#d40";
  ctx.lineWidth = 2;
  ctx.beginPath();
  route.forEach((n, i) => (i ? ctx.lineTo(...at(n)) : ctx.moveTo(...at(n))));
  ctx.stroke();
  const cov = run.coverage;
  $("ipp-status").textContent =
    `visited ${route.length} nodes, coverage ${(100 * cov[cov.length - 1]).toFixed(1)}%`;
}

await init();
$("run").addEventListener("click", runSearch);
$("search").addEventListener("click", showCostToGo);
$("survey").addEventListener("click", runSurvey);
runSearch();
runSurvey();
