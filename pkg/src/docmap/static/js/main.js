import { ApiClient } from "./api.js";
import { ScatterRenderer } from "./render.js";
import { BrowseState } from "./state.js";
const api = new ApiClient("");
const state = new BrowseState(api);
const canvas = document.getElementById("scatter");
const renderer = new ScatterRenderer(canvas);
const banner = document.getElementById("banner");
const retryBtn = document.getElementById("retry");
const panel = document.getElementById("neighbors");
const selectedEl = document.getElementById("selected");
const historyEl = document.getElementById("history");
const kInput = document.getElementById("k");
const queryInput = document.getElementById("query");
const queryBtn = document.getElementById("locate");
const dimToggle = document.getElementById("dim3");
const metaEl = document.getElementById("meta");
function resizeCanvas() {
    canvas.width = canvas.clientWidth;
    canvas.height = canvas.clientHeight;
    renderer.draw(state);
}
function render() {
    banner.hidden = state.error === null;
    banner.querySelector("span").textContent = state.error ?? "";
    selectedEl.textContent =
        state.selected !== null
            ? state.selected
            : state.marker !== null
                ? `query: "${state.marker.text}"`
                : "nothing selected";
    panel.innerHTML = "";
    if (state.neighbors.length === 0 && (state.selected !== null || state.marker !== null)) {
        const li = document.createElement("li");
        li.className = "empty";
        li.textContent = state.k === 0 ? "k = 0: no neighbors requested" : "no neighbors";
        panel.appendChild(li);
    }
    for (const nb of state.neighbors) {
        const li = document.createElement("li");
        const name = document.createElement("a");
        name.href = "#";
        name.textContent = nb.doc_id;
        name.addEventListener("click", (ev) => {
            ev.preventDefault();
            void state.selectDoc(nb.doc_id);
        });
        const dist = document.createElement("span");
        // Shown exactly as the server serialized it; no recomputation.
        dist.textContent = nb.distance_text;
        li.append(name, dist);
        panel.appendChild(li);
    }
    historyEl.innerHTML = "";
    for (const entry of state.history) {
        const li = document.createElement("li");
        li.textContent =
            entry.kind === "view"
                ? `view ${entry.dim}D`
                : entry.kind === "select"
                    ? `select ${entry.docId}`
                    : `locate "${entry.text}"`;
        historyEl.appendChild(li);
    }
    renderer.draw(state);
}
state.onChange = render;
canvas.addEventListener("click", (ev) => {
    const rect = canvas.getBoundingClientRect();
    const hit = renderer.hitTest(ev.clientX - rect.left, ev.clientY - rect.top);
    if (hit !== null)
        void state.selectDoc(hit);
});
let dragging = false;
let lastX = 0;
let lastY = 0;
canvas.addEventListener("mousedown", (ev) => {
    dragging = true;
    lastX = ev.clientX;
    lastY = ev.clientY;
});
window.addEventListener("mouseup", () => (dragging = false));
window.addEventListener("mousemove", (ev) => {
    if (!dragging)
        return;
    const dx = ev.clientX - lastX;
    const dy = ev.clientY - lastY;
    lastX = ev.clientX;
    lastY = ev.clientY;
    if (state.targetDim === 3 && !ev.shiftKey) {
        // 3-axis camera: drag orbits, shift-drag pans.
        state.camera.yaw += dx * 0.01;
        state.camera.pitch += dy * 0.01;
    }
    else {
        state.camera.panX += dx;
        state.camera.panY += dy;
    }
    renderer.draw(state);
});
canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    state.camera.zoom *= ev.deltaY < 0 ? 1.1 : 1 / 1.1;
    renderer.draw(state);
});
kInput.addEventListener("change", () => {
    state.k = Math.max(0, Number(kInput.value) || 0);
    if (state.selected !== null)
        void state.selectDoc(state.selected);
});
queryBtn.addEventListener("click", () => {
    if (queryInput.value.trim())
        void state.locateQuery(queryInput.value.trim());
});
queryInput.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter" && queryInput.value.trim()) {
        void state.locateQuery(queryInput.value.trim());
    }
});
dimToggle.addEventListener("change", () => {
    void state.loadView(dimToggle.checked ? 3 : 2);
});
retryBtn.addEventListener("click", () => {
    void state.loadView(state.targetDim);
});
window.addEventListener("resize", resizeCanvas);
async function boot() {
    try {
        const meta = await api.meta();
        metaEl.textContent = `${meta.entry_count} documents in ${meta.dim}D map`;
    }
    catch {
        metaEl.textContent = "service unreachable";
    }
    await state.loadView(2);
    resizeCanvas();
}
void boot();
