/** Analyst console: load a bundle, tune filters live, inspect antennas. */

import { rampColor } from "./colors.js";
import { isVisible, vulnerableFraction } from "./filtering.js";
import { pyFloatRepr, shortlistCsv } from "./format.js";
import { BundleError, parseBundle, type AntennaRow, type ViewerBundle } from "./types.js";
import { fitBounds, pan, project, zoomAround, type ViewState } from "./view.js";

interface AppState {
  bundle: ViewerBundle | null;
  beta: number;
  minVolume: number;
  view: ViewState;
  selected: string | null;
  shortlist: Set<string>;
}

const state: AppState = {
  bundle: null,
  beta: 0.15,
  minVolume: 50,
  view: { centerLat: 0, centerLon: 0, scale: 2 },
  selected: null,
  shortlist: new Set(),
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const svg = el<HTMLElement>("map") as unknown as SVGSVGElement;
const banner = el<HTMLDivElement>("banner");
const betaSlider = el<HTMLInputElement>("beta-slider");
const betaInput = el<HTMLInputElement>("beta-input");
const volumeInput = el<HTMLInputElement>("volume-input");
const presetBox = el<HTMLDivElement>("presets");
const statusLine = el<HTMLDivElement>("status");
const detailBox = el<HTMLDivElement>("detail");
const shortlistBox = el<HTMLDivElement>("shortlist");

function showError(message: string): void {
  banner.textContent = message;
  banner.style.display = "block";
}

function clearError(): void {
  banner.style.display = "none";
}

function svgSize(): [number, number] {
  const rect = svg.getBoundingClientRect();
  return [rect.width || 900, rect.height || 600];
}

function loadBundleText(text: string): void {
  let bundle: ViewerBundle;
  try {
    bundle = parseBundle(text);
  } catch (err) {
    state.bundle = null;
    render();
    showError(
      err instanceof BundleError
        ? `Bundle rejected: ${err.message}`
        : `Unexpected error: ${(err as Error).message}`,
    );
    return;
  }
  clearError();
  state.bundle = bundle;
  state.selected = null;
  state.shortlist = new Set();
  const [w, h] = svgSize();
  state.view = fitBounds(bundle.antennas, w, h);
  renderPresets();
  render();
}

function renderPresets(): void {
  presetBox.textContent = "";
  if (!state.bundle) return;
  for (const preset of state.bundle.presets) {
    const button = document.createElement("button");
    button.textContent = `${preset.name} (β=${preset.beta}, m=${preset.min_volume})`;
    button.addEventListener("click", () => {
      state.beta = preset.beta;
      state.minVolume = preset.min_volume;
      syncFilterControls();
      render();
    });
    presetBox.appendChild(button);
  }
}

function syncFilterControls(): void {
  betaSlider.value = String(state.beta);
  betaInput.value = String(state.beta);
  volumeInput.value = String(state.minVolume);
}

function zonePath(bundle: ViewerBundle, w: number, h: number): string {
  const parts: string[] = [];
  for (const polygon of bundle.zone.geometry.coordinates) {
    for (const ring of polygon) {
      const cmds = ring.map(([lon, lat], i) => {
        const [x, y] = project(state.view, w, h, lat, lon);
        return `${i === 0 ? "M" : "L"}${x.toFixed(1)},${y.toFixed(1)}`;
      });
      parts.push(cmds.join("") + "Z");
    }
  }
  return parts.join(" ");
}

function render(): void {
  const [w, h] = svgSize();
  svg.textContent = "";
  if (!state.bundle) {
    statusLine.textContent = "Load a viewer bundle (drop the JSON file here).";
    detailBox.textContent = "";
    shortlistBox.textContent = "";
    return;
  }
  const ns = "http://www.w3.org/2000/svg";

  const zone = document.createElementNS(ns, "path");
  zone.setAttribute("d", zonePath(state.bundle, w, h));
  zone.setAttribute("class", "zone");
  svg.appendChild(zone);

  // radius in px: radius_scale is in sqrt(people); normalize so the largest
  // visible circle stays readable at any zoom
  const k = state.bundle.radius_constant;
  let visibleCount = 0;
  const maxRadius = Math.max(
    1,
    ...state.bundle.antennas.map((a) => k * Math.sqrt(a.N)),
  );
  const pxPerUnit = 28 / maxRadius;

  for (const row of state.bundle.antennas) {
    if (!isVisible(row, state.beta, state.minVolume)) continue;
    visibleCount += 1;
    const [x, y] = project(state.view, w, h, row.lat, row.lon);
    const circle = document.createElementNS(ns, "circle");
    circle.setAttribute("cx", String(x));
    circle.setAttribute("cy", String(y));
    circle.setAttribute("r", String(Math.max(2.5, k * Math.sqrt(row.N) * pxPerUnit)));
    const fraction = vulnerableFraction(row);
    circle.setAttribute("fill", rampColor(fraction ?? 0));
    circle.setAttribute("class", row.id === state.selected ? "antenna selected" : "antenna");
    circle.addEventListener("click", (event) => {
      event.stopPropagation();
      state.selected = row.id;
      render();
    });
    svg.appendChild(circle);
  }

  statusLine.textContent =
    `${visibleCount} of ${state.bundle.antennas.length} antennas visible ` +
    `(β > ${state.beta}, population > ${state.minVolume})`;
  renderDetail();
  renderShortlist();
}

function renderDetail(): void {
  detailBox.textContent = "";
  if (!state.bundle || !state.selected) return;
  const row = state.bundle.antennas.find((a) => a.id === state.selected);
  if (!row) return;
  const fraction = vulnerableFraction(row);
  const dl = document.createElement("dl");
  const fields: [string, string][] = [
    ["antenna", row.id],
    ["coordinates", `${row.lat}, ${row.lon}`],
    ["residents N", String(row.N)],
    ["vulnerable V", String(row.V)],
    ["outgoing calls C", String(row.C)],
    ["vulnerable calls VC", String(row.VC)],
    ["V/N", fraction === null ? "undefined" : pyFloatRepr(fraction)],
  ];
  for (const [label, value] of fields) {
    const dt = document.createElement("dt");
    dt.textContent = label;
    const dd = document.createElement("dd");
    dd.textContent = value;
    dl.append(dt, dd);
  }
  detailBox.appendChild(dl);

  const add = document.createElement("button");
  add.textContent = state.shortlist.has(row.id)
    ? "In shortlist"
    : "Add to shortlist";
  add.disabled = state.shortlist.has(row.id);
  add.addEventListener("click", () => {
    state.shortlist.add(row.id);
    render();
  });
  detailBox.appendChild(add);
}

function renderShortlist(): void {
  shortlistBox.textContent = "";
  if (!state.bundle) return;
  const title = document.createElement("h3");
  title.textContent = `Shortlist (${state.shortlist.size})`;
  shortlistBox.appendChild(title);
  const list = document.createElement("ul");
  for (const id of [...state.shortlist].sort()) {
    const item = document.createElement("li");
    item.textContent = id;
    const remove = document.createElement("button");
    remove.textContent = "×";
    remove.addEventListener("click", () => {
      state.shortlist.delete(id);
      render();
    });
    item.appendChild(remove);
    list.appendChild(item);
  }
  shortlistBox.appendChild(list);
  if (state.shortlist.size > 0) {
    const download = document.createElement("button");
    download.textContent = "Export shortlist CSV";
    download.addEventListener("click", () => {
      const csv = shortlistCsv(
        state.bundle!.antennas,
        state.shortlist,
        state.bundle!.radius_constant,
      );
      const blob = new Blob([csv], { type: "text/csv" });
      const url = URL.createObjectURL(blob);
      const a = document.createElement("a");
      a.href = url;
      a.download = "shortlist.csv";
      a.click();
      URL.revokeObjectURL(url);
    });
    shortlistBox.appendChild(download);
  }
}

function wireControls(): void {
  const applyBeta = (value: string) => {
    const beta = Number(value);
    if (Number.isFinite(beta) && beta >= 0 && beta <= 1) {
      state.beta = beta;
      syncFilterControls();
      render();
    }
  };
  betaSlider.addEventListener("input", () => applyBeta(betaSlider.value));
  betaInput.addEventListener("change", () => applyBeta(betaInput.value));
  volumeInput.addEventListener("change", () => {
    const volume = Number(volumeInput.value);
    if (Number.isInteger(volume) && volume >= 0) {
      state.minVolume = volume;
      render();
    }
  });

  el<HTMLInputElement>("bundle-file").addEventListener("change", (event) => {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (file) void file.text().then(loadBundleText);
  });
  document.body.addEventListener("dragover", (event) => event.preventDefault());
  document.body.addEventListener("drop", (event) => {
    event.preventDefault();
    const file = event.dataTransfer?.files?.[0];
    if (file) void file.text().then(loadBundleText);
  });

  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  svg.addEventListener("mousedown", (event) => {
    dragging = true;
    lastX = event.clientX;
    lastY = event.clientY;
  });
  window.addEventListener("mouseup", () => {
    dragging = false;
  });
  window.addEventListener("mousemove", (event) => {
    if (!dragging) return;
    state.view = pan(state.view, event.clientX - lastX, event.clientY - lastY);
    lastX = event.clientX;
    lastY = event.clientY;
    render();
  });
  svg.addEventListener("wheel", (event) => {
    event.preventDefault();
    const [w, h] = svgSize();
    const rect = svg.getBoundingClientRect();
    const factor = event.deltaY < 0 ? 1.2 : 1 / 1.2;
    state.view = zoomAround(
      state.view, w, h, event.clientX - rect.left, event.clientY - rect.top, factor,
    );
    render();
  });
  svg.addEventListener("click", () => {
    state.selected = null;
    render();
  });
}

export function start(): void {
  wireControls();
  syncFilterControls();
  render();
}

start();
