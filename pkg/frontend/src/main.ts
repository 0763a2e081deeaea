// Bootstraps the console: restores persisted state, wires the controls,
// and routes between the search grid and the per-frame analysis panel.

import { Client } from "./api";
import { runAnalysis, submitSearch } from "./controller";
import { pngDataUri } from "./format";
import { clampParams, loadState, saveState, K_BOUNDS, PARAM_BOUNDS } from "./state";
import type { ConsoleState } from "./state";
import type { LiveParams, SearchHit } from "./types";
import { ThumbnailCache, renderAnalysisPanel, renderResultsGrid } from "./views";

const client = new Client("..");
const state: ConsoleState = loadState(localStorage);
const cache = new ThumbnailCache((id) => client.frameMeta(id));

const $ = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
};

const queryInput = $<HTMLInputElement>("query");
const kInput = $<HTMLInputElement>("k");
const kLabel = $<HTMLElementTagNameMap["span"]>("k-label");
const modeSelect = $<HTMLSelectElement>("mode");
const errorBanner = $<HTMLElementTagNameMap["p"]>("error");
const grid = $<HTMLDivElement>("results");
const panel = $<HTMLDivElement>("analysis");
const uploadInput = $<HTMLInputElement>("upload");

// The image the analysis sliders re-post: a stored frame's thumbnail or an
// uploaded file, as base64 PNG/JPEG bytes.
let analysisImage: { b64: string; uri: string } | null = null;

const ui = {
  showError(message: string) {
    errorBanner.textContent = message;
    errorBanner.hidden = false;
  },
  clearError() {
    errorBanner.hidden = true;
  },
  renderResults(hits: SearchHit[]) {
    return renderResultsGrid(grid, hits, cache, (hit) => void selectFrame(hit));
  },
};

function persist() {
  saveState(localStorage, state);
}

function currentParams(): Partial<LiveParams> {
  return { ...state.params };
}

async function reanalyze() {
  if (!analysisImage) return;
  await runAnalysis(
    client,
    {
      image_b64: analysisImage.b64,
      query: state.query.trim() || null,
      params: currentParams(),
    },
    (payload) => renderAnalysisPanel(panel, payload, analysisImage?.uri),
    ui.showError,
  );
}

async function selectFrame(hit: SearchHit) {
  state.selectedFrame = hit.frame_id;
  persist();
  const meta = await cache.get(hit.frame_id);
  if (!meta.thumbnail_b64) {
    ui.showError(`frame ${hit.frame_id} has no readable source image`);
    return;
  }
  analysisImage = { b64: meta.thumbnail_b64, uri: pngDataUri(meta.thumbnail_b64) };
  await reanalyze();
  panel.scrollIntoView({ behavior: "smooth" });
}

function wireParamSlider(key: keyof LiveParams) {
  const input = $<HTMLInputElement>(`param-${key}`);
  const label = $<HTMLElementTagNameMap["span"]>(`param-${key}-label`);
  const bounds = PARAM_BOUNDS[key];
  input.min = String(bounds.min);
  input.max = String(bounds.max);
  input.value = String(state.params[key]);
  label.textContent = String(state.params[key]);
  input.addEventListener("input", () => {
    state.params = clampParams({ ...state.params, [key]: Number(input.value) });
    label.textContent = String(state.params[key]);
    persist();
    void reanalyze();
  });
}

function init() {
  queryInput.value = state.query;
  kInput.min = String(K_BOUNDS.min);
  kInput.max = String(K_BOUNDS.max);
  kInput.value = String(state.k);
  kLabel.textContent = String(state.k);
  modeSelect.value = state.mode;

  $<HTMLButtonElement>("go").addEventListener("click", () => void search());
  queryInput.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") void search();
  });
  queryInput.addEventListener("input", () => {
    state.query = queryInput.value;
    persist();
  });
  kInput.addEventListener("change", () => {
    state.k = Number(kInput.value);
    kLabel.textContent = kInput.value;
    persist();
    if (state.lastResults.length) void search(); // grid grows, thumbs cached
  });
  modeSelect.addEventListener("change", () => {
    state.mode = modeSelect.value === "global_only" ? "global_only" : "full";
    persist();
    if (state.lastResults.length) void search();
  });
  uploadInput.addEventListener("change", () => {
    const file = uploadInput.files?.[0];
    if (!file) return;
    const reader = new FileReader();
    reader.onload = () => {
      const uri = String(reader.result);
      analysisImage = { b64: uri.slice(uri.indexOf(",") + 1), uri };
      void reanalyze();
    };
    reader.readAsDataURL(file);
  });
  (Object.keys(PARAM_BOUNDS) as (keyof LiveParams)[]).forEach(wireParamSlider);

  client
    .health()
    .then((h) => {
      $("health").textContent = `${h.frames} frames indexed, ${h.dim}-d embeddings`;
    })
    .catch(() => {
      $("health").textContent = "service unreachable";
    });

  if (state.lastResults.length) void ui.renderResults(state.lastResults);
}

async function search() {
  persist();
  if (await submitSearch(state, client, ui)) persist();
}

init();
