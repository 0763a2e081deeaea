// DOM builders for the two screens: the ranked result grid and the
// stage-by-stage analysis panel. Everything shown is lifted verbatim from
// service payloads.

import type { AnalyzePayload, FrameMeta, SearchHit } from "./types";
import {
  fingerprintLabel,
  formatScore,
  formatTimestamp,
  pngDataUri,
  sourceLabel,
} from "./format";
import { REGION_COLORS, drawBoxes } from "./overlay";

/** Frame metadata keyed by id; growing k re-uses entries already fetched. */
export class ThumbnailCache {
  private entries = new Map<number, Promise<FrameMeta>>();

  constructor(private fetchMeta: (frameId: number) => Promise<FrameMeta>) {}

  get(frameId: number): Promise<FrameMeta> {
    let entry = this.entries.get(frameId);
    if (!entry) {
      entry = this.fetchMeta(frameId).catch((err) => {
        this.entries.delete(frameId); // allow a retry after a failure
        throw err;
      });
      this.entries.set(frameId, entry);
    }
    return entry;
  }

  get size(): number {
    return this.entries.size;
  }
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export async function renderResultsGrid(
  container: HTMLElement,
  hits: SearchHit[],
  cache: ThumbnailCache,
  onSelect: (hit: SearchHit) => void,
): Promise<void> {
  container.textContent = "";
  if (!hits.length) {
    container.appendChild(el("p", "empty-note", "no results"));
    return;
  }
  const pending: Promise<void>[] = [];
  for (const hit of hits) {
    const tile = el("div", "result-tile");
    tile.dataset.frameId = String(hit.frame_id);
    tile.addEventListener("click", () => onSelect(hit));

    const img = el("img", "result-thumb");
    img.alt = `frame ${hit.frame_id}`;
    tile.appendChild(img);
    pending.push(
      cache.get(hit.frame_id).then((meta) => {
        if (meta.thumbnail_b64) img.src = pngDataUri(meta.thumbnail_b64);
      }),
    );

    const caption = el("div", "result-caption");
    caption.appendChild(el("span", "score-badge", formatScore(hit.score)));
    const sourceClass = hit.best_source === "global" ? "source-global" : "source-region";
    caption.appendChild(el("span", `source-badge ${sourceClass}`, sourceLabel(hit.best_source)));
    caption.appendChild(
      el("span", "result-meta", `frame ${hit.frame_id} ${formatTimestamp(hit.timestamp)}`),
    );
    tile.appendChild(caption);
    container.appendChild(tile);
  }
  await Promise.allSettled(pending);
}

function renderBar(row: HTMLElement, label: string, cosine: number, color: string, winner: boolean) {
  const bar = el("div", winner ? "cosine-bar winner" : "cosine-bar");
  bar.appendChild(el("span", "bar-label", label));
  const track = el("div", "bar-track");
  const fill = el("div", "bar-fill");
  fill.style.width = `${(Math.max(-1, Math.min(1, cosine)) + 1) * 50}%`;
  fill.style.background = color;
  track.appendChild(fill);
  bar.appendChild(track);
  bar.appendChild(el("span", "bar-value", formatScore(cosine)));
  row.appendChild(bar);
}

/** Draw the heatmap under candidate and region boxes, when a 2d context
 * exists (jsdom has none; the panel still renders without the canvas). */
function paintOverlay(canvas: HTMLCanvasElement, payload: AnalyzePayload): void {
  let ctx: CanvasRenderingContext2D | null = null;
  try {
    ctx = canvas.getContext("2d");
  } catch {
    return;
  }
  if (!ctx) return;
  const { width, height } = payload.frame;
  const image = new Image();
  image.onload = () => {
    ctx.globalAlpha = 1.0;
    ctx.drawImage(image, 0, 0, canvas.width, canvas.height);
    drawBoxes(ctx, payload.candidates, width, height, { color: "#9aa0a6", lineWidth: 1 });
    drawBoxes(ctx, payload.regions, width, height, { palette: REGION_COLORS, lineWidth: 3 });
  };
  image.src = pngDataUri(payload.heatmap_png_b64);
}

export function renderAnalysisPanel(
  container: HTMLElement,
  payload: AnalyzePayload,
  sourceImageUri?: string,
): void {
  container.textContent = "";

  const stages = el("div", "stage-strip");
  if (sourceImageUri) {
    const frameFig = el("figure", "stage");
    const frameImg = el("img", "stage-image");
    frameImg.src = sourceImageUri;
    frameFig.appendChild(frameImg);
    frameFig.appendChild(el("figcaption", undefined, "input frame"));
    stages.appendChild(frameFig);
  }
  const overlayFig = el("figure", "stage");
  const canvas = el("canvas", "stage-canvas");
  canvas.width = 256;
  canvas.height = Math.round((256 * payload.frame.height) / payload.frame.width) || 256;
  paintOverlay(canvas, payload);
  overlayFig.appendChild(canvas);
  overlayFig.appendChild(el("figcaption", undefined, "attention + regions"));
  stages.appendChild(overlayFig);

  const maskFig = el("figure", "stage");
  const maskImg = el("img", "stage-image");
  maskImg.src = pngDataUri(payload.mask_png_b64);
  maskFig.appendChild(maskImg);
  maskFig.appendChild(el("figcaption", undefined, "low-attention mask"));
  stages.appendChild(maskFig);
  container.appendChild(stages);

  const counts = el("p", "stage-counts");
  const candidateCount = el("span", "candidate-count", String(payload.candidates.length));
  candidateCount.dataset.role = "candidate-count";
  counts.append("low-attention windows: ", candidateCount);
  container.appendChild(counts);

  const regionList = el("ul", "region-list");
  payload.regions.forEach((box, i) => {
    const row = el("li", "region-row");
    row.style.borderLeftColor = REGION_COLORS[i % REGION_COLORS.length];
    row.textContent =
      `region ${i + 1}: [${box.join(", ")}] ` +
      `from ${payload.member_counts[i]} windows`;
    regionList.appendChild(row);
  });
  container.appendChild(regionList);

  const strip = el("div", "crop-strip");
  for (const crop of payload.crops) {
    const img = el("img", "crop-thumb");
    img.src = pngDataUri(crop.thumbnail_b64);
    img.title = `crop [${crop.box.join(", ")}]`;
    strip.appendChild(img);
  }
  container.appendChild(strip);

  if (payload.query !== null && payload.best && payload.global_cosine !== null) {
    const chart = el("div", "cosine-chart");
    chart.appendChild(el("h3", undefined, `scores for ${JSON.stringify(payload.query)}`));
    renderBar(chart, "global", payload.global_cosine, "#5f6368", payload.best.source === "global");
    (payload.region_cosines ?? []).forEach((value, i) => {
      renderBar(
        chart,
        `region ${i + 1}`,
        value,
        REGION_COLORS[i % REGION_COLORS.length],
        payload.best!.source === `region:${i + 1}`,
      );
    });
    const best = el("p", "best-line", `best ${formatScore(payload.best.score)} via ${sourceLabel(payload.best.source)}`);
    best.dataset.role = "best";
    chart.appendChild(best);
    container.appendChild(chart);
  }

  const note = el("p", "ingest-note");
  note.dataset.role = "ingest-note";
  note.textContent =
    "sliders re-run this frame only; corpus search still uses the " +
    `ingest-time parameters (${fingerprintLabel(payload.params_fingerprint)}). ` +
    "Re-ingest to apply new parameters corpus-wide.";
  container.appendChild(note);
}
