// Shared payload builders for the console tests.

import type { AnalyzePayload, FrameMeta, SearchHit } from "../src/types";

// 1x1 gray PNG; enough to give <img> elements a src under jsdom.
export const TINY_PNG =
  "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR42mNk+M9QDwADhgGAWjR9awAAAABJRU5ErkJggg==";

export function makeHit(frameId: number, score: number, source = "global"): SearchHit {
  return {
    frame_id: frameId,
    score,
    best_source: source,
    source_uri: `corpus/frame_${frameId}.png`,
    timestamp: frameId % 2 === 0 ? frameId * 0.5 : null,
  };
}

export function makeMeta(frameId: number): FrameMeta {
  return {
    frame_id: frameId,
    source_uri: `corpus/frame_${frameId}.png`,
    timestamp: null,
    region_count: 2,
    params_fingerprint: 1234567890,
    width: 64,
    height: 64,
    thumbnail_b64: TINY_PNG,
  };
}

export function makePayload(overrides: Partial<AnalyzePayload> = {}): AnalyzePayload {
  const regions = overrides.regions ?? [
    [0, 0, 64, 64],
    [128, 96, 224, 192],
  ];
  return {
    frame: { width: 256, height: 256 },
    params: { threshold: 0.4, kernel: 64, stride: 32, clusters: 5 },
    params_fingerprint: 1234567890,
    heatmap_png_b64: TINY_PNG,
    mask_png_b64: TINY_PNG,
    candidates: overrides.candidates ?? [
      [0, 0, 64, 64],
      [32, 0, 96, 64],
      [128, 96, 192, 160],
    ],
    regions,
    member_counts: overrides.member_counts ?? regions.map(() => 2),
    crops: overrides.crops ?? regions.map((box) => ({ box, thumbnail_b64: TINY_PNG })),
    query: null,
    global_cosine: null,
    region_cosines: null,
    best: null,
    ...overrides,
  };
}
