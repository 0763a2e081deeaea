// Wire types for the retrieval service. The console renders exactly what
// these carry; it never rescores or rewrites values client-side.

export type SearchMode = "full" | "global_only";

export interface SearchHit {
  frame_id: number;
  score: number;
  best_source: string; // "global" or "region:<j>"
  source_uri: string;
  timestamp: number | null;
}

export interface SearchResponse {
  query: string;
  k: number;
  mode: string;
  results: SearchHit[];
}

export interface FrameMeta {
  frame_id: number;
  source_uri: string;
  timestamp: number | null;
  region_count: number;
  params_fingerprint: number;
  width: number | null;
  height: number | null;
  thumbnail_b64: string | null;
}

export interface StoredAnalysis {
  frame_id: number;
  params_fingerprint: number;
  regions: number[][]; // [x0, y0, x1, y1]
}

export interface LiveParams {
  threshold: number;
  kernel: number;
  stride: number;
  clusters: number;
}

export interface AnalyzeRequest {
  image_b64: string;
  query?: string | null;
  params?: Partial<LiveParams>;
}

export interface CropView {
  box: number[];
  thumbnail_b64: string;
}

export interface AnalyzePayload {
  frame: { width: number; height: number };
  params: Record<string, number>;
  params_fingerprint: number;
  heatmap_png_b64: string;
  mask_png_b64: string;
  candidates: number[][];
  regions: number[][];
  member_counts: number[];
  crops: CropView[];
  query: string | null;
  global_cosine: number | null;
  region_cosines: number[] | null;
  best: { source: string; score: number } | null;
}

export interface Health {
  status: string;
  frames: number;
  dim: number;
}
