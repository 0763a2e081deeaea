// Console state: clamped to the engine's parameter bounds and persisted in
// localStorage so a reload lands where the user left off.

import type { LiveParams, SearchHit, SearchMode } from "./types";

export interface ConsoleState {
  query: string;
  k: number;
  mode: SearchMode;
  params: LiveParams;
  selectedFrame: number | null;
  lastResults: SearchHit[];
}

export const K_BOUNDS = { min: 1, max: 50 };

// Slider ranges; the engine additionally requires stride <= kernel.
export const PARAM_BOUNDS: Record<keyof LiveParams, { min: number; max: number }> = {
  threshold: { min: 0, max: 1 },
  kernel: { min: 16, max: 256 },
  stride: { min: 8, max: 256 },
  clusters: { min: 1, max: 10 },
};

export const DEFAULT_PARAMS: LiveParams = {
  threshold: 0.4,
  kernel: 64,
  stride: 32,
  clusters: 5,
};

const STORAGE_KEY = "tzr-console-state";

export function defaultState(): ConsoleState {
  return {
    query: "",
    k: 10,
    mode: "full",
    params: { ...DEFAULT_PARAMS },
    selectedFrame: null,
    lastResults: [],
  };
}

function clampNumber(value: unknown, min: number, max: number, fallback: number): number {
  const n = typeof value === "number" && Number.isFinite(value) ? value : fallback;
  return Math.min(max, Math.max(min, n));
}

export function clampParams(raw: Partial<LiveParams>): LiveParams {
  const p: LiveParams = { ...DEFAULT_PARAMS };
  for (const key of Object.keys(PARAM_BOUNDS) as (keyof LiveParams)[]) {
    const { min, max } = PARAM_BOUNDS[key];
    p[key] = clampNumber(raw[key], min, max, DEFAULT_PARAMS[key]);
  }
  for (const key of ["kernel", "stride", "clusters"] as const) {
    p[key] = Math.round(p[key]);
  }
  if (p.stride > p.kernel) p.stride = p.kernel;
  return p;
}

export function clampState(raw: Partial<ConsoleState>): ConsoleState {
  const base = defaultState();
  return {
    query: typeof raw.query === "string" ? raw.query : base.query,
    k: Math.round(clampNumber(raw.k, K_BOUNDS.min, K_BOUNDS.max, base.k)),
    mode: raw.mode === "global_only" ? "global_only" : "full",
    params: clampParams(raw.params ?? {}),
    selectedFrame:
      typeof raw.selectedFrame === "number" ? raw.selectedFrame : null,
    lastResults: Array.isArray(raw.lastResults) ? raw.lastResults : [],
  };
}

export function loadState(storage: Pick<Storage, "getItem">): ConsoleState {
  const blob = storage.getItem(STORAGE_KEY);
  if (!blob) return defaultState();
  try {
    return clampState(JSON.parse(blob) as Partial<ConsoleState>);
  } catch {
    return defaultState();
  }
}

export function saveState(storage: Pick<Storage, "setItem">, state: ConsoleState): void {
  storage.setItem(STORAGE_KEY, JSON.stringify(state));
}
