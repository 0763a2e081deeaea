// Thin typed client for the retrieval service. /analyze is latest-wins:
// posting a new analysis aborts the one in flight, so a dragged slider
// settles on the final value instead of racing stale responses.

import type {
  AnalyzePayload,
  AnalyzeRequest,
  FrameMeta,
  Health,
  SearchMode,
  SearchResponse,
  StoredAnalysis,
} from "./types";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function asJson<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = `${res.status}`;
    try {
      const body = (await res.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; the status code is all we have
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export class Client {
  private analyzeInflight: AbortController | null = null;

  constructor(
    private base = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async health(): Promise<Health> {
    return asJson(await this.fetchFn(`${this.base}/healthz`));
  }

  async search(query: string, k: number, mode: SearchMode): Promise<SearchResponse> {
    const params = new URLSearchParams({ q: query, k: String(k), mode });
    return asJson(await this.fetchFn(`${this.base}/search?${params}`));
  }

  async frameMeta(frameId: number): Promise<FrameMeta> {
    return asJson(await this.fetchFn(`${this.base}/frames/${frameId}`));
  }

  async storedAnalysis(frameId: number): Promise<StoredAnalysis> {
    return asJson(await this.fetchFn(`${this.base}/frames/${frameId}/analysis`));
  }

  /** Post an analysis; resolves null when superseded by a newer one. */
  async analyze(req: AnalyzeRequest): Promise<AnalyzePayload | null> {
    this.analyzeInflight?.abort();
    const controller = new AbortController();
    this.analyzeInflight = controller;
    let res: Response;
    try {
      res = await this.fetchFn(`${this.base}/analyze`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(req),
        signal: controller.signal,
      });
    } catch (err) {
      if (controller.signal.aborted) return null;
      throw err;
    } finally {
      if (this.analyzeInflight === controller) this.analyzeInflight = null;
    }
    if (controller.signal.aborted) return null;
    return asJson(res);
  }
}
