// Glue between state, client, and views, kept DOM-free so the behaviors
// (input validation, error surfacing, latest-wins analysis) test cleanly.

import type { Client } from "./api";
import type { ConsoleState } from "./state";
import type { AnalyzePayload, AnalyzeRequest, SearchHit } from "./types";

export interface SearchUi {
  showError(message: string): void;
  clearError(): void;
  renderResults(hits: SearchHit[]): void | Promise<void>;
}

/** Validate, query, render. Returns true when results were rendered.
 * Failures leave state.lastResults untouched. */
export async function submitSearch(
  state: ConsoleState,
  client: Client,
  ui: SearchUi,
): Promise<boolean> {
  const query = state.query.trim();
  if (!query) {
    ui.showError("type a query first");
    return false;
  }
  ui.clearError();
  let hits: SearchHit[];
  try {
    hits = (await client.search(query, state.k, state.mode)).results;
  } catch (err) {
    ui.showError(err instanceof Error ? err.message : String(err));
    return false;
  }
  state.lastResults = hits;
  await ui.renderResults(hits);
  return true;
}

/** Post an analysis; superseded posts resolve null and render nothing. */
export async function runAnalysis(
  client: Client,
  request: AnalyzeRequest,
  render: (payload: AnalyzePayload) => void,
  showError: (message: string) => void,
): Promise<AnalyzePayload | null> {
  let payload: AnalyzePayload | null;
  try {
    payload = await client.analyze(request);
  } catch (err) {
    showError(err instanceof Error ? err.message : String(err));
    return null;
  }
  if (payload) render(payload);
  return payload;
}
