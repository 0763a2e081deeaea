// Display formatting. Scores come straight from the service payload and are
// only rounded for display, never recomputed.

export const SCORE_DECIMALS = 4;

export function formatScore(score: number): string {
  const text = score.toFixed(SCORE_DECIMALS);
  return score >= 0 ? `+${text}` : text;
}

/** "global" stays as-is; "region:3" reads as "region 3". */
export function sourceLabel(source: string): string {
  return source.replace(":", " ");
}

export function formatTimestamp(ts: number | null): string {
  return ts === null ? "" : `@ ${ts.toFixed(2)}s`;
}

export function fingerprintLabel(fp: number): string {
  return `ingest fingerprint ${fp}`;
}

export function pngDataUri(b64: string): string {
  return `data:image/png;base64,${b64}`;
}
