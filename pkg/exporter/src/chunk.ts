/**
 * Word-window chunking for over-length documents: non-overlapping
 * spans, stride equal to the window size, so the spans partition the
 * word sequence and every word lands in exactly one chunk.
 */

export interface Span {
  start: number;
  end: number; // exclusive
}

export function chunkWords(n: number, limit: number): Span[] {
  if (limit < 1) {
    throw new Error(`chunk limit must be >= 1, got ${limit}`);
  }
  const spans: Span[] = [];
  for (let start = 0; start < n; start += limit) {
    spans.push({ start, end: Math.min(start + limit, n) });
  }
  return spans;
}
