import { describe, expect, it } from "vitest";

import { chunkWords } from "../src/chunk.js";

describe("word-window chunking (stride = window)", () => {
  it("short documents fit in one span", () => {
    expect(chunkWords(5, 512)).toEqual([{ start: 0, end: 5 }]);
  });

  it("exact multiples split evenly", () => {
    expect(chunkWords(1024, 512)).toEqual([
      { start: 0, end: 512 },
      { start: 512, end: 1024 },
    ]);
  });

  it("remainders get a short final span", () => {
    expect(chunkWords(1025, 512)).toEqual([
      { start: 0, end: 512 },
      { start: 512, end: 1024 },
      { start: 1024, end: 1025 },
    ]);
  });

  it("1030 words at limit 512 gives windows 512/512/6", () => {
    const spans = chunkWords(1030, 512);
    expect(spans.map((s) => s.end - s.start)).toEqual([512, 512, 6]);
  });

  it("spans partition the range for random sizes", () => {
    for (let trial = 0; trial < 200; trial++) {
      const n = (trial * 37) % 3000;
      const limit = 1 + ((trial * 13) % 600);
      const spans = chunkWords(n, limit);
      let cursor = 0;
      for (const span of spans) {
        expect(span.start).toBe(cursor);
        expect(span.end).toBeGreaterThan(span.start);
        cursor = span.end;
      }
      expect(cursor).toBe(n);
    }
  });

  it("rejects a non-positive limit", () => {
    expect(() => chunkWords(10, 0)).toThrow(/limit/);
  });
});
