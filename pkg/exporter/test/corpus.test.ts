import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { loadCorpus, tokenizeText } from "../src/corpus.js";

function writeTemp(content: string): string {
  const dir = mkdtempSync(join(tmpdir(), "kpe-exporter-"));
  const path = join(dir, "corpus.jsonl");
  writeFileSync(path, content);
  return path;
}

describe("tokenizer parity with the consumer", () => {
  it("detaches trailing punctuation, keeps interior hyphens", () => {
    expect(tokenizeText("state-of-the-art.")).toEqual(["state-of-the-art", "."]);
  });

  it("detaches leading and trailing punctuation per character", () => {
    expect(tokenizeText("(GCN),")).toEqual(["(", "GCN", ")", ","]);
  });

  it("splits plain words on whitespace", () => {
    expect(tokenizeText("graph  neural\tnets")).toEqual(["graph", "neural", "nets"]);
  });

  it("handles punctuation-only chunks", () => {
    expect(tokenizeText("--")).toEqual(["-", "-"]);
  });
});

describe("corpus loading", () => {
  it("loads token records in file order", () => {
    const path = writeTemp(
      '{"id":"a","tokens":["x","y"]}\n{"id":"b","text":"Deep learning."}\n',
    );
    const docs = loadCorpus(path);
    expect(docs.map((d) => d.id)).toEqual(["a", "b"]);
    expect(docs[1].tokens).toEqual(["Deep", "learning", "."]);
  });

  it("skips _meta records", () => {
    const path = writeTemp('{"_meta":{"config":{}}}\n{"id":"a","tokens":["x"]}\n');
    expect(loadCorpus(path).length).toBe(1);
  });

  it("rejects malformed records with the line number", () => {
    const path = writeTemp('{"id":"a","tokens":["x"]}\n{"id":"b"}\n');
    expect(() => loadCorpus(path)).toThrow(/line 2/);
  });

  it("rejects duplicate ids", () => {
    const path = writeTemp('{"id":"a","tokens":["x"]}\n{"id":"a","tokens":["y"]}\n');
    expect(() => loadCorpus(path)).toThrow(/duplicate/);
  });

  it("rejects an empty corpus", () => {
    const path = writeTemp("\n");
    expect(() => loadCorpus(path)).toThrow(/empty/);
  });
});
