/**
 * JSONL corpus reader. Mirrors the consumer's format: one document per
 * line with `id` and either `tokens` or raw `text`; `_meta` records are
 * skipped. Raw text tokenization matches the consumer exactly (split on
 * whitespace, detach leading/trailing Unicode punctuation as separate
 * tokens) so row counts always align.
 */

import { readFileSync } from "node:fs";

export interface CorpusDocument {
  id: string;
  tokens: string[];
}

const PUNCT = /\p{P}/u;

export function tokenizeText(text: string): string[] {
  const tokens: string[] = [];
  for (let chunk of text.split(/\s+/).filter((c) => c.length > 0)) {
    const lead: string[] = [];
    while (chunk.length > 0 && PUNCT.test(chunk[0])) {
      lead.push(chunk[0]);
      chunk = chunk.slice(1);
    }
    const trail: string[] = [];
    while (chunk.length > 0 && PUNCT.test(chunk[chunk.length - 1])) {
      trail.push(chunk[chunk.length - 1]);
      chunk = chunk.slice(0, -1);
    }
    tokens.push(...lead);
    if (chunk.length > 0) tokens.push(chunk);
    tokens.push(...trail.reverse());
  }
  return tokens;
}

export function loadCorpus(path: string): CorpusDocument[] {
  const raw = readFileSync(path, "utf-8");
  const docs: CorpusDocument[] = [];
  const seen = new Set<string>();
  let lineno = 0;
  for (const line of raw.split("\n")) {
    lineno += 1;
    if (line.trim().length === 0) continue;
    let obj: any;
    try {
      obj = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}: line ${lineno}: invalid JSON`);
    }
    if (obj && typeof obj === "object" && "_meta" in obj) continue;
    if (typeof obj.id !== "string" || obj.id.length === 0) {
      throw new Error(`${path}: line ${lineno}: missing or invalid 'id'`);
    }
    let tokens: string[];
    if (Array.isArray(obj.tokens)) {
      if (!obj.tokens.every((t: unknown) => typeof t === "string")) {
        throw new Error(`${path}: line ${lineno}: 'tokens' must be strings`);
      }
      tokens = obj.tokens;
    } else if (typeof obj.text === "string") {
      tokens = tokenizeText(obj.text);
    } else {
      throw new Error(`${path}: line ${lineno}: record needs 'tokens' or 'text'`);
    }
    if (seen.has(obj.id)) {
      throw new Error(`${path}: line ${lineno}: duplicate document id ${obj.id}`);
    }
    seen.add(obj.id);
    docs.push({ id: obj.id, tokens });
  }
  if (docs.length === 0) {
    throw new Error(`${path}: empty corpus`);
  }
  return docs;
}
