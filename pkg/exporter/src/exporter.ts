/**
 * Export pipeline: corpus JSONL -> per-word pooled embeddings -> KPE1
 * file plus a JSON provenance sidecar. Over-length documents are
 * processed window by window (stride = window), so every corpus token
 * receives exactly one pooled vector.
 */

import { writeFileSync } from "node:fs";

import { chunkWords } from "./chunk.js";
import { loadCorpus } from "./corpus.js";
import { Encoder } from "./encoder.js";
import { DocEmbedding, encodeKpe1 } from "./kpe1.js";
import { poolWordGroups } from "./pool.js";

export interface ExportJob {
  corpusPath: string;
  outputPath: string;
  limit: number; // words per window
}

export interface ExportResult {
  documents: number;
  rows: number;
  dimension: number;
  outputPath: string;
  sidecarPath: string;
  warnings: string[];
}

export async function exportCorpus(job: ExportJob, encoder: Encoder): Promise<ExportResult> {
  const docs = loadCorpus(job.corpusPath);
  const warnings: string[] = [];
  const embedded: DocEmbedding[] = [];
  let totalRows = 0;
  for (const doc of docs) {
    const rows: Float32Array[] = [];
    for (const span of chunkWords(doc.tokens.length, job.limit)) {
      const words = doc.tokens.slice(span.start, span.end);
      const groups = await encoder.encode(words);
      if (groups.length !== words.length) {
        throw new Error(
          `tokenizer/word misalignment in document ${doc.id}: ` +
            `${groups.length} groups for ${words.length} words ` +
            `(window ${span.start}..${span.end})`,
        );
      }
      groups.forEach((group, i) => {
        if (group.length === 0) {
          warnings.push(
            `document ${doc.id}: word ${span.start + i} (${JSON.stringify(
              words[i],
            )}) produced no sub-words; writing a zero vector`,
          );
        }
      });
      rows.push(...poolWordGroups(groups, encoder.hiddenSize));
    }
    if (rows.length !== doc.tokens.length) {
      throw new Error(
        `document ${doc.id}: produced ${rows.length} rows for ${doc.tokens.length} tokens`,
      );
    }
    totalRows += rows.length;
    embedded.push({ docId: doc.id, rows });
  }
  writeFileSync(job.outputPath, encodeKpe1(encoder.hiddenSize, embedded));
  const sidecarPath = job.outputPath + ".json";
  const sidecar = {
    model: encoder.modelName,
    layer: encoder.layer,
    dimension: encoder.hiddenSize,
    chunk_limit_words: job.limit,
    stride_equals_window: true,
    alignment: "per-word tokenization",
    documents: embedded.length,
    rows: totalRows,
    warnings,
  };
  writeFileSync(sidecarPath, JSON.stringify(sidecar, null, 2) + "\n");
  return {
    documents: embedded.length,
    rows: totalRows,
    dimension: encoder.hiddenSize,
    outputPath: job.outputPath,
    sidecarPath,
    warnings,
  };
}
