/**
 * KPE1 binary interchange format (little-endian):
 *   magic "KPE1", uint32 dimension, then per document:
 *   uint32 id byte length, UTF-8 id, uint32 token count n,
 *   n * d float32 values row-major.
 */

export const KPE1_MAGIC = Buffer.from("KPE1", "ascii");

export interface DocEmbedding {
  docId: string;
  rows: Float32Array[]; // one row per word, each of length d
}

export function encodeKpe1(dimension: number, docs: Iterable<DocEmbedding>): Buffer {
  const parts: Buffer[] = [];
  parts.push(KPE1_MAGIC);
  const dim = Buffer.alloc(4);
  dim.writeUInt32LE(dimension, 0);
  parts.push(dim);
  for (const doc of docs) {
    const idBytes = Buffer.from(doc.docId, "utf-8");
    const head = Buffer.alloc(4);
    head.writeUInt32LE(idBytes.length, 0);
    parts.push(head, idBytes);
    const count = Buffer.alloc(4);
    count.writeUInt32LE(doc.rows.length, 0);
    parts.push(count);
    for (const row of doc.rows) {
      if (row.length !== dimension) {
        throw new Error(
          `document ${doc.docId}: row has ${row.length} values, expected ${dimension}`,
        );
      }
      const buf = Buffer.alloc(4 * dimension);
      for (let i = 0; i < dimension; i++) {
        buf.writeFloatLE(row[i], 4 * i);
      }
      parts.push(buf);
    }
  }
  return Buffer.concat(parts);
}

export function decodeKpe1(data: Buffer): { dimension: number; docs: Map<string, Float32Array[]> } {
  if (data.length < 8 || !data.subarray(0, 4).equals(KPE1_MAGIC)) {
    throw new Error("not a KPE1 file (bad magic)");
  }
  const dimension = data.readUInt32LE(4);
  const docs = new Map<string, Float32Array[]>();
  let offset = 8;
  while (offset < data.length) {
    const idLen = data.readUInt32LE(offset);
    offset += 4;
    const docId = data.subarray(offset, offset + idLen).toString("utf-8");
    offset += idLen;
    const n = data.readUInt32LE(offset);
    offset += 4;
    const rows: Float32Array[] = [];
    for (let t = 0; t < n; t++) {
      if (offset + 4 * dimension > data.length) {
        throw new Error(`truncated rows for document ${docId}`);
      }
      const row = new Float32Array(dimension);
      for (let i = 0; i < dimension; i++) {
        row[i] = data.readFloatLE(offset + 4 * i);
      }
      rows.push(row);
      offset += 4 * dimension;
    }
    docs.set(docId, rows);
  }
  return { dimension, docs };
}
