/**
 * Mean-word pooling: a word's embedding is the per-dimension mean of
 * its sub-words' hidden states. Words that tokenize to zero sub-words
 * (rare control characters) receive the zero vector; the caller is
 * expected to warn about them.
 */

export function meanPool(group: Float32Array[], dimension: number): Float32Array {
  const out = new Float32Array(dimension);
  if (group.length === 0) {
    return out;
  }
  for (const vec of group) {
    if (vec.length !== dimension) {
      throw new Error(`sub-word vector has ${vec.length} values, expected ${dimension}`);
    }
    for (let i = 0; i < dimension; i++) {
      out[i] += vec[i];
    }
  }
  for (let i = 0; i < dimension; i++) {
    out[i] /= group.length;
  }
  return out;
}

export function poolWordGroups(groups: Float32Array[][], dimension: number): Float32Array[] {
  return groups.map((group) => meanPool(group, dimension));
}
