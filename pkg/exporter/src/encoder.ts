/**
 * Encoders turn a window of words into per-word groups of sub-word
 * hidden-state vectors (the selected layer's states, one vector per
 * sub-word, grouped by the word they belong to).
 *
 * The production implementation wraps a pretrained transformer via
 * @xenova/transformers. Words are aligned to sub-words by tokenizing
 * each word separately and concatenating (with the tokenizer's special
 * tokens around the window), which guarantees the one-group-per-word
 * invariant for any tokenizer. A word that yields zero sub-words gets
 * an empty group; the exporter pools it to the zero vector and warns.
 */

export interface Encoder {
  readonly modelName: string;
  readonly hiddenSize: number;
  readonly layer: string;
  /** Per-word sub-word vectors for one window of words. */
  encode(words: string[]): Promise<Float32Array[][]>;
}

interface SpecialTokens {
  prefix: number[];
  suffix: number[];
}

export class TransformersJsEncoder implements Encoder {
  readonly modelName: string;
  readonly layer: string;
  hiddenSize = 0;

  private tokenizer: any;
  private model: any;
  private specials: SpecialTokens = { prefix: [], suffix: [] };
  private maxPositions = 512;
  private transformers: any;

  constructor(modelName: string, layer = "last") {
    if (layer !== "last") {
      throw new Error(
        `unsupported layer selection ${layer!}; only the final hidden layer is available`,
      );
    }
    this.modelName = modelName;
    this.layer = layer;
  }

  async init(): Promise<void> {
    try {
      this.transformers = await import("@xenova/transformers");
    } catch (err) {
      throw new Error(
        "@xenova/transformers is not installed or not functional " +
          "(it needs a networked `npm install` for its native image " +
          `dependency): ${(err as Error).message.split("\n")[0]}`,
      );
    }
    const { AutoTokenizer, AutoModel } = this.transformers;
    this.tokenizer = await AutoTokenizer.from_pretrained(this.modelName);
    this.model = await AutoModel.from_pretrained(this.modelName);
    const config = this.model.config ?? {};
    this.hiddenSize = config.hidden_size ?? config.d_model ?? 0;
    this.maxPositions = config.max_position_embeddings ?? 512;
    this.specials = await this.discoverSpecialTokens();
  }

  private async wordIds(word: string): Promise<number[]> {
    const encoded = this.tokenizer(word, { add_special_tokens: false });
    return Array.from(encoded.input_ids.data as BigInt64Array, (v: bigint) => Number(v));
  }

  private async discoverSpecialTokens(): Promise<SpecialTokens> {
    const probe = "x";
    const bare = await this.wordIds(probe);
    const wrapped = this.tokenizer(probe, { add_special_tokens: true });
    const full = Array.from(wrapped.input_ids.data as BigInt64Array, (v: bigint) => Number(v));
    if (bare.length === 0) {
      return { prefix: [], suffix: [] };
    }
    for (let start = 0; start + bare.length <= full.length; start++) {
      if (bare.every((id, i) => full[start + i] === id)) {
        return { prefix: full.slice(0, start), suffix: full.slice(start + bare.length) };
      }
    }
    return { prefix: [], suffix: [] };
  }

  private async runModel(ids: number[]): Promise<Float32Array[]> {
    const { Tensor } = this.transformers;
    const inputIds = new Tensor(
      "int64",
      BigInt64Array.from(ids.map((v) => BigInt(v))),
      [1, ids.length],
    );
    const attention = new Tensor(
      "int64",
      BigInt64Array.from(ids.map(() => 1n)),
      [1, ids.length],
    );
    const output = await this.model({ input_ids: inputIds, attention_mask: attention });
    const hidden = output.last_hidden_state;
    const [, seqLen, dim] = hidden.dims;
    const data = hidden.data as Float32Array;
    const states: Float32Array[] = [];
    for (let t = 0; t < seqLen; t++) {
      states.push(data.slice(t * dim, (t + 1) * dim));
    }
    return states;
  }

  async encode(words: string[]): Promise<Float32Array[][]> {
    const perWord: number[][] = [];
    for (const word of words) {
      perWord.push(await this.wordIds(word));
    }
    const total =
      perWord.reduce((acc, ids) => acc + ids.length, 0) +
      this.specials.prefix.length +
      this.specials.suffix.length;
    if (total > this.maxPositions && words.length > 1) {
      // window exceeds the model's positional capacity: split at the
      // word midpoint so every word keeps exactly one group
      const mid = Math.floor(words.length / 2);
      const left = await this.encode(words.slice(0, mid));
      const right = await this.encode(words.slice(mid));
      return [...left, ...right];
    }
    const ids = [
      ...this.specials.prefix,
      ...perWord.flat(),
      ...this.specials.suffix,
    ];
    const states = await this.runModel(ids);
    const groups: Float32Array[][] = [];
    let cursor = this.specials.prefix.length;
    for (const wordIds of perWord) {
      groups.push(states.slice(cursor, cursor + wordIds.length));
      cursor += wordIds.length;
    }
    return groups;
  }
}
