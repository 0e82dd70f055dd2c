#!/usr/bin/env node
/**
 * export --model <name> --corpus c.jsonl --out c.kpe1 [--limit 512]
 *
 * Runs the pretrained encoder over the corpus and writes KPE1 plus a
 * .json provenance sidecar next to it.
 */

import { TransformersJsEncoder } from "./encoder.js";
import { exportCorpus } from "./exporter.js";

interface CliArgs {
  model: string;
  corpus: string;
  out: string;
  limit: number;
  layer: string;
}

function parseArgs(argv: string[]): CliArgs {
  const args: Record<string, string> = {};
  let command = "";
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      command = arg;
      continue;
    }
    const key = arg.slice(2);
    const value = argv[i + 1];
    if (value === undefined || value.startsWith("--")) {
      throw new Error(`missing value for --${key}`);
    }
    args[key] = value;
    i++;
  }
  if (command && command !== "export") {
    throw new Error(`unknown command ${command}; only 'export' is supported`);
  }
  for (const required of ["model", "corpus", "out"]) {
    if (!(required in args)) {
      throw new Error(`--${required} is required`);
    }
  }
  return {
    model: args.model,
    corpus: args.corpus,
    out: args.out,
    limit: args.limit ? parseInt(args.limit, 10) : 512,
    layer: args.layer ?? "last",
  };
}

async function main(): Promise<number> {
  let cli: CliArgs;
  try {
    cli = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error(`export: ${(err as Error).message}`);
    console.error(
      "usage: export --model <name> --corpus <file.jsonl> --out <file.kpe1> [--limit 512] [--layer last]",
    );
    return 2;
  }
  try {
    const encoder = new TransformersJsEncoder(cli.model, cli.layer);
    await encoder.init();
    const result = await exportCorpus(
      { corpusPath: cli.corpus, outputPath: cli.out, limit: cli.limit },
      encoder,
    );
    for (const warning of result.warnings) {
      console.warn(`warning: ${warning}`);
    }
    console.log(
      `wrote ${result.rows} rows (${result.documents} documents, d=${result.dimension}) ` +
        `to ${result.outputPath}; sidecar ${result.sidecarPath}`,
    );
    return 0;
  } catch (err) {
    console.error(`export: error: ${(err as Error).message}`);
    return 1;
  }
}

main().then((code) => {
  process.exitCode = code;
});
