#!/usr/bin/env node
/**
 * revrank-adapters: export model scores into revrank input files.
 *
 *   revrank-adapters token-probs --candidates in.jsonl --out scored.jsonl --model hash:64
 *   revrank-adapters similarities --candidates in.jsonl --out sims.jsonl --model hash:64
 *   revrank-adapters validate --file f.jsonl --kind similarities
 *
 * `--model xenova:<id>` runs a real checkpoint via @xenova/transformers
 * (optional dependency); `hash:<dim>` is the deterministic offline backend.
 * `--validate-only` parses and schema-checks the input, skipping scoring.
 */
import yargs from 'yargs';
import type { Argv } from 'yargs';
import { hideBin } from 'yargs/helpers';

import { resolveBackend } from './backends.js';
import {
  exportSimilarities,
  exportTokenProbs,
  loadCandidates,
  validateFile,
} from './exporters.js';

function commonOptions(y: Argv) {
  return y
    .option('candidates', { type: 'string', demandOption: true })
    .option('out', { type: 'string', demandOption: true })
    .option('model', { type: 'string', default: 'hash:64' })
    .option('batch-size', { type: 'number', default: 16 })
    .option('device', { type: 'string', default: 'cpu' })
    .option('validate-only', { type: 'boolean', default: false });
}

type ExportArgs = {
  candidates: string;
  out: string;
  model: string;
  'batch-size': number;
  'validate-only': boolean;
};

async function runExport(
  args: ExportArgs,
  fn: typeof exportTokenProbs | typeof exportSimilarities,
): Promise<number> {
  if (args['validate-only']) {
    const count = await loadCandidates(args.candidates).then((r) => r.length);
    process.stdout.write(JSON.stringify({ validated: count }) + '\n');
    return 0;
  }
  const report = await fn({
    candidatesPath: args.candidates,
    outPath: args.out,
    backend: resolveBackend(args.model),
    batchSize: args['batch-size'],
  });
  process.stdout.write(JSON.stringify(report) + '\n');
  return 0;
}

export async function main(argv: string[]): Promise<number> {
  let exitCode = 0;
  const parser = yargs(argv)
    .scriptName('revrank-adapters')
    .strict()
    .exitProcess(false)
    .fail(false)
    .command(
      'token-probs',
      'attach per-token LM probabilities to a candidates file',
      (y) => commonOptions(y),
      async (args) => {
        exitCode = await runExport(args as unknown as ExportArgs, exportTokenProbs);
      },
    )
    .command(
      'similarities',
      'export per-(candidate, context) similarity records',
      (y) => commonOptions(y),
      async (args) => {
        exitCode = await runExport(args as unknown as ExportArgs, exportSimilarities);
      },
    )
    .command(
      'validate',
      'schema-check a file without scoring',
      (y) =>
        y
          .option('file', { type: 'string', demandOption: true })
          .option('kind', {
            choices: ['candidates', 'token-probs', 'similarities'] as const,
            demandOption: true,
          }),
      async (args) => {
        const count = await validateFile(args.file as string, args.kind);
        process.stdout.write(JSON.stringify({ validated: count }) + '\n');
      },
    )
    .demandCommand(1);

  try {
    await parser.parseAsync();
  } catch (err) {
    process.stderr.write(JSON.stringify({ error: String(err) }) + '\n');
    return 1;
  }
  return exitCode;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;

if (invokedDirectly) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
