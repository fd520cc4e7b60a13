/**
 * The two export jobs.
 *
 * Both read a revrank candidates file, score it with the selected backend,
 * and write a file in one of the primary tool's input schemas.  Neither
 * performs any revision math: adapters only manufacture inputs.
 */
import { ScoringBackend } from './backends.js';
import { readJsonl, writeJsonl } from './jsonl.js';
import {
  NBestRecord,
  SimilarityRecord,
  assertContiguousRanks,
  recordSchema,
  scoredRecordSchema,
  similaritySchema,
} from './schemas.js';

export interface ExportJob {
  candidatesPath: string;
  outPath: string;
  backend: ScoringBackend;
  batchSize: number;
}

export interface ExportReport {
  records: number;
  written: number;
  skipped: Array<{ image_id: string; reason: string }>;
}

export async function loadCandidates(path: string): Promise<NBestRecord[]> {
  const rows = await readJsonl(path);
  const records: NBestRecord[] = [];
  for (const { lineNo, obj } of rows) {
    if (typeof obj === 'object' && obj !== null && 'provenance' in (obj as object)) {
      continue; // revrank output files carry a leading provenance line
    }
    const parsed = recordSchema.safeParse(obj);
    if (!parsed.success) {
      throw new Error(`${path}:${lineNo}: ${parsed.error.issues[0]?.message ?? 'bad record'}`);
    }
    assertContiguousRanks(parsed.data);
    records.push(parsed.data);
  }
  if (records.length === 0) throw new Error(`${path}: no candidate records`);
  return records;
}

function warn(report: ExportReport, imageId: string, reason: string): void {
  report.skipped.push({ image_id: imageId, reason });
  process.stderr.write(JSON.stringify({ warning: reason, image_id: imageId }) + '\n');
}

/** Attach per-token probabilities to every candidate of every record. */
export async function exportTokenProbs(job: ExportJob): Promise<ExportReport> {
  const records = await loadCandidates(job.candidatesPath);
  const report: ExportReport = { records: records.length, written: 0, skipped: [] };
  const out: NBestRecord[] = [];
  for (const record of records) {
    if (record.candidates.some((c) => c.text.trim().length === 0)) {
      warn(report, record.image_id, 'empty caption text; record skipped');
      continue;
    }
    const candidates = [];
    for (const candidate of record.candidates) {
      const token_probs = await job.backend.tokenProbs(candidate.text);
      candidates.push({ ...candidate, token_probs });
    }
    out.push({ ...record, candidates });
  }
  for (const record of out) {
    const check = scoredRecordSchema.safeParse(record);
    if (!check.success) {
      throw new Error(
        `output validation failed for ${record.image_id}: ` +
        `${check.error.issues[0]?.message ?? 'unknown'}`,
      );
    }
  }
  await writeJsonl(job.outPath, out);
  report.written = out.length;
  return report;
}

/** One similarity record per (candidate, context) pair, deduplicated. */
export async function exportSimilarities(job: ExportJob): Promise<ExportReport> {
  const records = await loadCandidates(job.candidatesPath);
  const report: ExportReport = { records: records.length, written: 0, skipped: [] };
  const out: SimilarityRecord[] = [];
  const seen = new Set<string>();
  for (const record of records) {
    for (const context of record.contexts) {
      if (context.label.trim().length === 0) {
        throw new Error(`record ${record.image_id}: empty context label`);
      }
      for (const candidate of record.candidates) {
        const key = `${record.image_id}${candidate.rank}${context.label}`;
        if (seen.has(key)) continue;
        seen.add(key);
        const sim = await job.backend.similarity(candidate.text, context.label);
        out.push({
          image_id: record.image_id,
          candidate_rank: candidate.rank,
          context: context.label,
          sim,
        });
      }
    }
  }
  for (const row of out) {
    const check = similaritySchema.safeParse(row);
    if (!check.success) {
      throw new Error(`output validation failed: ${JSON.stringify(row)}`);
    }
  }
  await writeJsonl(job.outPath, out);
  report.written = out.length;
  return report;
}

/** --validate-only: check a file against a named schema without scoring. */
export async function validateFile(
  path: string,
  kind: 'candidates' | 'token-probs' | 'similarities',
): Promise<number> {
  if (kind === 'similarities') {
    const rows = await readJsonl(path);
    let count = 0;
    for (const { lineNo, obj } of rows) {
      const parsed = similaritySchema.safeParse(obj);
      if (!parsed.success) {
        throw new Error(`${path}:${lineNo}: ${parsed.error.issues[0]?.message}`);
      }
      count += 1;
    }
    return count;
  }
  const records = await loadCandidates(path);
  if (kind === 'token-probs') {
    for (const record of records) {
      const check = scoredRecordSchema.safeParse(record);
      if (!check.success) {
        throw new Error(
          `${path}: record ${record.image_id} lacks valid token_probs`);
      }
    }
  }
  return records.length;
}
