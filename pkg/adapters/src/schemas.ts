/**
 * Zod schemas for the JSONL formats shared with the revrank CLI.
 *
 * A job only reports success after its own output validates against these,
 * so a consumer never sees a malformed file from an adapter run.
 */
import { z } from 'zod';

export const contextSchema = z.object({
  label: z.string().min(1),
  confidence: z.number().min(0).max(1),
  lm_prob: z.number().gt(0).lt(1).optional(),
});

export const candidateSchema = z.object({
  rank: z.number().int().min(0),
  text: z.string(),
  prior: z.number().gt(0).lt(1),
  token_probs: z.array(z.number().gt(0).max(1)).optional(),
});

export const recordSchema = z.object({
  image_id: z.string().min(1),
  candidates: z.array(candidateSchema).min(1),
  contexts: z.array(contextSchema).default([]),
});

export const scoredCandidateSchema = candidateSchema.extend({
  token_probs: z.array(z.number().gt(0).max(1)).min(1),
});

export const scoredRecordSchema = recordSchema.extend({
  candidates: z.array(scoredCandidateSchema).min(1),
});

export const similaritySchema = z.object({
  image_id: z.string().min(1),
  candidate_rank: z.number().int().min(0),
  context: z.string().min(1),
  sim: z.number().min(-1).max(1),
});

export type NBestRecord = z.infer<typeof recordSchema>;
export type SimilarityRecord = z.infer<typeof similaritySchema>;

/** Ranks must be unique and contiguous from 0 or revrank refuses the file. */
export function assertContiguousRanks(record: NBestRecord): void {
  const ranks = record.candidates.map((c) => c.rank).sort((a, b) => a - b);
  for (let i = 0; i < ranks.length; i++) {
    if (ranks[i] !== i) {
      throw new Error(`record ${record.image_id}: ranks not contiguous from 0`);
    }
  }
}
