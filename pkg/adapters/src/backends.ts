/**
 * Scoring backends.
 *
 * `hash:<dim>` is a fully deterministic, dependency-free stand-in: char
 * trigram hashing for sentence embeddings and a hashed bigram table for
 * token probabilities.  It exists so pipelines (and this package's tests)
 * run hermetically; scores are meaningless but stable and schema-correct.
 *
 * `xenova:<model-id>` loads a real checkpoint through @xenova/transformers
 * (an optional dependency, imported lazily): a causal LM for per-token
 * probabilities and a feature-extraction pipeline for sentence vectors.
 */

export interface ScoringBackend {
  readonly name: string;
  /** Probability of each whitespace token, each in (0, 1]. */
  tokenProbs(text: string): Promise<number[]>;
  /** Sentence/label similarity in [-1, 1]. */
  similarity(a: string, b: string): Promise<number>;
}

function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

export function tokenize(text: string): string[] {
  return text.toLowerCase().split(/\s+/u).filter((t) => t.length > 0);
}

function hashEmbedding(text: string, dim: number): Float64Array {
  const vec = new Float64Array(dim);
  const padded = ` ${tokenize(text).join(' ')} `;
  for (let i = 0; i + 3 <= padded.length; i++) {
    const h = fnv1a(padded.slice(i, i + 3));
    const bucket = h % dim;
    const sign = (h >>> 16) & 1 ? 1 : -1;
    vec[bucket] += sign;
  }
  let norm = 0;
  for (const v of vec) norm += v * v;
  if (norm > 0) {
    norm = Math.sqrt(norm);
    for (let i = 0; i < dim; i++) vec[i] /= norm;
  }
  return vec;
}

export function cosine(a: Float64Array, b: Float64Array): number {
  let dot = 0;
  let na = 0;
  let nb = 0;
  for (let i = 0; i < a.length; i++) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na === 0 || nb === 0) return 0;
  return dot / (Math.sqrt(na) * Math.sqrt(nb));
}

class HashBackend implements ScoringBackend {
  readonly name: string;
  private readonly dim: number;

  constructor(dim: number) {
    if (!Number.isInteger(dim) || dim < 8) {
      throw new Error(`hash backend dimension must be an integer >= 8, got ${dim}`);
    }
    this.dim = dim;
    this.name = `hash:${dim}`;
  }

  async tokenProbs(text: string): Promise<number[]> {
    const tokens = tokenize(text);
    let previous = '<s>';
    return tokens.map((token) => {
      const h = fnv1a(`${previous}${token}`);
      previous = token;
      // map the 32-bit hash into [0.05, 0.95]: strictly inside (0, 1]
      return 0.05 + 0.9 * (h / 0xffffffff);
    });
  }

  async similarity(a: string, b: string): Promise<number> {
    const value = cosine(hashEmbedding(a, this.dim), hashEmbedding(b, this.dim));
    return Math.max(-1, Math.min(1, value));
  }
}

class XenovaBackend implements ScoringBackend {
  readonly name: string;
  private readonly modelId: string;
  private lm: any = null;
  private extractor: any = null;

  constructor(modelId: string) {
    this.modelId = modelId;
    this.name = `xenova:${modelId}`;
  }

  private async transformers(): Promise<any> {
    try {
      return await import('@xenova/transformers');
    } catch (err) {
      throw new Error(
        `backend ${this.name} needs the optional dependency @xenova/transformers ` +
        `(npm install @xenova/transformers): ${String(err)}`,
      );
    }
  }

  async tokenProbs(text: string): Promise<number[]> {
    const { AutoTokenizer, AutoModelForCausalLM, softmax } = await this.transformers();
    if (this.lm === null) {
      const tokenizer = await AutoTokenizer.from_pretrained(this.modelId);
      const model = await AutoModelForCausalLM.from_pretrained(this.modelId);
      this.lm = { tokenizer, model };
    }
    const { tokenizer, model } = this.lm;
    const encoded = await tokenizer(text);
    const { logits } = await model(encoded);
    const ids: bigint[] = Array.from(encoded.input_ids.data);
    const [, seq, vocab] = logits.dims;
    const probs: number[] = [];
    // probability of token i given tokens < i; the first token has no
    // context, so score it as 1 (carries no information)
    probs.push(1.0);
    for (let i = 1; i < seq; i++) {
      const row = logits.data.slice((i - 1) * vocab, i * vocab);
      const dist = softmax(Array.from(row));
      probs.push(Math.max(dist[Number(ids[i])], Number.MIN_VALUE));
    }
    return probs;
  }

  async similarity(a: string, b: string): Promise<number> {
    const { pipeline } = await this.transformers();
    if (this.extractor === null) {
      this.extractor = await pipeline('feature-extraction', this.modelId);
    }
    const out = await this.extractor([a, b], { pooling: 'mean', normalize: true });
    const [va, vb] = out.tolist();
    let dot = 0;
    for (let i = 0; i < va.length; i++) dot += va[i] * vb[i];
    return Math.max(-1, Math.min(1, dot));
  }
}

export function resolveBackend(spec: string): ScoringBackend {
  const [kind, ...rest] = spec.split(':');
  const arg = rest.join(':');
  if (kind === 'hash') {
    return new HashBackend(arg ? Number(arg) : 64);
  }
  if (kind === 'xenova') {
    if (!arg) throw new Error('xenova backend needs a model id: xenova:<model-id>');
    return new XenovaBackend(arg);
  }
  throw new Error(`unknown backend ${spec}; use hash:<dim> or xenova:<model-id>`);
}
