/** JSON Lines helpers matching revrank's canonical output conventions. */
import { createReadStream } from 'node:fs';
import { writeFile } from 'node:fs/promises';
import { createInterface } from 'node:readline';

export async function readJsonl(path: string): Promise<Array<{ lineNo: number; obj: unknown }>> {
  const records: Array<{ lineNo: number; obj: unknown }> = [];
  const reader = createInterface({ input: createReadStream(path, 'utf-8'), crlfDelay: Infinity });
  let lineNo = 0;
  for await (const line of reader) {
    lineNo += 1;
    if (!line.trim()) continue;
    let obj: unknown;
    try {
      obj = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}:${lineNo}: invalid JSON: ${String(err)}`);
    }
    records.push({ lineNo, obj });
  }
  return records;
}

/** Stable key order so repeated runs produce identical bytes. */
export function canonicalLine(obj: unknown): string {
  return JSON.stringify(sortKeys(obj));
}

function sortKeys(value: unknown): unknown {
  if (Array.isArray(value)) return value.map(sortKeys);
  if (value !== null && typeof value === 'object') {
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(value as Record<string, unknown>).sort()) {
      out[key] = sortKeys((value as Record<string, unknown>)[key]);
    }
    return out;
  }
  return value;
}

export async function writeJsonl(path: string, records: unknown[]): Promise<void> {
  const body = records.map((r) => canonicalLine(r)).join('\n');
  await writeFile(path, body.length ? body + '\n' : '', 'utf-8');
}
