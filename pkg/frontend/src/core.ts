// Session logic, kept DOM-free so it runs under vitest and in the page.
//
// Invariants enforced here:
//   - a disagree verdict (either question) requires a justification code;
//   - one active judgment per (item_id, reviewer_tag), later saves
//     supersede earlier ones with the full history retained;
//   - exports contain the active judgments plus a trailing summary row.

import {
  Bundle,
  BundleItem,
  BUNDLE_SCHEMA_VERSION,
  DIRECTION_VERDICTS,
  GAP_VERDICTS,
  Judgment,
  JudgmentInput,
  JUSTIFICATION_CODES,
  Summary,
} from './types';

export class BundleError extends Error {}
export class ValidationError extends Error {}

export type Clock = () => string;

export const isoClock: Clock = () => new Date().toISOString();

export interface Session {
  bundle: Bundle;
  reviewerTag: string;
  items: BundleItem[];
  /** active judgment per item for this reviewer */
  active: Map<string, Judgment>;
  /** every save ever made, in order, superseded ones included */
  history: Judgment[];
}

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === 'object' && value !== null && !Array.isArray(value);
}

function checkItem(raw: unknown, index: number): BundleItem {
  if (!isRecord(raw)) {
    throw new BundleError(`item #${index} is not an object`);
  }
  const id = raw['item_id'];
  if (typeof id !== 'string' || id.length === 0) {
    throw new BundleError(`item #${index} has no item_id`);
  }
  if (typeof raw['gap'] !== 'string' || raw['gap'].length === 0) {
    throw new BundleError(`item ${id}: missing gap text`);
  }
  const direction = raw['future_direction'];
  if (direction !== null && direction !== undefined && typeof direction !== 'string') {
    throw new BundleError(`item ${id}: future_direction must be text or null`);
  }
  return {
    item_id: id,
    doc_ref: typeof raw['doc_ref'] === 'string' ? raw['doc_ref'] : '',
    model_id: typeof raw['model_id'] === 'string' ? raw['model_id'] : '',
    gap: raw['gap'],
    future_direction: typeof direction === 'string' && direction.length > 0 ? direction : null,
    evidence: typeof raw['evidence'] === 'string' ? raw['evidence'] : null,
    context_excerpt: typeof raw['context_excerpt'] === 'string' ? raw['context_excerpt'] : '',
    bucket: typeof raw['bucket'] === 'string' ? raw['bucket'] : undefined,
  };
}

/** Parse and validate a bundle; refuses the whole file on any bad item. */
export function validateBundle(data: unknown): Bundle {
  if (!isRecord(data)) {
    throw new BundleError('bundle is not a JSON object');
  }
  if (data['schema_version'] !== BUNDLE_SCHEMA_VERSION) {
    throw new BundleError(
      `unsupported bundle schema_version ${String(data['schema_version'])}; ` +
      `this UI supports version ${BUNDLE_SCHEMA_VERSION}`,
    );
  }
  const documentsRaw = data['documents'];
  if (!Array.isArray(documentsRaw)) {
    throw new BundleError('bundle has no documents array');
  }
  let index = 0;
  const documents = documentsRaw.map((doc) => {
    if (!isRecord(doc) || typeof doc['doc_ref'] !== 'string') {
      throw new BundleError('document entry without doc_ref');
    }
    const itemsRaw = Array.isArray(doc['items']) ? doc['items'] : [];
    const items = itemsRaw.map((item) => checkItem(item, index++));
    return { doc_ref: doc['doc_ref'], items };
  });
  const seen = new Set<string>();
  for (const doc of documents) {
    for (const item of doc.items) {
      if (seen.has(item.item_id)) {
        throw new BundleError(`duplicate item_id ${item.item_id}`);
      }
      seen.add(item.item_id);
    }
  }
  const questions = isRecord(data['questions']) ? data['questions'] : {};
  return {
    schema_version: BUNDLE_SCHEMA_VERSION,
    task: typeof data['task'] === 'string' ? data['task'] : '',
    questions: {
      gap: typeof questions['gap'] === 'string'
        ? questions['gap']
        : 'Is the stated knowledge gap factually true for this work?',
      direction: typeof questions['direction'] === 'string'
        ? questions['direction']
        : 'Is the suggested future direction valid and feasible?',
    },
    documents,
  };
}

export function createSession(
  bundle: Bundle,
  reviewerTag: string,
  saved: Judgment[] = [],
): Session {
  const items = bundle.documents.flatMap((d) => d.items);
  const session: Session = {
    bundle,
    reviewerTag,
    items,
    active: new Map(),
    history: [],
  };
  for (const judgment of saved) {
    session.history.push(judgment);
    if (judgment.reviewer_tag === reviewerTag) {
      session.active.set(judgment.item_id, judgment);
    }
  }
  return session;
}

function checkJudgment(session: Session, input: JudgmentInput): void {
  if (!session.items.some((item) => item.item_id === input.item_id)) {
    throw new ValidationError(`unknown item ${input.item_id}`);
  }
  if (!GAP_VERDICTS.includes(input.gap_verdict)) {
    throw new ValidationError(`invalid gap verdict ${String(input.gap_verdict)}`);
  }
  if (!DIRECTION_VERDICTS.includes(input.direction_verdict)) {
    throw new ValidationError(
      `invalid direction verdict ${String(input.direction_verdict)}`,
    );
  }
  const disagree =
    input.gap_verdict === 'disagree' || input.direction_verdict === 'disagree';
  const justification = input.justification ?? null;
  if (disagree && justification === null) {
    throw new ValidationError(
      'a disagree verdict requires a justification code',
    );
  }
  if (justification !== null && !JUSTIFICATION_CODES.includes(justification)) {
    throw new ValidationError(`unknown justification ${String(justification)}`);
  }
}

/** Validate and persist one judgment; supersedes any earlier save for the
 * same item by this reviewer while keeping it in the history. */
export function recordJudgment(
  session: Session,
  input: JudgmentInput,
  clock: Clock = isoClock,
): Judgment {
  checkJudgment(session, input);
  const judgment: Judgment = {
    item_id: input.item_id,
    gap_verdict: input.gap_verdict,
    direction_verdict: input.direction_verdict,
    justification: input.justification ?? null,
    note: input.note ?? '',
    reviewer_tag: session.reviewerTag,
    timestamp: clock(),
  };
  session.history.push(judgment);
  session.active.set(judgment.item_id, judgment);
  return judgment;
}

export function progress(session: Session): { judged: number; total: number } {
  return { judged: session.active.size, total: session.items.length };
}

export function summarize(judgments: Judgment[]): Summary {
  const n = judgments.length;
  const gapCounts = { agree: 0, partial: 0, disagree: 0 };
  const dirCounts = { agree: 0, disagree: 0, not_applicable: 0 };
  for (const j of judgments) {
    gapCounts[j.gap_verdict] += 1;
    dirCounts[j.direction_verdict] += 1;
  }
  const applicable = n - dirCounts.not_applicable;
  const frac = (count: number, total: number) =>
    total > 0 ? count / total : null;
  return {
    n_judgments: n,
    n_items_judged: new Set(judgments.map((j) => j.item_id)).size,
    gap: {
      agree: { count: gapCounts.agree, fraction: frac(gapCounts.agree, n) },
      partial: { count: gapCounts.partial, fraction: frac(gapCounts.partial, n) },
      disagree: { count: gapCounts.disagree, fraction: frac(gapCounts.disagree, n) },
    },
    direction: {
      agree: { count: dirCounts.agree, fraction: frac(dirCounts.agree, applicable) },
      disagree: {
        count: dirCounts.disagree,
        fraction: frac(dirCounts.disagree, applicable),
      },
    },
    direction_not_applicable: dirCounts.not_applicable,
  };
}

/** JSON-lines export: one row per active judgment (sorted for stable
 * output) plus a trailing summary row. */
export function exportJudgments(session: Session): string {
  const judgments = [...session.active.values()].sort((a, b) =>
    a.item_id < b.item_id ? -1 : a.item_id > b.item_id ? 1 : 0,
  );
  if (judgments.length === 0) {
    throw new ValidationError('nothing to export: no judgments recorded');
  }
  const lines = judgments.map((j) => JSON.stringify(j));
  lines.push(JSON.stringify({ summary: summarize(judgments) }));
  return lines.join('\n') + '\n';
}

/** Parse a judgments export (summary rows are skipped); used both to
 * restore sessions and to re-import files coming back from reviewers. */
export function importJudgments(text: string): Judgment[] {
  const judgments: Judgment[] = [];
  text.split('\n').forEach((line, i) => {
    if (line.trim().length === 0) return;
    let row: unknown;
    try {
      row = JSON.parse(line);
    } catch {
      throw new ValidationError(`line ${i + 1}: not valid JSON`);
    }
    if (!isRecord(row)) {
      throw new ValidationError(`line ${i + 1}: not an object`);
    }
    if ('summary' in row && !('item_id' in row)) return;
    const verdict = row['gap_verdict'];
    const direction = row['direction_verdict'] ?? 'not_applicable';
    if (typeof row['item_id'] !== 'string' ||
        !GAP_VERDICTS.includes(verdict as never) ||
        !DIRECTION_VERDICTS.includes(direction as never)) {
      throw new ValidationError(`line ${i + 1}: malformed judgment`);
    }
    const justification = row['justification'] ?? null;
    if (
      (verdict === 'disagree' || direction === 'disagree') &&
      !JUSTIFICATION_CODES.includes(justification as never)
    ) {
      throw new ValidationError(
        `line ${i + 1}: disagree verdict without justification`,
      );
    }
    judgments.push({
      item_id: row['item_id'],
      gap_verdict: verdict as Judgment['gap_verdict'],
      direction_verdict: direction as Judgment['direction_verdict'],
      justification: (justification as Judgment['justification']) ?? null,
      note: typeof row['note'] === 'string' ? row['note'] : '',
      reviewer_tag:
        typeof row['reviewer_tag'] === 'string' ? row['reviewer_tag'] : 'anonymous',
      timestamp: typeof row['timestamp'] === 'string' ? row['timestamp'] : '',
    });
  });
  return judgments;
}

/** Stable fingerprint used as the persistence key for a bundle. */
export function bundleKey(bundle: Bundle): string {
  const ids = bundle.documents.flatMap((d) => d.items.map((i) => i.item_id));
  let hash = 5381;
  const text = bundle.task + '|' + ids.join('|');
  for (let i = 0; i < text.length; i++) {
    hash = ((hash << 5) + hash + text.charCodeAt(i)) | 0;
  }
  return `gap-review:${(hash >>> 0).toString(16)}:${ids.length}`;
}
