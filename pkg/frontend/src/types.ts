// Shared types for the review session. The bundle schema is produced by
// the pipeline's export-review command; judgments flow back the other way.

export const BUNDLE_SCHEMA_VERSION = 1;

export const GAP_VERDICTS = ['agree', 'partial', 'disagree'] as const;
export type GapVerdict = (typeof GAP_VERDICTS)[number];

export const DIRECTION_VERDICTS = ['agree', 'disagree', 'not_applicable'] as const;
export type DirectionVerdict = (typeof DIRECTION_VERDICTS)[number];

export const JUSTIFICATION_CODES = [
  'irrelevance',
  'misinterpretation',
  'outdated',
  'technological_limits',
  'budget_constraints',
  'other_group_relevance',
  'other',
] as const;
export type JustificationCode = (typeof JUSTIFICATION_CODES)[number];

export interface BundleItem {
  item_id: string;
  doc_ref: string;
  model_id: string;
  gap: string;
  future_direction: string | null;
  evidence: string | null;
  context_excerpt: string;
  bucket?: string;
}

export interface BundleDocument {
  doc_ref: string;
  items: BundleItem[];
}

export interface Bundle {
  schema_version: number;
  task: string;
  questions: { gap: string; direction: string };
  documents: BundleDocument[];
}

export interface Judgment {
  item_id: string;
  gap_verdict: GapVerdict;
  direction_verdict: DirectionVerdict;
  justification: JustificationCode | null;
  note: string;
  reviewer_tag: string;
  timestamp: string; // ISO-8601
}

export interface JudgmentInput {
  item_id: string;
  gap_verdict: GapVerdict;
  direction_verdict: DirectionVerdict;
  justification?: JustificationCode | null;
  note?: string;
}

export interface Summary {
  n_judgments: number;
  n_items_judged: number;
  gap: Record<GapVerdict, { count: number; fraction: number | null }>;
  direction: Record<'agree' | 'disagree', { count: number; fraction: number | null }>;
  direction_not_applicable: number;
}
