import { describe, expect, it } from 'vitest';

import {
  BundleError,
  ValidationError,
  bundleKey,
  createSession,
  exportJudgments,
  importJudgments,
  progress,
  recordJudgment,
  summarize,
  validateBundle,
} from '../src/core';
import { loadSaved, persist } from '../src/storage';
import type { Judgment } from '../src/types';

const fixedClock = () => '2024-06-01T00:00:00.000Z';

function makeBundle(nItems = 6): unknown {
  const items = Array.from({ length: nItems }, (_, i) => ({
    item_id: `doc1#model#${String(i).padStart(3, '0')}`,
    doc_ref: 'doc1',
    model_id: 'model',
    gap: `Gap statement number ${i}.`,
    future_direction: i % 2 === 0 ? `Direction ${i}.` : null,
    evidence: i % 3 === 0 ? `Evidence ${i}.` : null,
    context_excerpt: 'Some context text.',
  }));
  return {
    schema_version: 1,
    task: 'implicit_fulltext',
    questions: { gap: 'Gap true?', direction: 'Direction valid?' },
    documents: [{ doc_ref: 'doc1', items }],
  };
}

function judgedSession(verdicts: Array<'agree' | 'partial' | 'disagree'>) {
  const session = createSession(validateBundle(makeBundle(verdicts.length)), 'rev1');
  verdicts.forEach((verdict, i) => {
    recordJudgment(
      session,
      {
        item_id: session.items[i]!.item_id,
        gap_verdict: verdict,
        direction_verdict: 'agree',
        justification: verdict === 'disagree' ? 'misinterpretation' : null,
      },
      fixedClock,
    );
  });
  return session;
}

describe('validateBundle', () => {
  it('accepts a six-item bundle and starts at 0/6', () => {
    const session = createSession(validateBundle(makeBundle(6)), 'rev1');
    expect(progress(session)).toEqual({ judged: 0, total: 6 });
  });

  it('refuses a malformed item and names it', () => {
    const raw = makeBundle(3) as { documents: Array<{ items: unknown[] }> };
    raw.documents[0]!.items[1] = {
      item_id: 'doc1#model#001',
      doc_ref: 'doc1',
      model_id: 'model',
      // gap text missing
      future_direction: null,
      context_excerpt: '',
    };
    expect(() => validateBundle(raw)).toThrowError(BundleError);
    expect(() => validateBundle(raw)).toThrowError(/doc1#model#001/);
  });

  it('refuses an unsupported schema version', () => {
    const raw = makeBundle(1) as { schema_version: number };
    raw.schema_version = 99;
    expect(() => validateBundle(raw)).toThrowError(/schema_version/);
  });

  it('refuses duplicate item ids', () => {
    const raw = makeBundle(2) as {
      documents: Array<{ items: Array<{ item_id: string }> }>;
    };
    raw.documents[0]!.items[1]!.item_id = raw.documents[0]!.items[0]!.item_id;
    expect(() => validateBundle(raw)).toThrowError(/duplicate/);
  });
});

describe('recordJudgment', () => {
  it('saves agree/agree without justification', () => {
    const session = createSession(validateBundle(makeBundle(2)), 'rev1');
    const judgment = recordJudgment(
      session,
      {
        item_id: session.items[0]!.item_id,
        gap_verdict: 'agree',
        direction_verdict: 'agree',
      },
      fixedClock,
    );
    expect(judgment.justification).toBeNull();
    expect(progress(session).judged).toBe(1);
  });

  it('rejects disagree without justification on either question', () => {
    const session = createSession(validateBundle(makeBundle(2)), 'rev1');
    const base = { item_id: session.items[0]!.item_id } as const;
    expect(() =>
      recordJudgment(session, {
        ...base, gap_verdict: 'disagree', direction_verdict: 'agree',
      }),
    ).toThrowError(ValidationError);
    expect(() =>
      recordJudgment(session, {
        ...base, gap_verdict: 'agree', direction_verdict: 'disagree',
      }),
    ).toThrowError(/justification/);
    expect(progress(session).judged).toBe(0);
  });

  it('keeps partial verdicts and notes for export', () => {
    const session = createSession(validateBundle(makeBundle(1)), 'rev1');
    recordJudgment(
      session,
      {
        item_id: session.items[0]!.item_id,
        gap_verdict: 'partial',
        direction_verdict: 'not_applicable',
        note: 'true but already being addressed',
      },
      fixedClock,
    );
    const exported = exportJudgments(session);
    expect(exported).toContain('"partial"');
    expect(exported).toContain('true but already being addressed');
  });

  it('supersedes earlier saves and retains history', () => {
    const session = createSession(validateBundle(makeBundle(1)), 'rev1');
    const id = session.items[0]!.item_id;
    recordJudgment(session, {
      item_id: id, gap_verdict: 'agree', direction_verdict: 'agree',
    }, fixedClock);
    recordJudgment(session, {
      item_id: id, gap_verdict: 'partial', direction_verdict: 'agree',
    }, fixedClock);
    expect(session.active.get(id)!.gap_verdict).toBe('partial');
    expect(session.history).toHaveLength(2);
    expect(progress(session)).toEqual({ judged: 1, total: 1 });
  });

  it('rejects judgments for unknown items', () => {
    const session = createSession(validateBundle(makeBundle(1)), 'rev1');
    expect(() =>
      recordJudgment(session, {
        item_id: 'ghost', gap_verdict: 'agree', direction_verdict: 'agree',
      }),
    ).toThrowError(/unknown item/);
  });
});

describe('export and summary', () => {
  it('five agree plus one disagree summarize to 83.3% agreement', () => {
    const session = judgedSession([
      'agree', 'agree', 'agree', 'agree', 'agree', 'disagree',
    ]);
    const exported = exportJudgments(session);
    const lines = exported.trim().split('\n');
    expect(lines).toHaveLength(7); // 6 judgments + summary row
    const summaryRow = JSON.parse(lines[6]!) as {
      summary: { gap: { agree: { fraction: number } } };
    };
    const fraction = summaryRow.summary.gap.agree.fraction;
    expect((fraction * 100).toFixed(1)).toBe('83.3');
  });

  it('export with no judgments is refused', () => {
    const session = createSession(validateBundle(makeBundle(2)), 'rev1');
    expect(() => exportJudgments(session)).toThrowError(/no judgments/);
  });

  it('every exported disagree carries a justification code', () => {
    const session = judgedSession(['disagree', 'agree', 'disagree']);
    const rows = exportJudgments(session)
      .trim()
      .split('\n')
      .map((line) => JSON.parse(line) as Partial<Judgment>)
      .filter((row) => row.item_id);
    for (const row of rows) {
      if (row.gap_verdict === 'disagree' || row.direction_verdict === 'disagree') {
        expect(row.justification).toBeTruthy();
      }
    }
  });

  it('round-trips losslessly: export -> import -> re-export is byte-stable', () => {
    const session = judgedSession(['agree', 'partial', 'disagree']);
    const first = exportJudgments(session);
    const restored = importJudgments(first);
    const session2 = createSession(
      validateBundle(makeBundle(3)), 'rev1', restored);
    const second = exportJudgments(session2);
    expect(second).toBe(first); // fixed clock: timestamps identical too
  });

  it('import skips the summary row and validates judgments', () => {
    const session = judgedSession(['agree', 'agree']);
    const restored = importJudgments(exportJudgments(session));
    expect(restored).toHaveLength(2);
    expect(() => importJudgments('{"item_id": 1}\n')).toThrowError(
      ValidationError,
    );
    expect(() =>
      importJudgments(
        '{"item_id":"x","gap_verdict":"disagree","direction_verdict":"agree"}\n',
      ),
    ).toThrowError(/justification/);
  });

  it('direction fractions ignore not_applicable rows', () => {
    const judgments: Judgment[] = [
      {
        item_id: 'a', gap_verdict: 'agree', direction_verdict: 'agree',
        justification: null, note: '', reviewer_tag: 'r', timestamp: '',
      },
      {
        item_id: 'b', gap_verdict: 'agree', direction_verdict: 'not_applicable',
        justification: null, note: '', reviewer_tag: 'r', timestamp: '',
      },
    ];
    const summary = summarize(judgments);
    expect(summary.direction.agree.fraction).toBe(1);
    expect(summary.direction_not_applicable).toBe(1);
  });
});

describe('persistence', () => {
  function memoryBackend() {
    const store = new Map<string, string>();
    return {
      getItem: (k: string) => store.get(k) ?? null,
      setItem: (k: string, v: string) => void store.set(k, v),
      removeItem: (k: string) => void store.delete(k),
    };
  }

  it('reloading a bundle restores progress', () => {
    const backend = memoryBackend();
    const bundle = validateBundle(makeBundle(4));
    const key = bundleKey(bundle) + ':rev1';

    const session = createSession(bundle, 'rev1');
    recordJudgment(session, {
      item_id: session.items[0]!.item_id,
      gap_verdict: 'agree', direction_verdict: 'agree',
    }, fixedClock);
    recordJudgment(session, {
      item_id: session.items[1]!.item_id,
      gap_verdict: 'partial', direction_verdict: 'not_applicable',
    }, fixedClock);
    persist(backend, key, session.history);

    const restored = createSession(bundle, 'rev1', loadSaved(backend, key));
    expect(progress(restored)).toEqual({ judged: 2, total: 4 });
  });

  it('bundle keys differ across different bundles', () => {
    const a = validateBundle(makeBundle(2));
    const b = validateBundle(makeBundle(3));
    expect(bundleKey(a)).not.toBe(bundleKey(b));
  });
});
