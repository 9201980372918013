// Page wiring: file in, judgments out. No network anywhere.

import {
  BundleError,
  Session,
  ValidationError,
  bundleKey,
  createSession,
  exportJudgments,
  importJudgments,
  progress,
  recordJudgment,
  validateBundle,
} from './core';
import { loadSaved, persist } from './storage';
import {
  DirectionVerdict,
  GapVerdict,
  JUSTIFICATION_CODES,
  JustificationCode,
} from './types';

let session: Session | null = null;
let storageKey = '';

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

function setStatus(message: string, isError = false): void {
  const status = $('status');
  status.textContent = message;
  status.className = isError ? 'status error' : 'status';
}

function refreshProgress(): void {
  if (!session) return;
  const { judged, total } = progress(session);
  $('progress').textContent = `${judged}/${total} judged`;
  ($('export-btn') as HTMLButtonElement).disabled = judged === 0;
}

function verdictGroup(
  name: string,
  options: readonly string[],
  current: string | null,
  allowed: boolean,
): HTMLElement {
  const group = document.createElement('div');
  group.className = 'verdicts';
  for (const option of options) {
    const label = document.createElement('label');
    const radio = document.createElement('input');
    radio.type = 'radio';
    radio.name = name;
    radio.value = option;
    radio.checked = current === option;
    radio.disabled = !allowed;
    label.append(radio, document.createTextNode(option.replace(/_/g, ' ')));
    group.append(label);
  }
  return group;
}

function selectedValue(container: HTMLElement, name: string): string | null {
  const checked = container.querySelector<HTMLInputElement>(
    `input[name="${name}"]:checked`,
  );
  return checked ? checked.value : null;
}

function renderCards(): void {
  if (!session) return;
  const list = $('cards');
  list.textContent = '';
  for (const doc of session.bundle.documents) {
    const heading = document.createElement('h2');
    heading.textContent = doc.doc_ref;
    list.append(heading);
    for (const item of doc.items) {
      const card = document.createElement('section');
      card.className = 'card';
      card.dataset.itemId = item.item_id;

      const saved = session.active.get(item.item_id) ?? null;

      const title = document.createElement('h3');
      title.textContent = `${item.item_id} (${item.model_id}` +
        (item.bucket ? `, ${item.bucket})` : ')');
      card.append(title);

      const context = document.createElement('details');
      const summary = document.createElement('summary');
      summary.textContent = 'Source context';
      const contextBody = document.createElement('p');
      contextBody.textContent = item.context_excerpt;
      context.append(summary, contextBody);
      card.append(context);

      const gap = document.createElement('p');
      gap.innerHTML = `<strong>Gap:</strong> `;
      gap.append(document.createTextNode(item.gap));
      card.append(gap);

      if (item.future_direction) {
        const direction = document.createElement('p');
        direction.innerHTML = `<strong>Future direction:</strong> `;
        direction.append(document.createTextNode(item.future_direction));
        card.append(direction);
      }
      if (item.evidence) {
        const evidence = document.createElement('p');
        evidence.className = 'evidence';
        evidence.innerHTML = `<strong>Evidence:</strong> `;
        evidence.append(document.createTextNode(item.evidence));
        card.append(evidence);
      }

      const gapQ = document.createElement('p');
      gapQ.textContent = session.bundle.questions.gap;
      card.append(gapQ);
      card.append(verdictGroup(`gap-${item.item_id}`,
        ['agree', 'partial', 'disagree'],
        saved?.gap_verdict ?? null, true));

      const dirQ = document.createElement('p');
      dirQ.textContent = session.bundle.questions.direction;
      card.append(dirQ);
      card.append(verdictGroup(`dir-${item.item_id}`,
        ['agree', 'disagree', 'not_applicable'],
        saved?.direction_verdict ?? (item.future_direction ? null : 'not_applicable'),
        item.future_direction !== null));

      const justification = document.createElement('select');
      justification.className = 'justification';
      const none = document.createElement('option');
      none.value = '';
      none.textContent = 'justification (required on disagree)';
      justification.append(none);
      for (const code of JUSTIFICATION_CODES) {
        const option = document.createElement('option');
        option.value = code;
        option.textContent = code.replace(/_/g, ' ');
        option.selected = saved?.justification === code;
        justification.append(option);
      }
      card.append(justification);

      const note = document.createElement('textarea');
      note.placeholder = 'optional note';
      note.value = saved?.note ?? '';
      card.append(note);

      const row = document.createElement('div');
      row.className = 'save-row';
      const save = document.createElement('button');
      save.textContent = 'Save judgment';
      const state = document.createElement('span');
      state.className = 'saved-state';
      state.textContent = saved ? `saved ${saved.timestamp}` : 'unsaved';
      row.append(save, state);
      card.append(row);

      const inline = document.createElement('p');
      inline.className = 'inline-error';
      card.append(inline);

      save.addEventListener('click', () => {
        if (!session) return;
        inline.textContent = '';
        const gapVerdict = selectedValue(card, `gap-${item.item_id}`);
        const dirVerdict = selectedValue(card, `dir-${item.item_id}`) ??
          'not_applicable';
        if (!gapVerdict) {
          inline.textContent = 'pick a verdict for the gap question';
          return;
        }
        try {
          const judgment = recordJudgment(session, {
            item_id: item.item_id,
            gap_verdict: gapVerdict as GapVerdict,
            direction_verdict: dirVerdict as DirectionVerdict,
            justification: (justification.value || null) as
              JustificationCode | null,
            note: note.value,
          });
          persist(window.localStorage, storageKey, session.history);
          state.textContent = `saved ${judgment.timestamp}`;
          refreshProgress();
        } catch (err) {
          if (err instanceof ValidationError) {
            inline.textContent = err.message;
          } else {
            throw err;
          }
        }
      });

      list.append(card);
    }
  }
}

function startSession(text: string): void {
  let bundle;
  try {
    bundle = validateBundle(JSON.parse(text));
  } catch (err) {
    session = null;
    $('cards').textContent = '';
    $('progress').textContent = '';
    setStatus(err instanceof Error ? err.message : String(err), true);
    return;
  }
  const reviewer =
    ($('reviewer') as HTMLInputElement).value.trim() || 'anonymous';
  storageKey = bundleKey(bundle) + ':' + reviewer;
  const saved = loadSaved(window.localStorage, storageKey);
  session = createSession(bundle, reviewer, saved);
  setStatus(`loaded ${session.items.length} items from bundle (${bundle.task})`);
  renderCards();
  refreshProgress();
}

function download(filename: string, text: string): void {
  const blob = new Blob([text], { type: 'application/x-ndjson' });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement('a');
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(url);
}

function wire(): void {
  const bundleInput = $('bundle-file') as HTMLInputElement;
  bundleInput.addEventListener('change', () => {
    const file = bundleInput.files?.[0];
    if (!file) return;
    void file.text().then(startSession);
  });

  const judgmentsInput = $('judgments-file') as HTMLInputElement;
  judgmentsInput.addEventListener('change', () => {
    const file = judgmentsInput.files?.[0];
    if (!file || !session) return;
    void file.text().then((text) => {
      try {
        const restored = importJudgments(text);
        for (const judgment of restored) {
          session!.history.push(judgment);
          if (judgment.reviewer_tag === session!.reviewerTag) {
            session!.active.set(judgment.item_id, judgment);
          }
        }
        persist(window.localStorage, storageKey, session!.history);
        renderCards();
        refreshProgress();
        setStatus(`imported ${restored.length} judgments`);
      } catch (err) {
        setStatus(err instanceof Error ? err.message : String(err), true);
      }
    });
  });

  $('export-btn').addEventListener('click', () => {
    if (!session) return;
    try {
      download('judgments.jsonl', exportJudgments(session));
    } catch (err) {
      setStatus(err instanceof Error ? err.message : String(err), true);
    }
  });
}

document.addEventListener('DOMContentLoaded', wire);

export { startSession };
