// Local persistence of in-progress judgments, keyed per bundle. The
// injectable backend keeps core logic testable without a browser.

import { Judgment } from './types';

export interface StorageBackend {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export function loadSaved(backend: StorageBackend, key: string): Judgment[] {
  const raw = backend.getItem(key);
  if (raw === null) return [];
  try {
    const parsed = JSON.parse(raw);
    return Array.isArray(parsed) ? (parsed as Judgment[]) : [];
  } catch {
    return [];
  }
}

export function persist(
  backend: StorageBackend,
  key: string,
  history: Judgment[],
): void {
  backend.setItem(key, JSON.stringify(history));
}

export function clear(backend: StorageBackend, key: string): void {
  backend.removeItem(key);
}
