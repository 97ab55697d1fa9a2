import { describe, expect, it } from 'vitest';

import {
  correctionReducer,
  idleCorrection,
  isRetryable,
  type CorrectionState,
} from '../src/corrections.js';

function editing(draft: string): CorrectionState {
  return correctionReducer(idleCorrection, { kind: 'edit', value: draft });
}

describe('correction state machine', () => {
  it('edit -> submit -> success clears the editor', () => {
    let state = editing('1560000');
    state = correctionReducer(state, { kind: 'submit' });
    expect(state.phase).toBe('submitting');
    expect(correctionReducer(state, { kind: 'success' })).toEqual(idleCorrection);
  });

  it('404 failure is non-retryable and keeps the draft', () => {
    let state = editing('1560000');
    state = correctionReducer(state, { kind: 'submit' });
    state = correctionReducer(state, { kind: 'failure', status: 404, message: 'gone' });
    expect(state.phase).toBe('error');
    expect(state.draft).toBe('1560000');
    expect(state.error?.retryable).toBe(false);
  });

  it('network failure is retryable and keeps the draft', () => {
    let state = editing('abc');
    state = correctionReducer(state, { kind: 'submit' });
    state = correctionReducer(state, { kind: 'failure', status: 0, message: 'offline' });
    expect(state.error?.retryable).toBe(true);
    expect(state.draft).toBe('abc');
  });

  it('empty drafts cannot submit', () => {
    const state = editing('   ');
    expect(correctionReducer(state, { kind: 'submit' })).toBe(state);
  });

  it('submit from idle is a no-op', () => {
    expect(correctionReducer(idleCorrection, { kind: 'submit' })).toBe(idleCorrection);
  });

  it('cancel always returns to idle', () => {
    const state = editing('x');
    expect(correctionReducer(state, { kind: 'cancel' })).toEqual(idleCorrection);
  });
});

describe('isRetryable', () => {
  it.each([
    [0, true],
    [500, true],
    [503, true],
    [404, false],
    [400, false],
  ])('status %d -> %s', (status, expected) => {
    expect(isRetryable(status)).toBe(expected);
  });
});
