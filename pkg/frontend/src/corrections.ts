/** Correction editing as a small state machine.
 *
 * Optimistic UI is deliberately off: a draft is held locally, the POST
 * round-trips, and only a re-fetched record updates the display. Failures
 * keep the draft so the reviewer's typing survives.
 */

export interface CorrectionState {
  phase: 'idle' | 'editing' | 'submitting' | 'error';
  draft: string;
  error: { message: string; retryable: boolean } | null;
}

export type CorrectionEvent =
  | { kind: 'edit'; value: string }
  | { kind: 'submit' }
  | { kind: 'success' }
  | { kind: 'failure'; status: number; message: string }
  | { kind: 'cancel' };

export const idleCorrection: CorrectionState = { phase: 'idle', draft: '', error: null };

/** HTTP 404 is final (claim/field gone); network failures and 5xx retry. */
export function isRetryable(status: number): boolean {
  return status === 0 || status >= 500;
}

export function correctionReducer(
  state: CorrectionState,
  event: CorrectionEvent,
): CorrectionState {
  switch (event.kind) {
    case 'edit':
      return { phase: 'editing', draft: event.value, error: null };
    case 'submit':
      if (state.phase !== 'editing' || !state.draft.trim()) return state;
      return { ...state, phase: 'submitting', error: null };
    case 'success':
      return idleCorrection;
    case 'failure':
      return {
        phase: 'error',
        draft: state.draft, // draft preserved for retry or copy-out
        error: { message: event.message, retryable: isRetryable(event.status) },
      };
    case 'cancel':
      return idleCorrection;
  }
}
