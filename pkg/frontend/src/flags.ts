/** Review flagging: which fields deserve reviewer attention, and ordering.
 *
 * The threshold comes from GET /v1/config, never from a constant here.
 */

import type { ClaimRecord, FieldRecord } from './types.js';

export type ReviewFlag = 'missing' | 'low_confidence' | null;

export function fieldFlag(field: FieldRecord, threshold: number): ReviewFlag {
  if (field.status === 'missing') return 'missing';
  if (field.status === 'corrected') return null;
  if (field.status === 'low_confidence') return 'low_confidence';
  if (field.confidence !== null && field.confidence < threshold) return 'low_confidence';
  return null;
}

/** Flagged fields first (missing, then low-confidence), stable otherwise. */
export function sortFieldsForReview(
  fields: readonly FieldRecord[],
  threshold: number,
): FieldRecord[] {
  const rank = (field: FieldRecord): number => {
    const flag = fieldFlag(field, threshold);
    if (flag === 'missing') return 0;
    if (flag === 'low_confidence') return 1;
    return 2;
  };
  return fields
    .map((field, index) => ({ field, index }))
    .sort((a, b) => rank(a.field) - rank(b.field) || a.index - b.index)
    .map((entry) => entry.field);
}

export interface ReviewCounts {
  missing: number;
  lowConfidence: number;
}

export function reviewCounts(record: ClaimRecord, threshold: number): ReviewCounts {
  let missing = 0;
  let lowConfidence = 0;
  for (const page of record.pages) {
    for (const field of page.fields) {
      const flag = fieldFlag(field, threshold);
      if (flag === 'missing') missing += 1;
      else if (flag === 'low_confidence') lowConfidence += 1;
    }
  }
  return { missing, lowConfidence };
}
