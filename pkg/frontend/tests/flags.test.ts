import { describe, expect, it } from 'vitest';

import { fieldFlag, reviewCounts, sortFieldsForReview } from '../src/flags.js';
import type { ClaimRecord, FieldRecord } from '../src/types.js';

function field(overrides: Partial<FieldRecord>): FieldRecord {
  return {
    field: 'f',
    raw_value: 'v',
    normalized_value: 'v',
    evidence: [],
    confidence: null,
    status: 'extracted',
    ...overrides,
  };
}

describe('fieldFlag', () => {
  it('flags confidence below threshold', () => {
    expect(fieldFlag(field({ confidence: 0.45 }), 0.8)).toBe('low_confidence');
  });

  it('does not flag confidence at or above threshold', () => {
    expect(fieldFlag(field({ confidence: 0.8 }), 0.8)).toBeNull();
    expect(fieldFlag(field({ confidence: 0.95 }), 0.8)).toBeNull();
  });

  it('flags missing fields regardless of confidence', () => {
    expect(
      fieldFlag(field({ status: 'missing', raw_value: null, normalized_value: null }), 0.8),
    ).toBe('missing');
  });

  it('respects the server-declared low_confidence status', () => {
    expect(fieldFlag(field({ status: 'low_confidence', confidence: 0.7 }), 0.8)).toBe(
      'low_confidence',
    );
  });

  it('corrected fields are settled, not flagged', () => {
    expect(fieldFlag(field({ status: 'corrected', confidence: 0.3 }), 0.8)).toBeNull();
  });

  it('threshold comes from the caller, not a constant', () => {
    const f = field({ confidence: 0.85 });
    expect(fieldFlag(f, 0.8)).toBeNull();
    expect(fieldFlag(f, 0.9)).toBe('low_confidence');
  });
});

describe('sortFieldsForReview', () => {
  it('puts missing first, then low confidence, stable within groups', () => {
    const fields = [
      field({ field: 'a', confidence: 0.99 }),
      field({ field: 'b', confidence: 0.5 }),
      field({ field: 'c', status: 'missing', raw_value: null, normalized_value: null }),
      field({ field: 'd', confidence: 0.4 }),
    ];
    expect(sortFieldsForReview(fields, 0.8).map((f) => f.field)).toEqual([
      'c',
      'b',
      'd',
      'a',
    ]);
  });

  it('does not mutate its input', () => {
    const fields = [field({ field: 'a' }), field({ field: 'b', confidence: 0.1 })];
    const before = fields.map((f) => f.field);
    sortFieldsForReview(fields, 0.8);
    expect(fields.map((f) => f.field)).toEqual(before);
  });
});

describe('reviewCounts', () => {
  it('counts across all pages from the payload alone', () => {
    const record = {
      pages: [
        { fields: [field({ confidence: 0.2 }), field({})] },
        {
          fields: [
            field({ status: 'missing', raw_value: null, normalized_value: null }),
            field({ confidence: 0.79 }),
          ],
        },
      ],
    } as unknown as ClaimRecord;
    expect(reviewCounts(record, 0.8)).toEqual({ missing: 1, lowConfidence: 2 });
  });
});
