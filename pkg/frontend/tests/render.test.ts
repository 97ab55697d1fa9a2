import { describe, expect, it } from 'vitest';

import { escapeHtml, renderClaimRows, renderErrorBanner, renderFieldList } from '../src/render.js';
import type { ClaimSummary, FieldRecord } from '../src/types.js';

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

describe('renderFieldList', () => {
  it('marks flagged fields and sorts them first', () => {
    const html = renderFieldList(
      [
        field({ field: 'fine', confidence: 0.95 }),
        field({ field: 'shaky', confidence: 0.41 }),
        field({ field: 'gone', status: 'missing', raw_value: null, normalized_value: null }),
      ],
      0,
      0.8,
    );
    const order = [...html.matchAll(/data-field="([^"]+)"/g)].map((m) => m[1]);
    expect(order).toEqual(['gone', 'shaky', 'fine']);
    expect(html).toContain('data-flag="missing"');
    expect(html).toContain('data-flag="low_confidence"');
    expect(html).toContain('badge missing');
    expect(html).toContain('badge low');
  });

  it('shows corrected badge and displays values verbatim', () => {
    const html = renderFieldList(
      [field({ field: 'amount', status: 'corrected', normalized_value: '1560000' })],
      0,
      0.8,
    );
    expect(html).toContain('badge corrected');
    expect(html).toContain('>1560000<');
  });

  it('escapes markup in values', () => {
    const html = renderFieldList(
      [field({ field: 'sneaky', normalized_value: '<img src=x onerror=alert(1)>' })],
      0,
      0.8,
    );
    expect(html).not.toContain('<img src=x');
    expect(html).toContain('&lt;img src=x');
  });

  it('renders a missing value affordance', () => {
    const html = renderFieldList(
      [field({ field: 'gone', status: 'missing', raw_value: null, normalized_value: null })],
      0,
      0.8,
    );
    expect(html).toContain('class="empty"');
  });
});

describe('renderClaimRows', () => {
  it('renders summary columns from the API payload alone', () => {
    const rows: ClaimSummary[] = [
      {
        claim_id: 'C2024-0001',
        status: 'completed',
        created_at: '2024-10-05T00:00:00+00:00',
        filename: 'a.pdf',
        page_types: ['claim_form', 'invoice'],
        complete: true,
        n_fields: 7,
        n_missing: 1,
        n_low_confidence: 2,
      },
    ];
    const html = renderClaimRows(rows);
    expect(html).toContain('C2024-0001');
    expect(html).toContain('claim_form, invoice');
    expect(html).toContain('✓ complete');
    expect(html).toContain('2 low-conf / 1 missing');
  });
});

describe('renderErrorBanner', () => {
  it('lists every problem', () => {
    const html = renderErrorBanner(['bundle missing', 'pages missing']);
    expect(html).toContain('role="alert"');
    expect(html).toContain('bundle missing');
    expect(html).toContain('pages missing');
  });
});

describe('escapeHtml', () => {
  it('escapes the five specials', () => {
    expect(escapeHtml(`<a href="x">&'</a>`)).toBe(
      '&lt;a href=&quot;x&quot;&gt;&amp;&#39;&lt;/a&gt;',
    );
  });
});
