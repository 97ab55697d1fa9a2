/**
 * Review console acceptance: renders the fixture claim, flags every
 * low-confidence and missing field, round-trips a correction to a
 * corrected badge, and scales evidence boxes onto the rendered image.
 */

import { readFileSync } from 'node:fs';
import { fileURLToPath } from 'node:url';

import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { fieldFlag, reviewCounts } from '../src/flags.js';
import { scaleBbox } from '../src/overlay.js';
import { renderFieldList, renderPageSection } from '../src/render.js';
import { validateClaimRecord, type ClaimRecord } from '../src/types.js';

const FIXTURE_PATH = fileURLToPath(new URL('./fixtures/claim.json', import.meta.url));
const THRESHOLD = 0.8; // mirrors the service default exposed via /v1/config

function loadFixture(): ClaimRecord {
  return JSON.parse(readFileSync(FIXTURE_PATH, 'utf-8')) as ClaimRecord;
}

describe('criterion 10: review console', () => {
  it('fixture claim is schema-valid and renders every page', () => {
    const claim = loadFixture();
    expect(validateClaimRecord(claim)).toEqual([]);
    const html = claim.pages
      .map((page) => renderPageSection(page, `/v1/claims/${claim.claim_id}/pages/${page.page_index}/image`, THRESHOLD))
      .join('\n');
    for (const page of claim.pages) {
      expect(html).toContain(`data-page-index="${page.page_index}"`);
      for (const field of page.fields) {
        expect(html).toContain(`data-field="${field.field}"`);
      }
    }
  });

  it('schema-invalid payload yields errors, not a partial render', () => {
    const broken = { ...loadFixture(), pages: undefined };
    expect(validateClaimRecord(broken).length).toBeGreaterThan(0);
  });

  it('flags exactly the low-confidence and missing fields', () => {
    const claim = loadFixture();
    const expectFlagged = new Set<string>();
    for (const page of claim.pages) {
      for (const field of page.fields) {
        if (
          field.status === 'missing' ||
          (field.confidence !== null && field.confidence < THRESHOLD)
        ) {
          expectFlagged.add(`${page.page_index}:${field.field}`);
        }
      }
    }
    expect(expectFlagged.size).toBeGreaterThan(1); // fixture has both kinds
    for (const page of claim.pages) {
      const html = renderFieldList(page.fields, page.page_index, THRESHOLD);
      for (const field of page.fields) {
        const key = `${page.page_index}:${field.field}`;
        const flagged = fieldFlag(field, THRESHOLD) !== null;
        expect(flagged).toBe(expectFlagged.has(key));
        if (flagged) {
          const pattern = new RegExp(
            `class="field flagged[^"]*" data-field="${field.field}"`,
          );
          expect(html).toMatch(pattern);
        }
      }
    }
    const counts = reviewCounts(claim, THRESHOLD);
    expect(counts.missing).toBe(1);
    expect(counts.missing + counts.lowConfidence).toBe(expectFlagged.size);
  });

  it('flagged fields sort before settled ones on every page', () => {
    const claim = loadFixture();
    for (const page of claim.pages) {
      const html = renderFieldList(page.fields, page.page_index, THRESHOLD);
      const flags = [...html.matchAll(/data-flag="([^"]*)"/g)].map((m) => m[1]);
      const firstSettled = flags.indexOf('');
      if (firstSettled !== -1) {
        expect(flags.slice(firstSettled).every((f) => f === '')).toBe(true);
      }
    }
  });

  it('correction round-trips and re-renders with a corrected badge', async () => {
    const claim = loadFixture();
    const target = claim.pages[0]!.fields.find((f) => f.field === 'claim_amount')!;
    expect(target.status).not.toBe('corrected');

    // Server behavior stub: accept the POST, return the updated record.
    const updated: ClaimRecord = JSON.parse(JSON.stringify(claim)) as ClaimRecord;
    const updatedField = updated.pages[0]!.fields.find((f) => f.field === 'claim_amount')!;
    updatedField.status = 'corrected';
    updatedField.normalized_value = '1560000';
    updated.corrections.push({
      field: 'claim_amount',
      page_index: 0,
      old: target.normalized_value,
      new: '1560000',
      corrected_at: '2024-10-06T00:00:00+00:00',
    });

    const posted: unknown[] = [];
    const client = new ApiClient('', async (input, init) => {
      if (init?.method === 'POST') {
        posted.push(JSON.parse(String(init.body)));
        return new Response(JSON.stringify(updated), { status: 200 });
      }
      return new Response(JSON.stringify(updated), { status: 200 });
    });

    const response = await client.submitCorrection(claim.claim_id, 0, 'claim_amount', '1560000');
    expect(posted).toEqual([{ page_index: 0, field: 'claim_amount', new_value: '1560000' }]);
    const refetched = await client.getClaim(claim.claim_id); // re-fetch, server wins
    expect(refetched.corrections).toHaveLength(claim.corrections.length + 1);

    const html = renderFieldList(refetched.pages[0]!.fields, 0, THRESHOLD);
    expect(html).toContain('badge corrected');
    expect(html).toContain('>1560000<');
    expect(response.pages[0]!.fields.find((f) => f.field === 'claim_amount')!.raw_value).toBe(
      target.raw_value,
    ); // raw model output untouched
  });

  it('404 on correction is surfaced as non-retryable', async () => {
    const client = new ApiClient('', async () =>
      new Response(JSON.stringify({ detail: 'no stored claim' }), { status: 404 }),
    );
    const { correctionReducer, idleCorrection } = await import('../src/corrections.js');
    let state = correctionReducer(idleCorrection, { kind: 'edit', value: 'draft-kept' });
    state = correctionReducer(state, { kind: 'submit' });
    try {
      await client.submitCorrection('C-gone', 0, 'claim_amount', 'draft-kept');
      expect.unreachable('must throw');
    } catch (error) {
      const status = (error as { status: number }).status;
      state = correctionReducer(state, { kind: 'failure', status, message: 'gone' });
    }
    expect(state.phase).toBe('error');
    expect(state.error?.retryable).toBe(false);
    expect(state.draft).toBe('draft-kept');
  });

  it('evidence overlay coordinates match fixture bboxes after scaling', () => {
    const claim = loadFixture();
    let checked = 0;
    for (const page of claim.pages) {
      for (const field of page.fields) {
        for (const evidence of field.evidence) {
          const [x0, y0, x1, y1] = evidence.bbox;
          // Rendered at exactly half the stored page size.
          const rect = scaleBbox(evidence.bbox, page.width, page.height, page.width / 2, page.height / 2);
          expect(rect.left).toBeCloseTo(x0 / 2, 10);
          expect(rect.top).toBeCloseTo(y0 / 2, 10);
          expect(rect.width).toBeCloseTo((x1 - x0) / 2, 10);
          expect(rect.height).toBeCloseTo((y1 - y0) / 2, 10);
          // And identity at natural size.
          const natural = scaleBbox(evidence.bbox, page.width, page.height, page.width, page.height);
          expect([natural.left, natural.top]).toEqual([x0, y0]);
          checked += 1;
        }
      }
    }
    expect(checked).toBeGreaterThan(3);
  });
});
