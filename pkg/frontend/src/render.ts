/** HTML string builders. Pure functions so the test suite can assert on
 * markup without a browser; app.ts injects the strings into the DOM.
 * Displayed values are byte-equal to API values (escaped only for HTML). */

import { fieldFlag, sortFieldsForReview } from './flags.js';
import type { ClaimSummary, FieldRecord, PageRecord } from './types.js';

export function escapeHtml(value: string): string {
  return value
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
    .replace(/'/g, '&#39;');
}

function show(value: string | null): string {
  return value === null ? '<span class="empty">—</span>' : escapeHtml(value);
}

export function renderErrorBanner(problems: readonly string[]): string {
  const items = problems.map((p) => `<li>${escapeHtml(p)}</li>`).join('');
  return `<div class="banner error" role="alert"><strong>Cannot render claim</strong><ul>${items}</ul></div>`;
}

export function renderClaimRows(summaries: readonly ClaimSummary[]): string {
  return summaries
    .map((row) => {
      const types = (row.page_types ?? []).map((t) => t ?? '?').join(', ');
      const review =
        row.status === 'completed'
          ? `${row.n_low_confidence ?? 0} low-conf / ${row.n_missing ?? 0} missing`
          : 'failed';
      const bundle = row.complete === undefined ? '' : row.complete ? '✓ complete' : 'incomplete';
      return (
        `<tr class="claim-row" data-claim-id="${escapeHtml(row.claim_id)}">` +
        `<td class="mono">${escapeHtml(row.claim_id)}</td>` +
        `<td>${escapeHtml(types)}</td>` +
        `<td class="${row.complete ? 'ok' : 'warn'}">${bundle}</td>` +
        `<td>${escapeHtml(review)}</td>` +
        `<td class="mono">${escapeHtml(row.created_at)}</td>` +
        `</tr>`
      );
    })
    .join('\n');
}

function statusBadge(field: FieldRecord, threshold: number): string {
  if (field.status === 'corrected') return '<span class="badge corrected">corrected</span>';
  const flag = fieldFlag(field, threshold);
  if (flag === 'missing') return '<span class="badge missing">missing</span>';
  if (flag === 'low_confidence') return '<span class="badge low">low confidence</span>';
  return '<span class="badge ok">ok</span>';
}

export function renderFieldList(
  fields: readonly FieldRecord[],
  pageIndex: number,
  threshold: number,
): string {
  const sorted = sortFieldsForReview(fields, threshold);
  return sorted
    .map((field) => {
      const flag = fieldFlag(field, threshold);
      const confidence =
        field.confidence === null ? 'n/a' : field.confidence.toFixed(2);
      return (
        `<li class="field${flag ? ` flagged flag-${flag}` : ''}" ` +
        `data-field="${escapeHtml(field.field)}" data-page-index="${pageIndex}" ` +
        `data-flag="${flag ?? ''}">` +
        `<div class="field-head"><span class="name">${escapeHtml(field.field)}</span>` +
        `${statusBadge(field, threshold)}</div>` +
        `<div class="values">` +
        `<span class="value" data-role="normalized">${show(field.normalized_value)}</span>` +
        `<span class="raw" title="raw model output">${show(field.raw_value)}</span>` +
        `</div>` +
        `<div class="meta">confidence ${confidence} · evidence ${field.evidence.length}</div>` +
        `<div class="edit-slot"></div>` +
        `</li>`
      );
    })
    .join('\n');
}

export function renderPageSection(page: PageRecord, imageUrl: string, threshold: number): string {
  const docType = page.classification?.doc_type ?? 'unclassified';
  const method = page.classification?.method ?? 'n/a';
  return (
    `<section class="page" data-page-index="${page.page_index}">` +
    `<h3>Page ${page.page_index} · ${escapeHtml(docType)} <small>(${escapeHtml(method)})</small></h3>` +
    `<div class="page-body">` +
    `<div class="image-wrap" data-natural-width="${page.width}" data-natural-height="${page.height}">` +
    `<img src="${escapeHtml(imageUrl)}" alt="page ${page.page_index}" class="page-image" />` +
    `<div class="overlay" hidden></div>` +
    `</div>` +
    `<ol class="fields">${renderFieldList(page.fields, page.page_index, threshold)}</ol>` +
    `</div>` +
    `</section>`
  );
}
