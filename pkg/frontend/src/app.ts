/** DOM wiring: hash routing, data fetching, overlay positioning,
 * correction editing. All state is reconstructed from the API on refresh. */

import { ApiClient, ApiError } from './api.js';
import { correctionReducer, idleCorrection, type CorrectionState } from './corrections.js';
import { scaleBbox, overlayStyle } from './overlay.js';
import {
  renderClaimRows,
  renderErrorBanner,
  renderPageSection,
  escapeHtml,
} from './render.js';
import { validateClaimRecord, type ClaimRecord } from './types.js';

const api = new ApiClient('');
let threshold = 0.8; // replaced by /v1/config on boot

function root(): HTMLElement {
  const el = document.getElementById('app');
  if (!el) throw new Error('missing #app root');
  return el;
}

async function showClaimList(): Promise<void> {
  const listing = await api.listClaims(100, 0);
  root().innerHTML =
    `<h2>Claims</h2>` +
    `<table class="claims"><thead><tr>` +
    `<th>claim</th><th>pages</th><th>bundle</th><th>review</th><th>created</th>` +
    `</tr></thead><tbody>${renderClaimRows(listing.claims)}</tbody></table>`;
  for (const row of root().querySelectorAll<HTMLTableRowElement>('.claim-row')) {
    row.addEventListener('click', () => {
      window.location.hash = `#/claims/${row.dataset.claimId}`;
    });
  }
}

function positionOverlay(wrap: HTMLElement, bbox: [number, number, number, number]): void {
  const img = wrap.querySelector<HTMLImageElement>('.page-image');
  const overlay = wrap.querySelector<HTMLElement>('.overlay');
  if (!img || !overlay) return;
  const natural = {
    width: Number(wrap.dataset.naturalWidth),
    height: Number(wrap.dataset.naturalHeight),
  };
  const rect = scaleBbox(bbox, natural.width, natural.height, img.clientWidth, img.clientHeight);
  overlay.setAttribute('style', overlayStyle(rect));
  overlay.hidden = false;
}

function attachFieldInteractions(claim: ClaimRecord): void {
  for (const item of root().querySelectorAll<HTMLElement>('li.field')) {
    const pageIndex = Number(item.dataset.pageIndex);
    const fieldName = item.dataset.field ?? '';
    const page = claim.pages.find((p) => p.page_index === pageIndex);
    const field = page?.fields.find((f) => f.field === fieldName);
    if (!page || !field) continue;

    item.addEventListener('click', (event) => {
      if ((event.target as HTMLElement).closest('.edit-slot')) return;
      const section = item.closest('.page');
      const wrap = section?.querySelector<HTMLElement>('.image-wrap');
      const evidence = field.evidence[0];
      if (wrap && evidence) positionOverlay(wrap, evidence.bbox);
      mountEditor(item, claim, pageIndex, fieldName);
    });
  }
}

function mountEditor(
  item: HTMLElement,
  claim: ClaimRecord,
  pageIndex: number,
  fieldName: string,
): void {
  const slot = item.querySelector<HTMLElement>('.edit-slot');
  if (!slot || slot.childElementCount > 0) return;
  let state: CorrectionState = idleCorrection;
  const current =
    item.querySelector<HTMLElement>('[data-role="normalized"]')?.textContent ?? '';

  const renderEditor = (): void => {
    const busy = state.phase === 'submitting';
    const error = state.error
      ? `<div class="edit-error">${escapeHtml(state.error.message)}` +
        `${state.error.retryable ? ' <em>(retry possible)</em>' : ' <em>(not retryable)</em>'}</div>`
      : '';
    slot.innerHTML =
      `<div class="editor">` +
      `<input type="text" value="${escapeHtml(state.draft || current)}" ${busy ? 'disabled' : ''}/>` +
      `<button data-action="save" ${busy ? 'disabled' : ''}>save</button>` +
      `<button data-action="cancel">cancel</button>${error}</div>`;
    const input = slot.querySelector<HTMLInputElement>('input');
    input?.addEventListener('input', () => {
      state = correctionReducer(state, { kind: 'edit', value: input.value });
    });
    slot.querySelector<HTMLButtonElement>('[data-action="cancel"]')?.addEventListener(
      'click',
      () => {
        state = correctionReducer(state, { kind: 'cancel' });
        slot.innerHTML = '';
      },
    );
    slot.querySelector<HTMLButtonElement>('[data-action="save"]')?.addEventListener(
      'click',
      () => void save(),
    );
  };

  const save = async (): Promise<void> => {
    if (state.phase !== 'editing') {
      state = correctionReducer(state, { kind: 'edit', value: current });
    }
    state = correctionReducer(state, { kind: 'submit' });
    renderEditor();
    try {
      await api.submitCorrection(claim.claim_id, pageIndex, fieldName, state.draft);
      state = correctionReducer(state, { kind: 'success' });
      await showClaimDetail(claim.claim_id); // re-fetch: server state wins
    } catch (error) {
      const status = error instanceof ApiError ? error.status : 0;
      state = correctionReducer(state, {
        kind: 'failure',
        status,
        message: error instanceof Error ? error.message : String(error),
      });
      renderEditor();
    }
  };

  state = correctionReducer(state, { kind: 'edit', value: current });
  renderEditor();
}

async function showClaimDetail(claimId: string): Promise<void> {
  const payload = await api.getClaim(claimId);
  const problems = validateClaimRecord(payload);
  if (problems.length > 0) {
    root().innerHTML = renderErrorBanner(problems);
    return;
  }
  const claim = payload;
  const bundle = claim.bundle.complete
    ? '<span class="ok">bundle complete</span>'
    : `<span class="warn">incomplete: ${escapeHtml(claim.bundle.missing_mandatory.join('; '))}</span>`;
  root().innerHTML =
    `<p><a href="#/claims">← all claims</a></p>` +
    `<h2 class="mono">${escapeHtml(claim.claim_id)}</h2>` +
    `<p>${escapeHtml(claim.filename)} · ${bundle} · ${claim.corrections.length} correction(s)</p>` +
    claim.pages
      .map((page) => renderPageSection(page, api.pageImageUrl(claim.claim_id, page.page_index), threshold))
      .join('\n');
  attachFieldInteractions(claim);
}

async function route(): Promise<void> {
  const hash = window.location.hash || '#/claims';
  const match = /^#\/claims\/(.+)$/.exec(hash);
  try {
    if (match && match[1]) await showClaimDetail(decodeURIComponent(match[1]));
    else await showClaimList();
  } catch (error) {
    const message = error instanceof Error ? error.message : String(error);
    root().innerHTML = renderErrorBanner([message]);
  }
}

async function boot(): Promise<void> {
  try {
    threshold = (await api.getConfig()).low_confidence_threshold;
  } catch {
    // config endpoint unreachable: keep the conservative default
  }
  window.addEventListener('hashchange', () => void route());
  await route();
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  void boot();
}
