/** API payload shapes for the /v1 claim endpoints. */

export type FieldStatus = 'extracted' | 'missing' | 'low_confidence' | 'corrected';

export interface EvidenceRef {
  page_index: number;
  bbox: [number, number, number, number];
}

export interface FieldRecord {
  field: string;
  raw_value: string | null;
  normalized_value: string | null;
  evidence: EvidenceRef[];
  confidence: number | null;
  status: FieldStatus;
}

export interface Classification {
  doc_type: string;
  method: 'title_rule' | 'ml_fallback';
  title: string | null;
  probabilities: Record<string, number> | null;
}

export interface PageRecord {
  page_index: number;
  width: number;
  height: number;
  classification: Classification | null;
  fields: FieldRecord[];
  diagnostics: string[];
}

export interface BundleReport {
  present_types: string[];
  missing_mandatory: string[];
  complete: boolean;
}

export interface CorrectionEntry {
  field: string;
  page_index: number;
  old: string | null;
  new: string;
  corrected_at: string;
}

export interface ClaimRecord {
  status: 'completed';
  claim_id: string;
  source_digest: string;
  filename: string;
  created_at: string;
  pages: PageRecord[];
  bundle: BundleReport;
  timings_ms: Record<string, number>;
  corrections: CorrectionEntry[];
}

export interface ClaimSummary {
  claim_id: string;
  status: 'completed' | 'failed';
  created_at: string;
  filename: string;
  page_types?: (string | null)[];
  complete?: boolean;
  n_fields?: number;
  n_missing?: number;
  n_low_confidence?: number;
}

export interface ClaimListResponse {
  claims: ClaimSummary[];
  total: number;
  limit: number;
  offset: number;
}

export interface ServiceConfig {
  low_confidence_threshold: number;
  grounding_threshold: number;
  day_first: boolean;
  version: string;
}

/**
 * Structural check of a claim payload before rendering. Returns the list
 * of problems; anything non-empty means "error banner, no partial render".
 */
export function validateClaimRecord(payload: unknown): string[] {
  const problems: string[] = [];
  const record = payload as Partial<ClaimRecord> | null;
  if (record === null || typeof record !== 'object') {
    return ['payload is not an object'];
  }
  if (record.status !== 'completed') problems.push(`unexpected status: ${String(record.status)}`);
  if (typeof record.claim_id !== 'string' || !record.claim_id) problems.push('claim_id missing');
  if (!Array.isArray(record.pages)) {
    problems.push('pages missing');
    return problems;
  }
  record.pages.forEach((page, i) => {
    if (typeof page.page_index !== 'number') problems.push(`page ${i}: page_index missing`);
    if (typeof page.width !== 'number' || typeof page.height !== 'number') {
      problems.push(`page ${i}: dimensions missing`);
    }
    if (!Array.isArray(page.fields)) {
      problems.push(`page ${i}: fields missing`);
      return;
    }
    page.fields.forEach((field, j) => {
      if (typeof field.field !== 'string') problems.push(`page ${i} field ${j}: name missing`);
      if (!['extracted', 'missing', 'low_confidence', 'corrected'].includes(field.status)) {
        problems.push(`page ${i} field ${j}: bad status ${String(field.status)}`);
      }
      if (field.confidence !== null && typeof field.confidence !== 'number') {
        problems.push(`page ${i} field ${j}: bad confidence`);
      }
    });
  });
  const bundle = record.bundle as BundleReport | undefined;
  if (!bundle || typeof bundle.complete !== 'boolean') problems.push('bundle missing');
  return problems;
}
