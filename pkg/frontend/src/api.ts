/** Thin typed client over the documented /v1 endpoints. */

import type { ClaimListResponse, ClaimRecord, ServiceConfig } from './types.js';

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (error) {
      throw new ApiError(`network failure: ${String(error)}`, 0);
    }
    if (!response.ok) {
      let detail = `HTTP ${response.status}`;
      try {
        const body = (await response.json()) as { detail?: string; error?: { message?: string } };
        detail = body.detail ?? body.error?.message ?? detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(detail, response.status);
    }
    return (await response.json()) as T;
  }

  getConfig(): Promise<ServiceConfig> {
    return this.request<ServiceConfig>('/v1/config');
  }

  listClaims(limit = 50, offset = 0): Promise<ClaimListResponse> {
    return this.request<ClaimListResponse>(`/v1/claims?limit=${limit}&offset=${offset}`);
  }

  getClaim(claimId: string): Promise<ClaimRecord> {
    return this.request<ClaimRecord>(`/v1/claims/${encodeURIComponent(claimId)}`);
  }

  submitCorrection(
    claimId: string,
    pageIndex: number,
    field: string,
    newValue: string,
  ): Promise<ClaimRecord> {
    return this.request<ClaimRecord>(`/v1/claims/${encodeURIComponent(claimId)}/corrections`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ page_index: pageIndex, field, new_value: newValue }),
    });
  }

  pageImageUrl(claimId: string, pageIndex: number): string {
    return `${this.baseUrl}/v1/claims/${encodeURIComponent(claimId)}/pages/${pageIndex}/image`;
  }
}
