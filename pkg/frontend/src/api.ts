/** Typed client for the annotation service HTTP API. */

export interface SessionInfo {
  sessionId: string;
  width: number;
  height: number;
}

export type StrokeLabel = 'fg' | 'bg' | 'erase';

export interface StrokePayload {
  label: StrokeLabel;
  radius: number;
  points: [number, number][];
}

export interface StrokeCounts {
  fg_pixels: number;
  bg_pixels: number;
}

export interface RefineStats {
  mode: string;
  mc_runs: number;
  tau0: number;
  foreground_pixels: number;
  total_pixels: number;
}

export interface MaskResponse {
  maskPng: ArrayBuffer;
  stats: RefineStats | null;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function errorDetail(resp: Response): Promise<string> {
  try {
    const body = await resp.json();
    if (typeof body.detail === 'string') return body.detail;
    return JSON.stringify(body.detail ?? body);
  } catch {
    return resp.statusText || `HTTP ${resp.status}`;
  }
}

export class AnnotationApi {
  private readonly fetchImpl: FetchLike;

  constructor(
    public readonly baseUrl: string = '',
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!resp.ok) {
      throw new ApiError(resp.status, await errorDetail(resp));
    }
    return resp;
  }

  async health(): Promise<boolean> {
    const resp = await this.fetchImpl(`${this.baseUrl}/healthz`);
    return resp.ok;
  }

  async createSession(image: ArrayBuffer | Blob, name: string): Promise<SessionInfo> {
    const resp = await this.request(`/sessions?name=${encodeURIComponent(name)}`, {
      method: 'POST',
      body: image,
    });
    const body = await resp.json();
    return { sessionId: body.session_id, width: body.width, height: body.height };
  }

  async addStrokes(sessionId: string, strokes: StrokePayload[]): Promise<StrokeCounts> {
    const resp = await this.request(`/sessions/${sessionId}/strokes`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ strokes }),
    });
    return (await resp.json()) as StrokeCounts;
  }

  async attachScoremap(sessionId: string, data: ArrayBuffer | Blob): Promise<void> {
    await this.request(`/sessions/${sessionId}/scoremap`, { method: 'POST', body: data });
  }

  private static async maskResponse(resp: Response): Promise<MaskResponse> {
    const statsHeader = resp.headers.get('x-refine-stats');
    return {
      maskPng: await resp.arrayBuffer(),
      stats: statsHeader ? (JSON.parse(statsHeader) as RefineStats) : null,
    };
  }

  async refine(sessionId: string, overrides?: { tau0?: number }): Promise<MaskResponse> {
    const resp = await this.request(`/sessions/${sessionId}/refine`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(overrides ?? {}),
    });
    return AnnotationApi.maskResponse(resp);
  }

  async setTau0(sessionId: string, tau0: number): Promise<MaskResponse> {
    const resp = await this.request(`/sessions/${sessionId}/params`, {
      method: 'PATCH',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ tau0 }),
    });
    return AnnotationApi.maskResponse(resp);
  }

  async exportMask(sessionId: string): Promise<ArrayBuffer> {
    const resp = await this.request(`/sessions/${sessionId}/export`);
    return resp.arrayBuffer();
  }
}
