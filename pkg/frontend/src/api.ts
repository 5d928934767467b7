// HTTP side of the service contract. Shapes mirror the JSON the server
// emits; nothing here is derived client-side.

export interface CatalogPair {
  origin: string;
  limb: string;
  directions: string[];
  kmax: Record<string, number>;
}

export interface CatalogLink {
  id: string;
  parent: string | null;
}

export interface CatalogPlatform {
  name: string;
  core: string[];
  limbs: string[];
  core_links: string[];
  links: CatalogLink[];
  joint_ids: string[];
  neutral: number[];
  mobile: boolean;
  s_max: number;
  pairs: CatalogPair[];
}

export interface Catalog {
  v: number;
  platforms: CatalogPlatform[];
}

export interface Translate {
  direction: string;
  x: number;
  quantum_m: number;
}

export interface Resolution {
  support: number[];
  goal: number[];
  steps: number;
  duration: number;
  translate?: Translate;
}

export interface SubmitResponse {
  v: number;
  accepted: boolean;
  error?: string;
  error_type?: string;
  resolution?: Resolution;
}

export interface SessionInfo {
  v: number;
  session_id: string;
  platform: string;
  pose: number[];
  base: number[];
}

export interface StreamMessage {
  v: number;
  seq: number;
  t: number;
  pose: number[];
  base: number[];
  frames: Record<string, number[]>;
}

interface ResponseLike {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<ResponseLike>;

export class ApiError extends Error {
  status: number;
  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

export class ApiClient {
  private base: string;
  private fetchFn: FetchLike;

  constructor(base: string, fetchFn?: FetchLike) {
    this.base = base.replace(/\/$/, '');
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const res = await this.fetchFn(this.base + path, init);
    const body = await res.json();
    if (!res.ok) {
      const detail = (body as { detail?: string }).detail ?? res.status;
      throw new ApiError(res.status, `${path}: ${detail}`);
    }
    return body;
  }

  getCatalog(): Promise<Catalog> {
    return this.request('/platforms') as Promise<Catalog>;
  }

  createSession(platform: string): Promise<SessionInfo> {
    return this.request('/sessions', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ platform }),
    }) as Promise<SessionInfo>;
  }

  submitCommand(sessionId: string, text: string): Promise<SubmitResponse> {
    return this.request(`/sessions/${sessionId}/commands`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ text }),
    }) as Promise<SubmitResponse>;
  }

  cancel(sessionId: string): Promise<unknown> {
    return this.request(`/sessions/${sessionId}/cancel`, { method: 'POST' });
  }

  streamUrl(sessionId: string): string {
    return this.base.replace(/^http/, 'ws') + `/sessions/${sessionId}/stream`;
  }
}
