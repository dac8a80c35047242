/** Typed client for the /api/v1 JSON interface.
 *
 * Every exchange is appended to `traffic`, so tests (and the audit
 * helper) can verify that rendered values trace back to payload bytes
 * the service actually returned.
 */

export type Json =
  | null
  | boolean
  | number
  | string
  | Json[]
  | { [key: string]: Json };

export interface SearchRequest {
  q: string;
  facets?: Record<string, string[]>;
  page?: number;
  pageSize?: number;
}

export interface SearchResult {
  query: { q: string; facets: Record<string, string[]>; page: number; pageSize: number };
  total: number;
  page: number;
  pageSize: number;
  persons: { personId: string; names: string[]; matchWeight: number }[];
  entries: { entryId: string; personId: string | null; matchField: string }[];
  facets: Record<string, Record<string, number>>;
}

export interface Fragment {
  text: string;
  highlightBegin: number;
  highlightEnd: number;
  docBegin: number;
  docEnd: number;
}

export interface FactSource {
  entryId: string | null;
  author: string | null;
  title: string | null;
  grounded: boolean;
  fragments: Fragment[];
}

export interface FactAlternative {
  value: string;
  sources: FactSource[];
  agreementWithSelected: string;
  selected: boolean;
}

export interface FactView {
  personId: string;
  kind: string;
  alternatives: FactAlternative[];
}

export interface TimelineView {
  personId: string;
  entries: {
    event: string;
    type: string;
    date: string | null;
    place: string | null;
    sourceEntry: string | null;
    offsets: number[][];
  }[];
}

export interface StorytellerView {
  actors: { iri: string; label: string; eventCount: number; colorIndex: number }[];
  events: { type: string; year: number; participants: string[] }[];
  groups: { type: string; points: { year: number; score: number }[] }[];
  undated: string[];
}

export interface ClimaxView {
  scoring: string;
  groups: { type: string; points: { year: number; score: number }[] }[];
}

export interface SessionStepView {
  stepId: string;
  parent: string | null;
  op: Json;
  createdAt: number;
}

export interface SessionTree {
  sessionId: string;
  pointer: string;
  steps: SessionStepView[];
}

export interface SessionReplay {
  session: SessionTree;
  result: SearchResult;
}

export interface Exchange {
  method: string;
  url: string;
  body: Json | undefined;
  response: Json;
}

/** Transport abstraction; production uses fetch, tests replay a recording. */
export type Transport = (method: string, url: string, body?: Json) => Promise<Json>;

export function fetchTransport(baseUrl: string): Transport {
  return async (method, url, body) => {
    const response = await fetch(baseUrl + url, {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = (await response.json()) as Json;
    if (!response.ok) {
      const envelope = payload as { code?: string; message?: string };
      throw new Error(`${envelope.code ?? response.status}: ${envelope.message ?? url}`);
    }
    return payload;
  };
}

export class ApiClient {
  readonly traffic: Exchange[] = [];

  constructor(private readonly transport: Transport) {}

  private async call<T>(method: string, url: string, body?: Json): Promise<T> {
    const response = await this.transport(method, url, body);
    this.traffic.push({ method, url, body, response });
    return response as T;
  }

  search(request: SearchRequest): Promise<SearchResult> {
    return this.call("POST", "/api/v1/search", request as unknown as Json);
  }

  person(personId: string): Promise<Json> {
    return this.call("GET", `/api/v1/person/${personId}`);
  }

  timeline(personId: string): Promise<TimelineView> {
    return this.call("GET", `/api/v1/person/${personId}/timeline`);
  }

  fact(personId: string, kind: string): Promise<FactView> {
    return this.call("GET", `/api/v1/person/${personId}/fact/${kind}`);
  }

  participation(): Promise<StorytellerView> {
    return this.call("GET", "/api/v1/viz/participation");
  }

  climax(scoring: "participants" | "events" = "participants"): Promise<ClimaxView> {
    return this.call("GET", `/api/v1/viz/climax?scoring=${scoring}`);
  }

  provenance(entity: string): Promise<Json> {
    return this.call("GET", `/api/v1/provenance/${entity}`);
  }

  sessionCreate(op: Json): Promise<{ sessionId: string; stepId: string }> {
    return this.call("POST", "/api/v1/session", op);
  }

  sessionStep(sessionId: string, op: Json): Promise<{ sessionId: string; stepId: string }> {
    return this.call("POST", `/api/v1/session/${sessionId}/step`, op);
  }

  sessionBranch(
    sessionId: string,
    fromStep: string,
    op: Json,
  ): Promise<{ sessionId: string; stepId: string }> {
    return this.call("POST", `/api/v1/session/${sessionId}/branch`, { fromStep, op });
  }

  session(sessionId: string): Promise<SessionReplay> {
    return this.call("GET", `/api/v1/session/${sessionId}`);
  }
}
