// Thin typed client over the verification service; every displayed verdict
// comes from these responses verbatim.

import type {
  AssumptionInfo,
  ParseResponse,
  PolicyJson,
  RenderResponse,
  ScenarioInfo,
  ScenarioJson,
  VerifyRequest,
  VerifyResponse,
} from "./types.js";

export interface ErrorBody {
  error?: string;
  detail?: string;
  violations?: string[];
  span?: [number, number];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: ErrorBody,
  ) {
    super(body.detail ?? `request failed with status ${status}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly base: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.base}${path}`, init);
    const text = await response.text();
    const body = text ? JSON.parse(text) : null;
    if (!response.ok) {
      throw new ApiError(response.status, body ?? {});
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  listScenarios(): Promise<ScenarioInfo[]> {
    return this.request("/scenarios");
  }

  getScenario(id: string): Promise<ScenarioJson> {
    return this.request(`/scenarios/${id}`);
  }

  getAssumptions(id: string): Promise<AssumptionInfo[]> {
    return this.request(`/scenarios/${id}/assumptions`);
  }

  parsePolicy(text: string, scenario?: string): Promise<ParseResponse> {
    return this.post("/policies/parse", { text, scenario });
  }

  renderPolicy(policy: PolicyJson, scenario?: string): Promise<RenderResponse> {
    return this.post("/policies/render", { policy, scenario });
  }

  verify(scenarioId: string, request: VerifyRequest): Promise<VerifyResponse> {
    return this.post(`/scenarios/${scenarioId}/verify`, request);
  }
}
