// Thin fetch client over the service API. Tracks the register revision from
// successful responses and sends it as If-Match on every mutation; a failed
// response never updates the tracked revision, so stale tabs stay stale
// until the user reloads explicitly.

import type {
  AssetRow,
  CatalogThreat,
  CatalogVulnerability,
  DomainEntry,
  Envelope,
  PdcaPayload,
  RatingLabel,
  RegisterDoc,
  RiskRow,
  SoaDoc,
  TreatmentResult,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public serverRevision: number,
  ) {
    super(message);
  }
}

export interface TreatmentRequest {
  method: string;
  justification: string;
  controls?: string[];
  residual_threat?: RatingLabel;
  residual_vuln?: RatingLabel;
  transferee?: string;
}

export class ApiClient {
  revision = 0;

  constructor(private base: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (method !== "GET") headers["If-Match"] = String(this.revision);
    const response = await fetch(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const envelope = (await response.json()) as Envelope<T>;
    if (envelope.error) {
      throw new ApiError(
        response.status,
        envelope.error.code,
        envelope.error.message,
        envelope.register_revision,
      );
    }
    this.revision = envelope.register_revision;
    return envelope.payload as T;
  }

  getRegister(): Promise<RegisterDoc> {
    return this.request("GET", "/api/v1/register");
  }

  getAssets(): Promise<AssetRow[]> {
    return this.request("GET", "/api/v1/assets");
  }

  getRisks(): Promise<RiskRow[]> {
    return this.request("GET", "/api/v1/risks");
  }

  getPdca(): Promise<PdcaPayload> {
    return this.request("GET", "/api/v1/pdca");
  }

  getSoa(): Promise<SoaDoc> {
    return this.request("GET", "/api/v1/soa");
  }

  getDomains(): Promise<DomainEntry[]> {
    return this.request("GET", "/api/v1/catalog/domains");
  }

  getThreats(category?: string): Promise<CatalogThreat[]> {
    const query = category ? `?category=${encodeURIComponent(category)}` : "";
    return this.request("GET", `/api/v1/catalog/threats${query}`);
  }

  getVulnerabilities(threatId: string): Promise<CatalogVulnerability[]> {
    return this.request("GET", `/api/v1/catalog/threats/${threatId}/vulnerabilities`);
  }

  addAsset(body: {
    name: string;
    category: string;
    confidentiality: RatingLabel;
    integrity: RatingLabel;
    availability: RatingLabel;
  }): Promise<AssetRow> {
    return this.request("POST", "/api/v1/assets", body);
  }

  rateAsset(
    assetId: string,
    ratings: { confidentiality: RatingLabel; integrity: RatingLabel; availability: RatingLabel },
  ): Promise<AssetRow> {
    return this.request("PUT", `/api/v1/assets/${assetId}/ratings`, ratings);
  }

  addRisk(body: {
    asset_id: string;
    threat_id: string;
    threat_rating: RatingLabel;
    vuln_id: string;
    vuln_rating: RatingLabel;
  }): Promise<RiskRow> {
    return this.request("POST", "/api/v1/risks", body);
  }

  submitTreatment(riskId: string, body: TreatmentRequest): Promise<TreatmentResult> {
    return this.request("POST", `/api/v1/risks/${riskId}/treatment`, body);
  }

  generateSoa(): Promise<SoaDoc> {
    return this.request("POST", "/api/v1/soa/generate", {});
  }

  advancePdca(note: string): Promise<{ phase: string; iteration: number }> {
    return this.request("POST", "/api/v1/pdca/advance", { note });
  }
}

export interface Workspace {
  register: RegisterDoc;
  assets: AssetRow[];
  risks: RiskRow[];
  pdca: PdcaPayload;
  soa: SoaDoc;
  domains: DomainEntry[];
}

// Fetches everything the five views need; the client's revision ends up at
// the register's current revision, retained for later If-Match headers.
export async function loadWorkspace(client: ApiClient): Promise<Workspace> {
  const register = await client.getRegister();
  const [assets, risks, pdca, soa, domains] = await Promise.all([
    client.getAssets(),
    client.getRisks(),
    client.getPdca(),
    client.getSoa(),
    client.getDomains(),
  ]);
  return { register, assets, risks, pdca, soa, domains };
}
