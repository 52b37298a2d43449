/** Typed client for the detection/game HTTP API.
 *
 * All detection semantics live server-side; this module only moves JSON
 * around and never computes NFAs locally.
 */

export interface Domain {
  width: number;
  height: number;
}

export interface PatternFile {
  domain: Domain;
  points: [number, number][];
}

export interface DetectorConfig {
  mode: "basic" | "refined";
  filter: "none" | "exclusion" | "masking";
  epsilon?: number;
}

export interface DetectionRect {
  ax: number;
  ay: number;
  bx: number;
  by: number;
  width: number;
}

export interface Detection {
  rect: DetectionRect;
  log10_nfa: number;
  members: number[];
}

export interface ArchiveEntry {
  id: string;
  timestamp: string;
  pattern: PatternFile;
  config: DetectorConfig;
  detections: Detection[];
  note: string | null;
  parent_id: string | null;
}

export interface ArchivePage {
  page: number;
  page_size: number;
  total: number;
  entries: ArchiveEntry[];
}

export interface GaborElement {
  x: number;
  y: number;
  theta: number;
}

export interface ClicklineStimulus {
  session: string;
  stimulus_id: string;
  sequence: number;
  trial: number;
  tier: number;
  field: { domain: Domain; elements: GaborElement[] };
}

export interface ClicklineResult {
  session: string;
  stimulus_id: string;
  distance: number;
  score: number;
  truth: { x1: number; y1: number; x2: number; y2: number };
  tier: number;
  sequence_complete: boolean;
  sequence_mean?: number;
  next_tier?: number;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(base + path, init);
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(private base: string = "") {}

  detect(pattern: PatternFile, config: DetectorConfig): Promise<Detection[]> {
    return request<Detection[]>(this.base, "/api/detect", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ pattern, config }),
    });
  }

  archive(
    pattern: PatternFile,
    config: DetectorConfig,
    note?: string,
    parentId?: string,
  ): Promise<ArchiveEntry> {
    return request<ArchiveEntry>(this.base, "/api/archive", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        pattern,
        config,
        note: note ?? null,
        parent_id: parentId ?? null,
      }),
    });
  }

  archivePage(page = 0, pageSize = 20): Promise<ArchivePage> {
    return request<ArchivePage>(
      this.base,
      `/api/archive?page=${page}&page_size=${pageSize}`,
    );
  }

  archiveEntry(id: string): Promise<ArchiveEntry> {
    return request<ArchiveEntry>(this.base, `/api/archive/${id}`);
  }

  clicklineNext(session?: string): Promise<ClicklineStimulus> {
    const query = session ? `?session=${encodeURIComponent(session)}` : "";
    return request<ClicklineStimulus>(
      this.base,
      `/api/game/clickline/next${query}`,
    );
  }

  clicklineAnswer(session: string, x: number, y: number): Promise<ClicklineResult> {
    return request<ClicklineResult>(this.base, "/api/game/clickline/answer", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ session, x, y }),
    });
  }
}
