// Typed client for the analysis service. All server interaction goes
// through these three endpoints plus health; the UI never derives verdict
// text itself.

export interface BoxDoc {
    overall: { label: string; headline: string };
    location_source: { flag: boolean; reason: string };
    tampering: { flag: boolean; reason: string };
}

export interface MediaDoc {
    locator: string;
    kind: string;
    caption: string | null;
    format: string | null;
}

export interface AnalysisResultDoc {
    id: string;
    created_at: string;
    article: {
        title: string;
        body: string;
        media: MediaDoc[];
        source_url: string | null;
        fetched_at: string | null;
    };
    summaries: { media_ref: string; text: string; status: string }[];
    assessment: {
        origin_relevant: boolean;
        origin_reason: string;
        edits_relevant: boolean;
        edits_reason: string;
        overall: string;
        raw_model_output: string;
    };
    boxes: BoxDoc;
    warnings: string[];
    heuristic_tamper_class: string;
}

export interface ChatMessage {
    role: "user" | "assistant";
    text: string;
    at: string;
}

export interface MediaRowPayload {
    locator: string;
    kind?: string;
    caption?: string;
    sidecar?: unknown;
}

export interface ArticlePayload {
    title: string;
    body: string;
    media: MediaRowPayload[];
}

export class ApiError extends Error {
    constructor(
        message: string,
        public readonly status: number,
        public readonly stage?: string,
    ) {
        super(message);
    }
}

interface ErrorDoc {
    error?: { message?: string; stage?: string };
}

async function parseJson(response: Response): Promise<unknown> {
    const text = await response.text();
    try {
        return JSON.parse(text);
    } catch {
        throw new ApiError(`invalid JSON from server (status ${response.status})`, response.status);
    }
}

async function expectOk<T>(response: Response): Promise<T> {
    const payload = await parseJson(response);
    if (!response.ok) {
        const doc = payload as ErrorDoc;
        throw new ApiError(
            doc.error?.message ?? `request failed with status ${response.status}`,
            response.status,
            doc.error?.stage,
        );
    }
    return payload as T;
}

export class ApiClient {
    constructor(public readonly base: string) {}

    private url(path: string): string {
        return this.base.replace(/\/$/, "") + path;
    }

    async analyzeUrl(url: string): Promise<{ id: string; result: AnalysisResultDoc }> {
        const response = await fetch(this.url("/api/analyze"), {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ url }),
        });
        return expectOk(response);
    }

    async analyzeArticle(article: ArticlePayload): Promise<{ id: string; result: AnalysisResultDoc }> {
        const response = await fetch(this.url("/api/analyze"), {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ article }),
        });
        return expectOk(response);
    }

    async getAnalysis(id: string): Promise<{ result: AnalysisResultDoc }> {
        const response = await fetch(this.url(`/api/analyses/${id}`));
        return expectOk(response);
    }

    async sendQuestion(
        analysisId: string,
        question: string,
    ): Promise<{ session_id: string; messages: ChatMessage[] }> {
        const response = await fetch(this.url(`/api/analyses/${analysisId}/chat`), {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ question }),
        });
        // a 502 still carries the full message list incl. the failure notice
        const payload = await parseJson(response);
        if (!response.ok && !(payload as { messages?: unknown }).messages) {
            const doc = payload as ErrorDoc;
            throw new ApiError(
                doc.error?.message ?? `request failed with status ${response.status}`,
                response.status,
                doc.error?.stage,
            );
        }
        return payload as { session_id: string; messages: ChatMessage[] };
    }

    async health(): Promise<{ status: string; backend: string }> {
        return expectOk(await fetch(this.url("/api/health")));
    }
}

// Configuration is limited to the API base URL: ?api=… wins, then a global
// override, then same-host default port.
export function resolveApiBase(): string {
    if (typeof window !== "undefined") {
        const fromQuery = new URLSearchParams(window.location.search).get("api");
        if (fromQuery) return fromQuery;
        const fromGlobal = (window as { MEDIACONTEXT_API?: string }).MEDIACONTEXT_API;
        if (fromGlobal) return fromGlobal;
    }
    return "http://127.0.0.1:8099";
}
