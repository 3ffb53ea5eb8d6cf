// Wires the state transitions to the DOM: input toggle, submission with
// phase transitions, result rendering, and the append-only chat panel.

import { ApiClient, ApiError, type MediaRowPayload } from "./api.js";
import {
    addMediaRow,
    beginAnalysis,
    chatVisible,
    completeAnalysis,
    failAnalysis,
    initialState,
    mergeChat,
    toggleMode,
    validate,
    type ViewState,
} from "./state.js";
import { addMediaRowElement, buildShell, renderChat, renderResult } from "./view.js";

export class App {
    state: ViewState = initialState();

    private root: HTMLElement;
    private api: ApiClient;

    constructor(root: HTMLElement, api: ApiClient) {
        this.root = root;
        this.api = api;
        buildShell(root);
        this.wire();
        this.reflect();
    }

    private query<T extends HTMLElement>(testId: string): T {
        const node = this.root.querySelector(`[data-testid="${testId}"]`);
        if (!node) throw new Error(`missing element ${testId}`);
        return node as T;
    }

    private wire(): void {
        this.query("mode-structured").addEventListener("click", () => this.setMode("structured"));
        this.query("mode-url").addEventListener("click", () => this.setMode("url"));
        this.query("add-media-row").addEventListener("click", () => {
            this.state = addMediaRow(this.state);
            this.wireMediaRow(addMediaRowElement(this.query("media-rows")), this.state.mediaRows.length - 1);
        });
        this.query("submit").addEventListener("click", () => void this.submit());
        this.query("retry").addEventListener("click", () => void this.submit());
        this.query("chat-send").addEventListener("click", () => void this.sendQuestion());
        this.query<HTMLInputElement>("chat-input").addEventListener("keydown", (event) => {
            if ((event as KeyboardEvent).key === "Enter") void this.sendQuestion();
        });

        this.query<HTMLInputElement>("field-title").addEventListener("input", (event) => {
            this.state.title = (event.target as HTMLInputElement).value;
        });
        this.query<HTMLTextAreaElement>("field-body").addEventListener("input", (event) => {
            this.state.body = (event.target as HTMLTextAreaElement).value;
        });
        this.query<HTMLInputElement>("field-url").addEventListener("input", (event) => {
            this.state.urlField = (event.target as HTMLInputElement).value;
        });
    }

    private wireMediaRow(row: HTMLElement, index: number): void {
        const locator = row.querySelector('[data-testid="row-locator"]') as HTMLInputElement;
        const caption = row.querySelector('[data-testid="row-caption"]') as HTMLInputElement;
        const sidecar = row.querySelector('[data-testid="row-sidecar"]') as HTMLInputElement;
        locator.addEventListener("input", () => {
            const entry = this.state.mediaRows[index];
            if (entry) entry.locator = locator.value;
        });
        caption.addEventListener("input", () => {
            const entry = this.state.mediaRows[index];
            if (entry) entry.caption = caption.value;
        });
        sidecar.addEventListener("change", () => {
            const file = sidecar.files?.[0];
            const entry = this.state.mediaRows[index];
            if (!file || !entry) return;
            void file.text().then((text) => {
                try {
                    entry.sidecar = JSON.parse(text);
                } catch {
                    entry.sidecar = null;
                    this.showError("Sidecar file is not valid JSON.");
                }
            });
        });
    }

    private setMode(mode: "structured" | "url"): void {
        if (this.state.mode !== mode) {
            this.state = toggleMode(this.state);
        }
        this.reflect();
    }

    private showError(message: string | null): void {
        const node = this.query("error");
        node.textContent = message ?? "";
        node.hidden = message === null;
    }

    // Reflect phase/mode onto visibility and disabled flags. Hidden forms
    // keep their values: the elements stay in the DOM.
    private reflect(): void {
        const analyzing = this.state.phase === "analyzing";
        this.query("form-structured").hidden = this.state.mode !== "structured";
        this.query("form-url").hidden = this.state.mode !== "url";
        this.query<HTMLButtonElement>("mode-structured").disabled = analyzing;
        this.query<HTMLButtonElement>("mode-url").disabled = analyzing;
        this.query<HTMLButtonElement>("submit").disabled = analyzing;
        this.query("status").textContent =
            analyzing ? "Analyzing…" : this.state.phase === "done" ? "Analysis complete." : "";
        this.query("retry").hidden = this.state.phase !== "failed";
        this.query("result").hidden = !(this.state.phase === "done" && this.state.result !== null);
        this.query("chat").hidden = !chatVisible(this.state);
        this.query<HTMLButtonElement>("chat-send").disabled = this.state.sendingQuestion;
    }

    async submit(): Promise<void> {
        if (this.state.phase === "analyzing") return;
        const problem = validate(this.state);
        if (problem) {
            this.showError(problem);
            return; // no request is issued for invalid forms
        }
        this.showError(null);
        this.state = beginAnalysis(this.state);
        this.reflect();
        try {
            const response =
                this.state.mode === "url"
                    ? await this.api.analyzeUrl(this.state.urlField.trim())
                    : await this.api.analyzeArticle({
                          title: this.state.title,
                          body: this.state.body,
                          media: this.state.mediaRows
                              .filter((row) => row.locator.trim())
                              .map((row): MediaRowPayload => {
                                  const payload: MediaRowPayload = { locator: row.locator.trim() };
                                  if (row.caption.trim()) payload.caption = row.caption.trim();
                                  if (row.sidecar !== null) payload.sidecar = row.sidecar;
                                  return payload;
                              }),
                      });
            this.state = completeAnalysis(this.state, response.id, response.result);
            renderResult(this.query("result"), response.result);
        } catch (error) {
            const message =
                error instanceof ApiError
                    ? error.stage
                        ? `Analysis failed at stage '${error.stage}': ${error.message}`
                        : error.message
                    : `Could not reach the analysis service: ${String(error)}`;
            this.state = failAnalysis(this.state, message);
            this.showError(message);
        }
        this.reflect();
    }

    async sendQuestion(): Promise<void> {
        if (this.state.sendingQuestion || this.state.phase !== "done" || !this.state.analysisId) {
            return;
        }
        const input = this.query<HTMLInputElement>("chat-input");
        const question = input.value;
        if (!question.trim()) {
            return; // whitespace-only questions never reach the server
        }
        this.state.sendingQuestion = true;
        this.reflect();
        try {
            const response = await this.api.sendQuestion(this.state.analysisId, question);
            this.state = mergeChat(this.state, response.messages);
            renderChat(this.query("chat-messages"), this.state.chat);
            input.value = "";
        } catch (error) {
            this.showError(error instanceof Error ? error.message : String(error));
        } finally {
            this.state.sendingQuestion = false;
            this.reflect();
        }
    }
}

export function mount(root: HTMLElement, api: ApiClient): App {
    return new App(root, api);
}
