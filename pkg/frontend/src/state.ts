// View state and its pure transitions. The DOM layer only reflects this
// object; keeping the transitions pure makes the invariants testable
// (exactly one visible form, chat never shrinks, chat only in phase done).

import type { AnalysisResultDoc, ChatMessage } from "./api.js";

export type Mode = "structured" | "url";
export type Phase = "idle" | "analyzing" | "done" | "failed";

export interface MediaRow {
    locator: string;
    caption: string;
    sidecar: unknown | null;
}

export interface ViewState {
    mode: Mode;
    phase: Phase;
    urlField: string;
    title: string;
    body: string;
    mediaRows: MediaRow[];
    result: AnalysisResultDoc | null;
    analysisId: string | null;
    chat: ChatMessage[];
    error: string | null;
    sendingQuestion: boolean;
}

export function initialState(): ViewState {
    return {
        mode: "structured", // the full-article form is shown first
        phase: "idle",
        urlField: "",
        title: "",
        body: "",
        mediaRows: [],
        result: null,
        analysisId: null,
        chat: [],
        error: null,
        sendingQuestion: false,
    };
}

export function toggleMode(state: ViewState): ViewState {
    if (state.phase === "analyzing") {
        return state; // toggling is disabled while an analysis is in flight
    }
    return { ...state, mode: state.mode === "structured" ? "url" : "structured" };
}

export function addMediaRow(state: ViewState): ViewState {
    return { ...state, mediaRows: [...state.mediaRows, { locator: "", caption: "", sidecar: null }] };
}

export function validate(state: ViewState): string | null {
    if (state.mode === "url") {
        return state.urlField.trim() ? null : "Enter the article URL.";
    }
    if (!state.title.trim()) return "Enter the article title.";
    if (!state.body.trim()) return "Enter the article body.";
    return null;
}

export function beginAnalysis(state: ViewState): ViewState {
    return { ...state, phase: "analyzing", error: null, result: null, analysisId: null, chat: [] };
}

export function completeAnalysis(state: ViewState, id: string, result: AnalysisResultDoc): ViewState {
    return { ...state, phase: "done", result, analysisId: id, chat: [], error: null };
}

export function failAnalysis(state: ViewState, message: string): ViewState {
    return { ...state, phase: "failed", error: message };
}

export function mergeChat(state: ViewState, messages: ChatMessage[]): ViewState {
    // the server owns the history; never let a render shrink it
    if (messages.length < state.chat.length) {
        return state;
    }
    return { ...state, chat: messages };
}

export function chatVisible(state: ViewState): boolean {
    return state.phase === "done";
}
