import { describe, expect, it } from "vitest";

import type { AnalysisResultDoc, ChatMessage } from "../src/api.js";
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
} from "../src/state.js";

const fakeResult = { id: "x" } as unknown as AnalysisResultDoc;

function msg(role: "user" | "assistant", text: string): ChatMessage {
    return { role, text, at: "2026-01-01T00:00:00Z" };
}

describe("view state", () => {
    it("starts in structured mode, idle", () => {
        const state = initialState();
        expect(state.mode).toBe("structured");
        expect(state.phase).toBe("idle");
        expect(chatVisible(state)).toBe(false);
    });

    it("toggles between modes without losing field values", () => {
        let state = initialState();
        state.title = "kept title";
        state.urlField = "http://kept";
        state = toggleMode(state);
        expect(state.mode).toBe("url");
        expect(state.title).toBe("kept title");
        state = toggleMode(state);
        expect(state.mode).toBe("structured");
        expect(state.urlField).toBe("http://kept");
    });

    it("refuses to toggle while analyzing", () => {
        let state = beginAnalysis(initialState());
        expect(state.phase).toBe("analyzing");
        expect(toggleMode(state).mode).toBe(state.mode);
    });

    it("validates per mode", () => {
        const structured = initialState();
        expect(validate(structured)).toMatch(/title/i);
        structured.title = "T";
        expect(validate(structured)).toMatch(/body/i);
        structured.body = "B";
        expect(validate(structured)).toBeNull();

        let urlMode = toggleMode(initialState());
        expect(validate(urlMode)).toMatch(/URL/);
        urlMode.urlField = "  ";
        expect(validate(urlMode)).toMatch(/URL/);
        urlMode.urlField = "http://x";
        expect(validate(urlMode)).toBeNull();
    });

    it("phase transitions gate the chat panel", () => {
        let state = beginAnalysis(initialState());
        expect(chatVisible(state)).toBe(false);
        state = completeAnalysis(state, "id1", fakeResult);
        expect(state.phase).toBe("done");
        expect(chatVisible(state)).toBe(true);
        state = failAnalysis(state, "boom");
        expect(state.phase).toBe("failed");
        expect(chatVisible(state)).toBe(false);
    });

    it("chat list never shrinks", () => {
        let state = completeAnalysis(initialState(), "id1", fakeResult);
        state = mergeChat(state, [msg("user", "q"), msg("assistant", "a")]);
        expect(state.chat).toHaveLength(2);
        // a shorter list from anywhere is ignored
        state = mergeChat(state, [msg("user", "q")]);
        expect(state.chat).toHaveLength(2);
        state = mergeChat(state, [
            msg("user", "q"),
            msg("assistant", "a"),
            msg("user", "q2"),
            msg("assistant", "a2"),
        ]);
        expect(state.chat).toHaveLength(4);
    });

    it("media rows grow one at a time", () => {
        let state = initialState();
        state = addMediaRow(state);
        state = addMediaRow(state);
        expect(state.mediaRows).toHaveLength(2);
        expect(state.mediaRows[0]).toEqual({ locator: "", caption: "", sidecar: null });
    });
});
