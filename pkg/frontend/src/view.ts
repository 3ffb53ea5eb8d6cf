// DOM construction and the render functions for the result and chat
// panels. Verdict strings are assigned with textContent straight from the
// API document; flags additionally get an icon and a word so state is not
// encoded by color alone. No element here ever deletes or edits a chat
// message.

import type { AnalysisResultDoc, ChatMessage } from "./api.js";

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    attrs: Record<string, string> = {},
    text?: string,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    for (const [key, value] of Object.entries(attrs)) {
        node.setAttribute(key, value);
    }
    if (text !== undefined) {
        node.textContent = text;
    }
    return node;
}

export function buildShell(root: HTMLElement): void {
    root.replaceChildren();
    const header = el("header");
    header.append(el("h1", {}, "Media relevance check"));
    header.append(
        el(
            "p",
            { class: "tagline" },
            "Does the attached media actually belong to this story? Provenance metadata plus a language-model verdict.",
        ),
    );

    const toggle = el("div", { class: "mode-toggle", role: "group", "aria-label": "Input mode" });
    toggle.append(
        el("button", { type: "button", "data-testid": "mode-structured" }, "Full article"),
        el("button", { type: "button", "data-testid": "mode-url" }, "URL"),
    );

    const structuredForm = el("form", { "data-testid": "form-structured", class: "input-form" });
    structuredForm.append(
        labeled("Title", el("input", { type: "text", "data-testid": "field-title" })),
        labeled("Body", el("textarea", { rows: "6", "data-testid": "field-body" })),
    );
    const mediaRows = el("div", { "data-testid": "media-rows" });
    structuredForm.append(mediaRows);
    structuredForm.append(
        el("button", { type: "button", "data-testid": "add-media-row" }, "Add media"),
    );

    const urlForm = el("form", { "data-testid": "form-url", class: "input-form" });
    urlForm.append(labeled("Article URL", el("input", { type: "url", "data-testid": "field-url" })));

    const submit = el("button", { type: "button", "data-testid": "submit" }, "Submit");
    const status = el("p", { "data-testid": "status", class: "status" });
    const errorBox = el("p", { "data-testid": "error", class: "error", hidden: "" });
    const retry = el("button", { type: "button", "data-testid": "retry", hidden: "" }, "Retry");

    const result = el("section", { "data-testid": "result", hidden: "" });
    const chat = el("section", { "data-testid": "chat", hidden: "" });
    chat.append(el("h2", {}, "Follow-up questions"));
    chat.append(el("ol", { "data-testid": "chat-messages", class: "chat-messages" }));
    const chatForm = el("div", { class: "chat-form" });
    chatForm.append(
        el("input", { type: "text", "data-testid": "chat-input", placeholder: "Ask about this analysis" }),
        el("button", { type: "button", "data-testid": "chat-send" }, "Send"),
    );
    chat.append(chatForm);

    root.append(header, toggle, structuredForm, urlForm, submit, status, errorBox, retry, result, chat);
}

function labeled(text: string, control: HTMLElement): HTMLElement {
    const wrapper = el("label", { class: "field" });
    wrapper.append(el("span", {}, text), control);
    return wrapper;
}

export function addMediaRowElement(container: HTMLElement): HTMLElement {
    const row = el("div", { class: "media-row", "data-testid": "media-row" });
    row.append(
        el("input", { type: "text", placeholder: "Image URL or path", "data-testid": "row-locator" }),
        el("input", { type: "text", placeholder: "Caption (optional)", "data-testid": "row-caption" }),
        el("input", { type: "file", accept: ".json,application/json", "data-testid": "row-sidecar" }),
    );
    container.append(row);
    return row;
}

function box(testId: string, title: string): { section: HTMLElement; headline: HTMLElement; body: HTMLElement } {
    const section = el("section", { class: "box", "data-testid": testId });
    section.append(el("h3", {}, title));
    const headline = el("p", { class: "box-headline" });
    const body = el("p", { class: "box-reason" });
    section.append(headline, body);
    return { section, headline, body };
}

function flagText(flag: boolean): string {
    // icon + word, not color: ✓ relevant / ⚠ flagged
    return flag ? "✓ relevant" : "⚠ flagged";
}

export function renderResult(container: HTMLElement, result: AnalysisResultDoc): void {
    container.replaceChildren();

    const overall = box("box-overall", "Overall assessment");
    overall.headline.append(
        el("strong", { "data-testid": "overall-label" }, result.boxes.overall.label),
    );
    overall.body.textContent = result.boxes.overall.headline;

    const location = box("box-location", "Location and Source");
    location.headline.append(
        el("span", { "data-testid": "location-flag" }, flagText(result.boxes.location_source.flag)),
    );
    const locationReason = el("span", { "data-testid": "location-reason" }, result.boxes.location_source.reason);
    location.body.append(locationReason);

    const tampering = box("box-tampering", "Tampering");
    tampering.headline.append(
        el("span", { "data-testid": "tampering-flag" }, flagText(result.boxes.tampering.flag)),
    );
    tampering.body.append(
        el("span", { "data-testid": "tampering-reason" }, result.boxes.tampering.reason),
    );

    container.append(overall.section, location.section, tampering.section);

    if (result.warnings.length > 0) {
        const warnings = el("ul", { "data-testid": "warnings", class: "warnings" });
        for (const warning of result.warnings) {
            warnings.append(el("li", {}, warning));
        }
        container.append(warnings);
    }
}

export function renderChat(list: HTMLElement, messages: ChatMessage[]): void {
    list.replaceChildren();
    for (const message of messages) {
        const item = el("li", { class: `chat-${message.role}` });
        item.append(
            el("span", { class: "chat-role" }, message.role === "user" ? "You" : "Model"),
            el("span", { class: "chat-text" }, message.text),
        );
        list.append(item);
    }
}
