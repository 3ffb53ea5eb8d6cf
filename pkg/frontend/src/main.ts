import { ApiClient, resolveApiBase } from "./api.js";
import { mount } from "./app.js";

window.addEventListener("DOMContentLoaded", () => {
    const root = document.getElementById("app");
    if (!root) throw new Error("missing #app container");
    mount(root, new ApiClient(resolveApiBase()));
});
