import { ApiClient } from "./api.js";
import { App } from "./app.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const api = new ApiClient(globalThis.fetch.bind(globalThis));
const app = new App(root, api);

window.addEventListener("hashchange", () => void app.start());
void app.start().then(() => app.startPolling());
