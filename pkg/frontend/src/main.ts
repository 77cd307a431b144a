import { ApiClient } from "./api.js";
import { App } from "./app.js";

const root = document.getElementById("app");
if (!root) throw new Error("#app container missing");

// same-origin by default; override with ?api=http://host:port for dev
const params = new URLSearchParams(window.location.search);
const app = new App(root, new ApiClient(params.get("api") ?? ""));
void app.start();
