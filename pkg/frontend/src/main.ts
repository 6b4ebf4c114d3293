import { mountApp } from "./ui.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app element");

// Same-origin by default; override with ?api=http://host:port for a
// service running elsewhere.
const params = new URLSearchParams(window.location.search);
mountApp(root, params.get("api") ?? "");
