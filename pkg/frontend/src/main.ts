import { ApiClient } from "./api";
import { createApp } from "./app";
import "./style.css";

// API base injected at build time; same-origin by default.
const base = import.meta.env.VITE_API_BASE ?? "";

const root = document.getElementById("app");
if (root) {
  createApp(root, new ApiClient(base)).catch((err) => {
    root.textContent = `failed to start: ${err}`;
  });
}
