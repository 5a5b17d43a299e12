// Browser entry point: mount the app on the page. Kept separate from
// main.ts so tests can import mountApp without side effects.

import { mountApp } from "./main";

const root = document.getElementById("app");
if (root) {
  // same-origin by default: the service serves these assets itself
  mountApp(root, { baseUrl: "" });
}
