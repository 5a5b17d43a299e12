// @vitest-environment jsdom
//
// Browser-style flow against the real service running with the mock
// provider: describe -> diagram shown -> feedback -> diagram updated ->
// export download. The scripted replies come from the repo's order
// story, whose first reply is intentionally broken, so the repair loop
// runs inside this flow as well.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { mountApp, type App } from "../src/main";

const REPO_ROOT = resolve(__dirname, "..", "..");
const STORY = join(REPO_ROOT, "scripts", "data", "order_story.json");

let service: ChildProcess;
let serviceLog = "";
let baseUrl: string;
let app: App;

function freePort(): Promise<number> {
  return new Promise((ok, fail) => {
    const probe = createServer();
    probe.once("error", fail);
    probe.listen(0, "127.0.0.1", () => {
      const port = (probe.address() as { port: number }).port;
      probe.close(() => ok(port));
    });
  });
}

async function waitForService(url: string, timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${url}/api/sessions/probe/history`);
      if (response.status === 404) return; // up: unknown-session as expected
    } catch (err) {
      lastError = err;
    }
    await new Promise((tick) => setTimeout(tick, 150));
  }
  throw new Error(
    `service did not come up: ${lastError}\n--- log ---\n${serviceLog}`);
}

function svgNodeCount(): number {
  const svg = document.querySelector(".diagram-host svg");
  if (!svg) return 0;
  return svg.querySelectorAll("rect, circle, polygon").length;
}

beforeAll(async () => {
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  const workDir = mkdtempSync(join(tmpdir(), "powlgen-ui-e2e-"));
  const configPath = join(workDir, "app.conf");
  writeFileSync(configPath, [
    `listen_addr = 127.0.0.1:${port}`,
    "provider = mock",
    `mock_script = ${STORY}`,
    `store_dir = ${join(workDir, "store")}`,
    "",
  ].join("\n"));

  service = spawn("python3", ["-m", "powlgen.cli", "serve",
                              "--config", configPath],
                  { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] });
  service.stdout?.on("data", (chunk) => { serviceLog += chunk; });
  service.stderr?.on("data", (chunk) => { serviceLog += chunk; });
  await waitForService(baseUrl, 30_000);

  document.body.innerHTML = '<div id="app"></div>';
  app = mountApp(document.getElementById("app")!, { baseUrl });
}, 60_000);

afterAll(() => {
  service?.kill("SIGTERM");
});

describe.sequential("full session flow against the live service", () => {
  it("generates a model from a description and shows the diagram",
     async () => {
    const input = document.querySelector<HTMLTextAreaElement>(
      "textarea.description")!;
    input.value =
      "After an order is placed the items are gathered, paid, and shipped; "
      + "loyal customers may pick a reward.";
    await app.generate();

    expect(app.state().phase, serviceLog).toBe("ready");
    // the story's first reply is broken, so the repair loop ran once
    expect(app.state().history[0]?.kind).toBe("generated");
    expect(app.state().history[0]?.attempts).toBe(2);
    expect(svgNodeCount()).toBe(19); // baseline order process, BPMN view
  }, 30_000);

  it("updates the diagram after each feedback round", async () => {
    const before = document.querySelector(".diagram-host")!.innerHTML;
    const feedback = document.querySelector<HTMLInputElement>(
      "input.feedback")!;

    feedback.value =
      "Model the item selection as a loop so more items can be added.";
    await app.refine();
    expect(app.state().phase).toBe("ready");
    expect(svgNodeCount()).toBe(21); // the loop adds a gateway pair
    expect(document.querySelector(".diagram-host")!.innerHTML)
      .not.toBe(before);

    feedback.value = "Allow skipping the reward selection entirely.";
    await app.refine();
    expect(app.state().phase).toBe("ready");
    expect(svgNodeCount()).toBe(23); // matches the shipped fixture graph
    expect(app.state().history.map((e) => e.kind))
      .toEqual(["generated", "refined", "refined"]);
  }, 30_000);

  it("downloads all four export formats", async () => {
    const text = new TextDecoder();
    const pnml = text.decode(await app.downloadExport("pnml"));
    expect(pnml.startsWith("<?xml")).toBe(true);
    expect(pnml).toContain("pnml");

    const bpmn = text.decode(await app.downloadExport("bpmn"));
    expect(bpmn).toContain("definitions");

    const powlJson = JSON.parse(
      text.decode(await app.downloadExport("powl-json")));
    expect(powlJson.type).toBe("partial_order");

    const pcl = text.decode(await app.downloadExport("pcl"));
    expect(pcl).toContain("final(");

    // the bytes served match a direct download of the persisted export
    const direct = await fetch(
      `${baseUrl}/api/sessions/${app.state().sessionId}/model?format=pnml`);
    expect(text.decode(new Uint8Array(await direct.arrayBuffer())))
      .toBe(pnml);
  }, 30_000);

  it("drives the whole flow without persisting anything in the browser",
     () => {
    expect(window.localStorage.length).toBe(0);
    expect(window.sessionStorage.length).toBe(0);
    expect(document.cookie).toBe("");
  });
});
