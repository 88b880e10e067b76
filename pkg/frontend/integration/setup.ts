/** Boots a real moderation service for the round-trip suite.
 *
 * Needs the Python package installed (the `modlens` CLI on PATH). Tiny
 * checkpoints are trained once and cached under .cache/; the service
 * runs on a scratch data directory per test run.
 */

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { existsSync, mkdirSync, mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

const CACHE = join(import.meta.dirname, "..", ".cache");
const CORPUS = join(CACHE, "fixture-corpus.jsonl");
const CLASSIFIER = join(CACHE, "fixture-classifier.ckpt");
const JOINT = join(CACHE, "fixture-joint.ckpt");
export const PORT = 8914 + (process.pid % 61);

function cli(args: string[]): void {
  execFileSync("modlens", args, { stdio: "inherit", timeout: 240_000 });
}

function trainFixtures(): void {
  if (existsSync(CLASSIFIER) && existsSync(JOINT)) return;
  mkdirSync(CACHE, { recursive: true });
  cli(["synth", "--out", CORPUS, "--comments", "600", "--benign-vocab", "120",
    "--toxic", "8", "--min-tokens", "6", "--max-tokens", "14", "--seed", "5"]);
  cli(["train-classifier", "--corpus", CORPUS, "--out", CLASSIFIER,
    "--hidden", "16", "--layers", "1", "--dim", "24", "--buckets", "2048",
    "--epochs", "3", "--lr", "5e-3", "--val-size", "100", "--test-size", "100",
    "--seed", "1"]);
  cli(["train-rationale", "--corpus", CORPUS, "--out", JOINT,
    "--hidden", "16", "--layers", "1", "--dim", "24", "--buckets", "2048",
    "--epochs", "6", "--batch-size", "32", "--lr", "5e-3", "--lam1", "3e-3",
    "--lam2", "6e-3", "--samples", "2", "--z-hidden", "12",
    "--val-size", "100", "--test-size", "100", "--seed", "3"]);
}

async function waitForHealth(url: string, child: ChildProcess): Promise<void> {
  const deadline = Date.now() + 60_000;
  let exited = false;
  child.once("exit", () => {
    exited = true;
  });
  while (Date.now() < deadline) {
    if (exited) throw new Error("service exited before becoming healthy");
    try {
      const response = await fetch(`${url}/health`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error(`service at ${url} never became healthy`);
}

export default async function setup(): Promise<() => Promise<void>> {
  trainFixtures();
  const dataDir = mkdtempSync(join(tmpdir(), "modlens-ui-"));
  const child = spawn(
    "modlens",
    ["serve", "--classifier", CLASSIFIER, "--joint", JOINT,
      "--data-dir", dataDir, "--port", String(PORT)],
    { stdio: "inherit" },
  );
  const url = `http://127.0.0.1:${PORT}`;
  process.env["MODLENS_UI_TEST_API"] = url;
  await waitForHealth(url, child);
  return async () => {
    child.kill("SIGTERM");
    await new Promise((resolve) => {
      child.once("exit", resolve);
      setTimeout(resolve, 5_000);
    });
    rmSync(dataDir, { recursive: true, force: true });
  };
}
