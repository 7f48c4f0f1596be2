import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import os from "node:os";
import path from "node:path";
import { afterEach, describe, expect, it, vi } from "vitest";
import { main } from "../src/cli.js";

const FIXTURES = path.join(import.meta.dirname, "fixtures");

function tmpDir(): string {
  return mkdtempSync(path.join(os.tmpdir(), "plots-cli-"));
}

afterEach(() => {
  vi.restoreAllMocks();
});

describe("plots CLI", () => {
  it("renders a figure into --out and exits 0", () => {
    vi.spyOn(console, "log").mockImplementation(() => {});
    const out = tmpDir();
    const code = main([
      "--spec",
      path.join(FIXTURES, "fig4a.spec.json"),
      "--out",
      out,
    ]);
    expect(code).toBe(0);
    const svg = readFileSync(path.join(out, "fig4a.svg"), "utf-8");
    expect(svg).toContain("<svg ");
  });

  it("writes byte-identical output across runs", () => {
    vi.spyOn(console, "log").mockImplementation(() => {});
    const outA = tmpDir();
    const outB = tmpDir();
    const spec = path.join(FIXTURES, "fig5.spec.json");
    expect(main(["--spec", spec, "--out", outA])).toBe(0);
    expect(main(["--spec", spec, "--out", outB])).toBe(0);
    const a = readFileSync(path.join(outA, "fig5.svg"));
    const b = readFileSync(path.join(outB, "fig5.svg"));
    expect(a.equals(b)).toBe(true);
  });

  it("requires --spec", () => {
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    expect(main([])).toBe(1);
    expect(err).toHaveBeenCalledWith(
      expect.stringContaining("--spec")
    );
  });

  it("fails on unknown flags", () => {
    vi.spyOn(console, "error").mockImplementation(() => {});
    expect(main(["--bogus"])).toBe(1);
  });

  it("fails cleanly when the spec file is missing", () => {
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    expect(main(["--spec", "/no/such/spec.json"])).toBe(1);
    expect(err).toHaveBeenCalled();
  });

  it("fails cleanly on schema-mismatch inputs", () => {
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    // fig4b expects a theta sweep; hand it the lambda_d sweep instead
    const dir = tmpDir();
    const specPath = path.join(dir, "bad.spec.json");
    const sweep = path.join(FIXTURES, "sweep_lambda_digital.json");
    writeFileSync(
      specPath,
      JSON.stringify({ figure: "fig4b", inputs: [{ path: sweep }] })
    );
    expect(main(["--spec", specPath])).toBe(1);
    expect(err).toHaveBeenCalledWith(
      expect.stringContaining('expects a sweep over "theta"')
    );
  });

  it("prints usage with --help", () => {
    const log = vi.spyOn(console, "log").mockImplementation(() => {});
    expect(main(["--help"])).toBe(0);
    expect(log).toHaveBeenCalledWith(expect.stringContaining("usage:"));
  });
});
