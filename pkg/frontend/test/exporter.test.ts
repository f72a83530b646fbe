import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { buildPackage, effectiveUnitsPerInch, emitPptx } from "../src/emitter.js";
import { importLayout } from "../src/importer.js";
import { SchemaMismatchError, UnknownVersionError, validateLayoutDoc } from "../src/schema.js";
import type { LayoutDoc } from "../src/types.js";
import { verifyPackage } from "../src/verifier.js";

const FIXTURES = join(__dirname, "fixtures");
const DEMO_PATH = join(FIXTURES, "demo_layout.json");

function demoDoc(): LayoutDoc {
  return JSON.parse(readFileSync(DEMO_PATH, "utf-8"));
}

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "exporter-"));
}

// 1x1 transparent PNG.
const TINY_PNG = Buffer.from(
  "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR42mP8z8BQDwAEhQGAhKmMIQAAAABJRU5ErkJggg==",
  "base64",
);

function minimalDoc(overrides: Partial<LayoutDoc> = {}): LayoutDoc {
  return {
    version: 1,
    units_per_inch: 96,
    canvas: { w: 400, h: 200 },
    nodes: [
      {
        id: "r",
        kind: "module",
        name: "root box",
        text: "",
        rect: { x: 10, y: 10, w: 380, h: 180 },
        parent: null,
        icon: null,
      },
    ],
    edges: [],
    ...overrides,
  };
}

describe("schema gate", () => {
  it("accepts the demo fixture", () => {
    expect(() => validateLayoutDoc(demoDoc())).not.toThrow();
  });

  it("rejects a missing canvas with the failing path", () => {
    const doc: Record<string, unknown> = { ...demoDoc() };
    delete doc.canvas;
    try {
      validateLayoutDoc(doc);
      expect.unreachable();
    } catch (error) {
      expect(error).toBeInstanceOf(SchemaMismatchError);
      expect((error as SchemaMismatchError).path).toBe("$.canvas");
    }
  });

  it("rejects unknown versions", () => {
    const doc = { ...demoDoc(), version: 2 };
    expect(() => validateLayoutDoc(doc)).toThrow(UnknownVersionError);
  });

  it("reports nested failing paths", () => {
    const doc = demoDoc();
    (doc.nodes[2].rect as Record<string, unknown>).w = -5;
    try {
      validateLayoutDoc(doc);
      expect.unreachable();
    } catch (error) {
      expect((error as SchemaMismatchError).path).toBe("$.nodes[2].rect.w");
    }
  });
});

describe("import", () => {
  it("builds a seven-shape model from the demo fixture", () => {
    const model = importLayout(demoDoc());
    expect(model.nodes).toHaveLength(7);
    expect(model.edges).toHaveLength(1);
  });

  it("orders parents before children", () => {
    const doc = demoDoc();
    doc.nodes.reverse();
    const model = importLayout(doc);
    const position = new Map(model.nodes.map((node, i) => [node.id, i]));
    for (const node of model.nodes) {
      if (node.parent !== null) {
        expect(position.get(node.parent)!).toBeLessThan(position.get(node.id)!);
      }
    }
  });

  it("rejects dangling edge endpoints", () => {
    const doc = demoDoc();
    doc.edges[0].target = "ghost";
    try {
      importLayout(doc);
      expect.unreachable();
    } catch (error) {
      expect((error as SchemaMismatchError).path).toBe("$.edges[0].target");
    }
  });
});

describe("emit + verify (acceptance)", () => {
  it("demo fixture: opens, shape count = nodes + connectors, text verbatim, geometry within 0.01in", async () => {
    const model = importLayout(demoDoc());
    const out = join(tmp(), "demo.pptx");
    const result = await emitPptx(model, out);
    expect(result.inventory.shapes).toBe(7);
    expect(result.inventory.connectors).toBe(1);
    // Icon/image files do not exist, so placeholders substituted.
    expect(result.warnings).toHaveLength(2);

    const report = await verifyPackage(out, model);
    const byCheck = Object.fromEntries(report.entries.map((e) => [e.check, e]));
    expect(byCheck["opens"].ok).toBe(true);
    expect(byCheck["shape count matches model"].ok).toBe(true);
    expect(byCheck["text survives verbatim"].ok).toBe(true);
    expect(byCheck["connector endpoints resolve"].ok).toBe(true);
    expect(byCheck["geometry within 0.01in"].ok).toBe(true);
    expect(report.ok).toBe(true);
  });

  it("root-only document yields a single shape", async () => {
    const model = importLayout(minimalDoc());
    const out = join(tmp(), "single.pptx");
    const result = await emitPptx(model, out);
    expect(result.inventory).toEqual({ shapes: 1, pictures: 0, connectors: 0 });
    expect((await verifyPackage(out, model)).ok).toBe(true);
  });

  it("existing icon file becomes an embedded picture shape", async () => {
    const dir = tmp();
    writeFileSync(join(dir, "icon.png"), TINY_PNG);
    const doc = minimalDoc({
      nodes: [
        {
          id: "r",
          kind: "module",
          name: "root box",
          text: "",
          rect: { x: 0, y: 0, w: 400, h: 200 },
          parent: null,
          icon: null,
        },
        {
          id: "i1",
          kind: "component-icon",
          name: "gear icon",
          text: "a gear",
          rect: { x: 20, y: 20, w: 40, h: 40 },
          parent: "r",
          icon: { type: "image", path: "icon.png" },
        },
      ],
    });
    const model = importLayout(doc);
    const out = join(dir, "icon.pptx");
    const result = await emitPptx(model, out, { assetBase: dir });
    expect(result.warnings).toHaveLength(0);
    expect(result.inventory.pictures).toBe(1);
    const report = await verifyPackage(out, model);
    expect(report.ok).toBe(true);
  });

  it("missing icon file substitutes a placeholder with a warning", async () => {
    const doc = minimalDoc({
      nodes: [
        {
          id: "r",
          kind: "module",
          name: "root box",
          text: "",
          rect: { x: 0, y: 0, w: 400, h: 200 },
          parent: null,
          icon: null,
        },
        {
          id: "i1",
          kind: "component-icon",
          name: "gear icon",
          text: "",
          rect: { x: 20, y: 20, w: 40, h: 40 },
          parent: "r",
          icon: { type: "image", path: "nope.png" },
        },
      ],
    });
    const model = importLayout(doc);
    const out = join(tmp(), "missing.pptx");
    const result = await emitPptx(model, out);
    expect(result.warnings).toHaveLength(1);
    expect(result.inventory.pictures).toBe(0);
    expect(result.inventory.shapes).toBe(2);
    expect((await verifyPackage(out, model)).ok).toBe(true);
  });

  it("unicode text (CJK, arrows) survives verbatim", async () => {
    const doc = minimalDoc({
      nodes: [
        {
          id: "r",
          kind: "module",
          name: "数据预处理模块 → 输出 ⇒ done",
          text: "",
          rect: { x: 0, y: 0, w: 400, h: 200 },
          parent: null,
          icon: null,
        },
        {
          id: "c",
          kind: "component-text",
          name: "説明",
          text: "エンコーダ → デコーダ & <piping>",
          rect: { x: 10, y: 10, w: 120, h: 60 },
          parent: "r",
          icon: null,
        },
      ],
    });
    const model = importLayout(doc);
    const out = join(tmp(), "unicode.pptx");
    await emitPptx(model, out);
    const report = await verifyPackage(out, model);
    const fidelity = report.entries.find((e) => e.check === "text survives verbatim");
    expect(fidelity?.ok).toBe(true);
  });

  it("re-export yields an identical shape inventory (and identical bytes)", async () => {
    const model = importLayout(demoDoc());
    const dir = tmp();
    const a = join(dir, "a.pptx");
    const b = join(dir, "b.pptx");
    const ra = await emitPptx(model, a);
    const rb = await emitPptx(model, b);
    expect(ra.inventory).toEqual(rb.inventory);
    expect([...ra.mapping.shapeIndex.entries()]).toEqual([...rb.mapping.shapeIndex.entries()]);
    // Timestamps are pinned, so bytes match too.
    expect(readFileSync(a).equals(readFileSync(b))).toBe(true);
  });
});

describe("mapping", () => {
  it("uses the declared scale when content fits the slide", () => {
    expect(effectiveUnitsPerInch({ w: 478, h: 302 }, 96)).toBe(96);
  });

  it("shrinks to fit oversized canvases, preserving aspect", () => {
    const upi = effectiveUnitsPerInch({ w: 4000, h: 900 }, 96);
    expect(upi).toBeCloseTo(4000 / (40 / 3), 9);
  });

  it("honors the override", () => {
    expect(effectiveUnitsPerInch({ w: 478, h: 302 }, 96, 200)).toBe(200);
  });

  it("maps every node to exactly one shape id", () => {
    const model = importLayout(demoDoc());
    const { result } = buildPackage(model);
    expect(result.mapping.shapeIndex.size).toBe(model.nodes.length);
    const ids = [...result.mapping.shapeIndex.values(), ...result.mapping.connectorIndex.values()];
    expect(new Set(ids).size).toBe(ids.length);
  });
});

describe("connector binding", () => {
  it("left-to-right edges exit right and enter left", () => {
    const doc = minimalDoc({
      nodes: [
        {
          id: "r",
          kind: "module",
          name: "root",
          text: "",
          rect: { x: 0, y: 0, w: 400, h: 200 },
          parent: null,
          icon: null,
        },
        {
          id: "a",
          kind: "tool",
          name: "left box",
          text: "",
          rect: { x: 10, y: 50, w: 100, h: 60 },
          parent: "r",
          icon: null,
        },
        {
          id: "b",
          kind: "tool",
          name: "right box",
          text: "",
          rect: { x: 250, y: 50, w: 100, h: 60 },
          parent: "r",
          icon: null,
        },
      ],
      edges: [
        {
          id: "e1",
          name: "flow",
          points: [
            { x: 110, y: 80 },
            { x: 250, y: 80 },
          ],
          source: "a",
          target: "b",
        },
      ],
    });
    const model = importLayout(doc);
    const { zip } = buildPackage(model);
    return zip
      .file("ppt/slides/slide1.xml")!
      .async("string")
      .then((xml) => {
        expect(xml).toContain('<a:stCxn id="3" idx="3"/>');
        expect(xml).toContain('<a:endCxn id="4" idx="1"/>');
        expect(xml).toContain('prst="straightConnector1"');
        expect(xml).toContain('<a:tailEnd type="triangle"/>');
      });
  });

  it("multi-segment paths become elbow connectors", () => {
    const doc = demoDoc();
    doc.edges[0].points = [
      { x: 10, y: 10 },
      { x: 10, y: 100 },
      { x: 200, y: 100 },
      { x: 200, y: 150 },
    ];
    const { zip } = buildPackage(importLayout(doc));
    return zip
      .file("ppt/slides/slide1.xml")!
      .async("string")
      .then((xml) => expect(xml).toContain('prst="bentConnector3"'));
  });
});

describe("cli", () => {
  const CLI = join(__dirname, "..", "dist", "cli.js");

  it("exports the demo fixture with exit 0", () => {
    const out = join(tmp(), "cli.pptx");
    const stdout = execFileSync("node", [CLI, "export", "--in", DEMO_PATH, "--out", out], {
      encoding: "utf-8",
    });
    expect(stdout.trim()).toBe(out);
  });

  it("rejects schema-failing documents with exit 2 and the failing path", () => {
    const dir = tmp();
    const bad = join(dir, "bad.json");
    const doc: Record<string, unknown> = demoDoc();
    delete doc.canvas;
    writeFileSync(bad, JSON.stringify(doc));
    let failed = false;
    try {
      execFileSync("node", [CLI, "export", "--in", bad, "--out", join(dir, "x.pptx")], {
        encoding: "utf-8",
        stdio: ["ignore", "pipe", "pipe"],
      });
    } catch (error) {
      failed = true;
      const err = error as { status: number; stderr: string };
      expect(err.status).toBe(2);
      expect(err.stderr).toContain("SCHEMA_MISMATCH at $.canvas");
    }
    expect(failed).toBe(true);
  });

  it("rejects unknown versions with exit 2", () => {
    const dir = tmp();
    const bad = join(dir, "v2.json");
    writeFileSync(bad, JSON.stringify({ ...demoDoc(), version: 2 }));
    let status = 0;
    try {
      execFileSync("node", [CLI, "export", "--in", bad, "--out", join(dir, "x.pptx")], {
        stdio: "pipe",
      });
    } catch (error) {
      status = (error as { status: number }).status;
    }
    expect(status).toBe(2);
  });

  it("missing input is a usage error", () => {
    let status = 0;
    try {
      execFileSync("node", [CLI, "export", "--in", "nope.json", "--out", "x.pptx"], {
        stdio: "pipe",
      });
    } catch (error) {
      status = (error as { status: number }).status;
    }
    expect(status).toBe(2);
  });
});

describe("schema file parity", () => {
  it("ships the same schema as the primary package", () => {
    const local = readFileSync(join(__dirname, "..", "schemas", "layout.schema.json"), "utf-8");
    const primary = readFileSync(
      join(__dirname, "..", "..", "src", "archigraph", "schemas", "layout.schema.json"),
      "utf-8",
    );
    expect(JSON.parse(local)).toEqual(JSON.parse(primary));
  });
});
