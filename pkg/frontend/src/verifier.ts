/** Post-emit package verification.
 *
 * Re-opens the package from disk and checks it structurally: required
 * parts present, shape inventory as expected, every name/text string
 * surviving verbatim, and every connector endpoint referencing an
 * existing shape. Failures are report entries, never exceptions.
 */

import { readFileSync } from "node:fs";

import { XMLParser } from "fast-xml-parser";
import JSZip from "jszip";

import type { LayoutModel } from "./types.js";
import { EMU_PER_INCH } from "./types.js";

export interface VerificationEntry {
  check: string;
  ok: boolean;
  detail: string;
}

export interface VerificationReport {
  ok: boolean;
  entries: VerificationEntry[];
}

interface SlideInventory {
  shapeIds: Set<number>;
  shapeCount: number;
  pictureCount: number;
  connectorCount: number;
  texts: string[];
  descrs: string[];
  connectors: { start: number; end: number }[];
  /** cNvPr name attribute -> EMU offsets/extents, for geometry checks. */
  rects: Map<string, { x: number; y: number; w: number; h: number }>;
}

function asArray<T>(value: T | T[] | undefined): T[] {
  if (value === undefined) return [];
  return Array.isArray(value) ? value : [value];
}

function parseSlide(xml: string): SlideInventory {
  const parser = new XMLParser({
    ignoreAttributes: false,
    attributeNamePrefix: "@_",
    // Text nodes like <a:t> must survive even when they look numeric.
    parseTagValue: false,
  });
  const doc = parser.parse(xml);
  const tree = doc["p:sld"]["p:cSld"]["p:spTree"];

  const inventory: SlideInventory = {
    shapeIds: new Set(),
    shapeCount: 0,
    pictureCount: 0,
    connectorCount: 0,
    texts: [],
    descrs: [],
    connectors: [],
    rects: new Map(),
  };

  const recordNv = (nv: any, spPr: any) => {
    const cNvPr = nv?.["p:cNvPr"];
    if (!cNvPr) return;
    const id = Number(cNvPr["@_id"]);
    inventory.shapeIds.add(id);
    for (const attr of ["@_descr", "@_title"]) {
      const value = cNvPr[attr];
      if (typeof value === "string" && value.length > 0) inventory.descrs.push(value);
    }
    const name = cNvPr["@_name"];
    const off = spPr?.["a:xfrm"]?.["a:off"];
    const ext = spPr?.["a:xfrm"]?.["a:ext"];
    if (typeof name === "string" && off && ext) {
      inventory.rects.set(name, {
        x: Number(off["@_x"]),
        y: Number(off["@_y"]),
        w: Number(ext["@_cx"]),
        h: Number(ext["@_cy"]),
      });
    }
  };

  for (const sp of asArray(tree["p:sp"])) {
    inventory.shapeCount += 1;
    recordNv(sp["p:nvSpPr"], sp["p:spPr"]);
    for (const para of asArray(sp["p:txBody"]?.["a:p"])) {
      for (const run of asArray(para?.["a:r"])) {
        const text = run?.["a:t"];
        if (typeof text === "string") inventory.texts.push(text);
        else if (text !== undefined && text !== null) inventory.texts.push(String(text));
      }
    }
  }
  for (const pic of asArray(tree["p:pic"])) {
    inventory.shapeCount += 1;
    inventory.pictureCount += 1;
    recordNv(pic["p:nvPicPr"], pic["p:spPr"]);
  }
  for (const cxn of asArray(tree["p:cxnSp"])) {
    inventory.connectorCount += 1;
    recordNv(cxn["p:nvCxnSpPr"], cxn["p:spPr"]);
    const props = cxn["p:nvCxnSpPr"]?.["p:cNvCxnSpPr"];
    const start = props?.["a:stCxn"]?.["@_id"];
    const end = props?.["a:endCxn"]?.["@_id"];
    inventory.connectors.push({ start: Number(start), end: Number(end) });
  }
  return inventory;
}

const REQUIRED_PARTS = [
  "[Content_Types].xml",
  "_rels/.rels",
  "ppt/presentation.xml",
  "ppt/slides/slide1.xml",
  "ppt/slideMasters/slideMaster1.xml",
  "ppt/slideLayouts/slideLayout1.xml",
  "ppt/theme/theme1.xml",
];

/**
 * Verify an emitted package; when the source model is provided the shape
 * inventory, verbatim strings, and geometry (to 0.01 in) are checked
 * against it.
 */
export async function verifyPackage(
  path: string,
  model?: LayoutModel,
): Promise<VerificationReport> {
  const entries: VerificationEntry[] = [];
  const add = (check: string, ok: boolean, detail = "") =>
    entries.push({ check, ok, detail });

  let zip: JSZip;
  try {
    zip = await JSZip.loadAsync(readFileSync(path));
  } catch (error) {
    add("opens", false, `cannot open package: ${String(error)}`);
    return { ok: false, entries };
  }

  const missing = REQUIRED_PARTS.filter((part) => !zip.file(part));
  add("opens", missing.length === 0, missing.length ? `missing parts: ${missing.join(", ")}` : "");
  if (missing.includes("ppt/slides/slide1.xml")) {
    return { ok: false, entries };
  }

  let inventory: SlideInventory;
  try {
    inventory = parseSlide(await zip.file("ppt/slides/slide1.xml")!.async("string"));
  } catch (error) {
    add("slide parses", false, String(error));
    return { ok: false, entries };
  }
  add("slide parses", true);

  // Connector endpoints must reference existing shapes.
  const nodeShapeIds = inventory.shapeIds;
  const badConnectors = inventory.connectors.filter(
    (cxn) => !nodeShapeIds.has(cxn.start) || !nodeShapeIds.has(cxn.end),
  );
  add(
    "connector endpoints resolve",
    badConnectors.length === 0,
    badConnectors.length ? `${badConnectors.length} connector(s) dangling` : "",
  );

  if (model) {
    const expectedShapes = model.nodes.length;
    const expectedConnectors = model.edges.length;
    add(
      "shape count matches model",
      inventory.shapeCount === expectedShapes &&
        inventory.connectorCount === expectedConnectors,
      `shapes ${inventory.shapeCount}/${expectedShapes}, connectors ${inventory.connectorCount}/${expectedConnectors}`,
    );

    // Every name/text value must appear exactly once (text runs for plain
    // shapes, the descr attribute for pictures and connectors).
    const surviving = [...inventory.texts, ...inventory.descrs];
    const counts = new Map<string, number>();
    for (const value of surviving) counts.set(value, (counts.get(value) ?? 0) + 1);
    const expectedStrings: string[] = [];
    for (const node of model.nodes) {
      expectedStrings.push(node.name);
      if (node.text) expectedStrings.push(node.text);
    }
    for (const edge of model.edges) {
      if (edge.name) expectedStrings.push(edge.name);
    }
    const missingStrings = expectedStrings.filter((s) => (counts.get(s) ?? 0) < 1);
    const duplicated = [...new Set(expectedStrings)].filter(
      (s) =>
        (counts.get(s) ?? 0) >
        expectedStrings.filter((e) => e === s).length,
    );
    add(
      "text survives verbatim",
      missingStrings.length === 0 && duplicated.length === 0,
      [
        missingStrings.length ? `missing: ${JSON.stringify(missingStrings)}` : "",
        duplicated.length ? `duplicated: ${JSON.stringify(duplicated)}` : "",
      ]
        .filter(Boolean)
        .join("; "),
    );

    // Geometry within 0.01 inch of the scaled layout rects.
    const upiCandidates = model.nodes
      .map((node) => {
        const rect = inventory.rects.get(node.id);
        return rect && node.rect.w > 0 ? node.rect.w / (rect.w / EMU_PER_INCH) : null;
      })
      .filter((v): v is number => v !== null);
    const upi = upiCandidates.length ? upiCandidates[0] : model.doc.units_per_inch;
    const tolerance = 0.01;
    let worst = 0;
    let checked = 0;
    for (const node of model.nodes) {
      const rect = inventory.rects.get(node.id);
      if (!rect) continue;
      checked += 1;
      for (const [expected, actual] of [
        [node.rect.x / upi, rect.x / EMU_PER_INCH],
        [node.rect.y / upi, rect.y / EMU_PER_INCH],
        [node.rect.w / upi, rect.w / EMU_PER_INCH],
        [node.rect.h / upi, rect.h / EMU_PER_INCH],
      ] as const) {
        worst = Math.max(worst, Math.abs(expected - actual));
      }
    }
    add(
      "geometry within 0.01in",
      checked === model.nodes.length && worst <= tolerance,
      `checked ${checked}/${model.nodes.length}, worst ${worst.toFixed(5)} in`,
    );
  }

  return { ok: entries.every((entry) => entry.ok), entries };
}
