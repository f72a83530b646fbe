/** Layout model -> editable single-slide package.
 *
 * Every layout node becomes exactly one shape (a picture when its icon or
 * image file exists on disk, a placeholder shape otherwise) and every edge
 * becomes one connector bound to the endpoint shapes' connection sites, so
 * user edits re-route live. Parents are emitted before children, which
 * puts them behind in z-order.
 */

import { existsSync, readFileSync, writeFileSync } from "node:fs";
import { dirname, extname, isAbsolute, join } from "node:path";

import JSZip from "jszip";

import {
  type CxnSide,
  type EmuRect,
  type Paragraph,
  FILL_BY_KIND,
  appPropsXml,
  connectorXml,
  contentTypesXml,
  corePropsXml,
  emu,
  pictureXml,
  presentationRelsXml,
  presentationXml,
  rootRelsXml,
  shapeXml,
  slideLayoutRelsXml,
  slideLayoutXml,
  slideMasterRelsXml,
  slideMasterXml,
  slideRelsXml,
  slideXml,
  themeXml,
} from "./ooxml.js";
import type {
  LayoutEdge,
  LayoutModel,
  LayoutNode,
  RectJson,
  SlideMapping,
} from "./types.js";
import { DEFAULT_SLIDE_H_IN, DEFAULT_SLIDE_W_IN } from "./types.js";

export interface EmitOptions {
  /** Override the document's units-per-inch scale. */
  unitsPerInch?: number;
  /** Base directory for resolving icon/image paths (defaults to cwd). */
  assetBase?: string;
}

export interface EmitResult {
  mapping: SlideMapping;
  warnings: string[];
  /** Shape inventory: node shapes (sp or pic) plus connectors. */
  inventory: { shapes: number; pictures: number; connectors: number };
}

/**
 * Effective units-per-inch: the document's declared scale (or the
 * override), raised just enough that the canvas still fits the slide.
 * Uniform in both axes, so aspect ratio is preserved.
 */
export function effectiveUnitsPerInch(
  canvas: { w: number; h: number },
  declared: number,
  override?: number,
): number {
  const base = override ?? declared;
  return Math.max(base, canvas.w / DEFAULT_SLIDE_W_IN, canvas.h / DEFAULT_SLIDE_H_IN);
}

function toEmuRect(rect: RectJson, upi: number): EmuRect {
  return {
    x: emu(rect.x / upi),
    y: emu(rect.y / upi),
    w: Math.max(1, emu(rect.w / upi)),
    h: Math.max(1, emu(rect.h / upi)),
  };
}

function nodeParagraphs(node: LayoutNode): Paragraph[] {
  const container = node.kind === "module" || node.kind === "tool";
  const paragraphs: Paragraph[] = [
    { text: node.name, bold: container, sizeHundredths: container ? 1200 : 1100 },
  ];
  if (node.text) {
    paragraphs.push({ text: node.text });
  }
  return paragraphs;
}

function presetFor(node: LayoutNode): "roundRect" | "rect" | "ellipse" {
  if (node.kind === "module" || node.kind === "tool") return "roundRect";
  if (node.kind === "component-icon") return "ellipse";
  return "rect";
}

/** Exit/entry side by dominant axis between the two rectangle centers. */
function connectionSides(src: RectJson, tgt: RectJson): { start: CxnSide; end: CxnSide } {
  const dx = tgt.x + tgt.w / 2 - (src.x + src.w / 2);
  const dy = tgt.y + tgt.h / 2 - (src.y + src.h / 2);
  if (Math.abs(dx) >= Math.abs(dy)) {
    return dx >= 0 ? { start: 3, end: 1 } : { start: 1, end: 3 };
  }
  return dy >= 0 ? { start: 2, end: 0 } : { start: 0, end: 2 };
}

function connectorRect(edge: LayoutEdge, upi: number): {
  rect: EmuRect;
  flipH: boolean;
  flipV: boolean;
} {
  const first = edge.points[0];
  const last = edge.points[edge.points.length - 1];
  const x0 = Math.min(first.x, last.x) / upi;
  const y0 = Math.min(first.y, last.y) / upi;
  const w = Math.abs(last.x - first.x) / upi;
  const h = Math.abs(last.y - first.y) / upi;
  return {
    rect: { x: emu(x0), y: emu(y0), w: Math.max(1, emu(w)), h: Math.max(1, emu(h)) },
    flipH: last.x < first.x,
    flipV: last.y < first.y,
  };
}

const IMAGE_EXTENSIONS = new Set([".png", ".jpg", ".jpeg", ".gif"]);

export function buildPackage(
  model: LayoutModel,
  options: EmitOptions = {},
): { zip: JSZip; result: EmitResult } {
  const doc = model.doc;
  const upi = effectiveUnitsPerInch(doc.canvas, doc.units_per_inch, options.unitsPerInch);
  const assetBase = options.assetBase ?? ".";
  const warnings: string[] = [];

  const mapping: SlideMapping = {
    unitsPerInch: upi,
    slideSizeInches: { w: DEFAULT_SLIDE_W_IN, h: DEFAULT_SLIDE_H_IN },
    shapeIndex: new Map(),
    connectorIndex: new Map(),
  };

  const fragments: string[] = [];
  const media: { relId: string; filename: string; data: Buffer }[] = [];
  const mediaByPath = new Map<string, string>();
  let nextShapeId = 2; // id 1 is the slide's group shape
  let pictures = 0;

  const resolveImage = (path: string): Buffer | null => {
    const full = isAbsolute(path) ? path : join(assetBase, path);
    if (!existsSync(full) || !IMAGE_EXTENSIONS.has(extname(full).toLowerCase())) {
      return null;
    }
    return readFileSync(full);
  };

  for (const node of model.nodes) {
    const id = nextShapeId++;
    mapping.shapeIndex.set(node.id, id);
    const rect = toEmuRect(node.rect, upi);

    const imagePath = node.icon?.type === "image" ? node.icon.path : null;
    const data = imagePath ? resolveImage(imagePath) : null;
    if (data !== null && imagePath) {
      let relId = mediaByPath.get(imagePath);
      if (!relId) {
        relId = `rIdImg${media.length + 1}`;
        const filename = `image${media.length + 1}${extname(imagePath).toLowerCase()}`;
        media.push({ relId, filename, data });
        mediaByPath.set(imagePath, relId);
      }
      fragments.push(
        pictureXml({
          id,
          name: node.id,
          descr: node.name,
          title: node.text || undefined,
          relId,
          rect,
        }),
      );
      pictures += 1;
      continue;
    }
    if (imagePath) {
      warnings.push(`icon file missing for node ${node.id}: ${imagePath}`);
    }
    fragments.push(
      shapeXml({
        id,
        name: node.id,
        preset: presetFor(node),
        rect,
        fill: FILL_BY_KIND[node.kind] ?? "FFFFFF",
        paragraphs: nodeParagraphs(node),
        textBox: node.kind === "component-text",
      }),
    );
  }

  for (const edge of model.edges) {
    const id = nextShapeId++;
    mapping.connectorIndex.set(edge.id, id);
    const src = model.nodeById.get(edge.source)!;
    const tgt = model.nodeById.get(edge.target)!;
    const sides = connectionSides(src.rect, tgt.rect);
    const { rect, flipH, flipV } = connectorRect(edge, upi);
    fragments.push(
      connectorXml({
        id,
        name: edge.id,
        descr: edge.name,
        preset: edge.points.length > 2 ? "bentConnector3" : "straightConnector1",
        rect,
        flipH,
        flipV,
        startShapeId: mapping.shapeIndex.get(edge.source)!,
        startSide: sides.start,
        endShapeId: mapping.shapeIndex.get(edge.target)!,
        endSide: sides.end,
      }),
    );
  }

  const zip = new JSZip();
  const date = new Date(Date.UTC(2020, 0, 1));
  const put = (path: string, content: string | Buffer) =>
    zip.file(path, content, { date });

  const imageExts = [...new Set(media.map((m) => extname(m.filename).slice(1)))];
  put("[Content_Types].xml", contentTypesXml(imageExts));
  put("_rels/.rels", rootRelsXml());
  put("docProps/core.xml", corePropsXml());
  put("docProps/app.xml", appPropsXml());
  put("ppt/presentation.xml", presentationXml(DEFAULT_SLIDE_W_IN, DEFAULT_SLIDE_H_IN));
  put("ppt/_rels/presentation.xml.rels", presentationRelsXml());
  put("ppt/slideMasters/slideMaster1.xml", slideMasterXml());
  put("ppt/slideMasters/_rels/slideMaster1.xml.rels", slideMasterRelsXml());
  put("ppt/slideLayouts/slideLayout1.xml", slideLayoutXml());
  put("ppt/slideLayouts/_rels/slideLayout1.xml.rels", slideLayoutRelsXml());
  put("ppt/theme/theme1.xml", themeXml());
  put("ppt/slides/slide1.xml", slideXml(fragments));
  put(
    "ppt/slides/_rels/slide1.xml.rels",
    slideRelsXml(media.map((m) => ({ relId: m.relId, target: `../media/${m.filename}` }))),
  );
  for (const item of media) {
    put(`ppt/media/${item.filename}`, item.data);
  }

  return {
    zip,
    result: {
      mapping,
      warnings,
      inventory: {
        shapes: model.nodes.length,
        pictures,
        connectors: model.edges.length,
      },
    },
  };
}

export async function emitPptx(
  model: LayoutModel,
  outPath: string,
  options: EmitOptions = {},
): Promise<EmitResult> {
  const { zip, result } = buildPackage(model, {
    assetBase: options.assetBase ?? dirname(outPath),
    ...options,
  });
  const bytes = await zip.generateAsync({
    type: "nodebuffer",
    compression: "DEFLATE",
    compressionOptions: { level: 6 },
  });
  writeFileSync(outPath, bytes);
  return result;
}
