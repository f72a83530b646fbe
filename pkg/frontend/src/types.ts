/** Shared types for the layout document and the slide mapping. */

export interface RectJson {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface PointJson {
  x: number;
  y: number;
}

export type NodeKind =
  | "module"
  | "tool"
  | "component-text"
  | "component-icon"
  | "component-image";

export type IconRef =
  | { type: "image"; path: string }
  | { type: "placeholder"; glyph: string }
  | null;

export interface LayoutNode {
  id: string;
  kind: NodeKind;
  name: string;
  text: string;
  rect: RectJson;
  parent: string | null;
  icon: IconRef;
}

export interface LayoutEdge {
  id: string;
  name: string;
  points: PointJson[];
  source: string;
  target: string;
}

export interface LayoutDoc {
  version: 1;
  units_per_inch: number;
  canvas: { w: number; h: number };
  nodes: LayoutNode[];
  edges: LayoutEdge[];
}

/** Validated in-memory model with parents ordered before children. */
export interface LayoutModel {
  doc: LayoutDoc;
  nodes: LayoutNode[]; // draw order: every parent precedes its children
  edges: LayoutEdge[];
  nodeById: Map<string, LayoutNode>;
}

/** How abstract layout units land on the slide. */
export interface SlideMapping {
  unitsPerInch: number;
  slideSizeInches: { w: number; h: number };
  /** node id -> numeric shape id inside the slide part */
  shapeIndex: Map<string, number>;
  /** edge id -> numeric shape id of its connector */
  connectorIndex: Map<string, number>;
}

export const DEFAULT_SLIDE_W_IN = 40 / 3; // 13.333... (16:9)
export const DEFAULT_SLIDE_H_IN = 7.5;
export const EMU_PER_INCH = 914400;
