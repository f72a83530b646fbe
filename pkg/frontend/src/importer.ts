/** Layout-document import: schema gate plus referential checks and
 * parent-before-child draw ordering. */

import { SchemaMismatchError, validateLayoutDoc } from "./schema.js";
import type { LayoutDoc, LayoutModel, LayoutNode } from "./types.js";

/**
 * Validate and index a layout document.
 *
 * Beyond the JSON Schema, every parent pointer and edge endpoint must
 * resolve to a declared node; the returned node list is reordered (stably)
 * so parents come before their children, which is also the z-order used
 * when drawing.
 */
export function importLayout(doc: unknown): LayoutModel {
  const layout: LayoutDoc = validateLayoutDoc(doc);

  const nodeById = new Map<string, LayoutNode>();
  layout.nodes.forEach((node, i) => {
    if (nodeById.has(node.id)) {
      throw new SchemaMismatchError(`$.nodes[${i}].id`, `duplicate node id ${node.id}`);
    }
    nodeById.set(node.id, node);
  });
  layout.nodes.forEach((node, i) => {
    if (node.parent !== null && !nodeById.has(node.parent)) {
      throw new SchemaMismatchError(
        `$.nodes[${i}].parent`,
        `parent ${node.parent} does not resolve`,
      );
    }
  });
  layout.edges.forEach((edge, i) => {
    for (const key of ["source", "target"] as const) {
      if (!nodeById.has(edge[key])) {
        throw new SchemaMismatchError(
          `$.edges[${i}].${key}`,
          `${key} ${edge[key]} does not resolve`,
        );
      }
    }
  });

  // Stable parent-first ordering: repeatedly emit nodes whose parent is
  // already placed. Input order is preserved within each wave.
  const ordered: LayoutNode[] = [];
  const placed = new Set<string>();
  let pending = layout.nodes.slice();
  while (pending.length > 0) {
    const ready = pending.filter(
      (node) => node.parent === null || placed.has(node.parent),
    );
    if (ready.length === 0) {
      throw new SchemaMismatchError("$.nodes", "containment relation has a cycle");
    }
    for (const node of ready) {
      ordered.push(node);
      placed.add(node.id);
    }
    pending = pending.filter((node) => !placed.has(node.id));
  }

  return { doc: layout, nodes: ordered, edges: layout.edges, nodeById };
}
