/** Layout-document validation against the shipped JSON Schema. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { Ajv, type ValidateFunction } from "ajv";

import type { LayoutDoc } from "./types.js";

export class SchemaMismatchError extends Error {
  readonly code = "SCHEMA_MISMATCH";

  constructor(
    readonly path: string,
    detail: string,
  ) {
    super(`SCHEMA_MISMATCH at ${path}: ${detail}`);
  }
}

export class UnknownVersionError extends Error {
  readonly code = "UNKNOWN_VERSION";

  constructor(version: unknown) {
    super(`UNKNOWN_VERSION: expected layout document version 1, got ${String(version)}`);
  }
}

let compiled: ValidateFunction | null = null;

function schemaPath(): string {
  const here = dirname(fileURLToPath(import.meta.url));
  return join(here, "..", "schemas", "layout.schema.json");
}

function validator(): ValidateFunction {
  if (!compiled) {
    const schema = JSON.parse(readFileSync(schemaPath(), "utf-8"));
    const ajv = new Ajv({ allErrors: false, strict: false });
    compiled = ajv.compile(schema);
  }
  return compiled;
}

/** Ajv instance paths use /a/b[/0]; reports use $.a.b[0]. */
function jsonPath(instancePath: string): string {
  if (!instancePath) return "$";
  const parts = instancePath.split("/").slice(1);
  let out = "$";
  for (const part of parts) {
    out += /^\d+$/.test(part) ? `[${part}]` : `.${part}`;
  }
  return out;
}

/**
 * Validate a parsed layout document. Throws UnknownVersionError for a
 * version other than 1 and SchemaMismatchError (with the failing path) for
 * any other schema violation.
 */
export function validateLayoutDoc(doc: unknown): LayoutDoc {
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new SchemaMismatchError("$", "document must be a JSON object");
  }
  const version = (doc as Record<string, unknown>).version;
  if (version !== undefined && version !== 1) {
    throw new UnknownVersionError(version);
  }
  const validate = validator();
  if (!validate(doc)) {
    const err = validate.errors?.[0];
    let path = jsonPath(err?.instancePath ?? "");
    // Point at the absent property itself, not its parent object.
    const missing = (err?.params as { missingProperty?: string } | undefined)
      ?.missingProperty;
    if (err?.keyword === "required" && missing) {
      path = path === "$" ? `$.${missing}` : `${path}.${missing}`;
    }
    throw new SchemaMismatchError(path, err?.message ?? "schema violation");
  }
  return doc as LayoutDoc;
}
