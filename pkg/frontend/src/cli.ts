#!/usr/bin/env node
/** CLI: `export --in layout.json --out diagram.pptx [--units-per-inch N]`.
 *
 * Exit codes mirror the primary toolkit: 0 success, 1 partial (warnings
 * such as missing icon files, or verification findings), 2 usage/input
 * errors including schema rejections.
 */

import { readFileSync } from "node:fs";
import { dirname } from "node:path";
import { parseArgs } from "node:util";

import { emitPptx } from "./emitter.js";
import { importLayout } from "./importer.js";
import { SchemaMismatchError, UnknownVersionError } from "./schema.js";
import { verifyPackage } from "./verifier.js";

function usage(): never {
  console.error(
    "usage: layout2pptx export --in layout.json --out diagram.pptx [--units-per-inch N]",
  );
  process.exit(2);
}

async function runExport(argv: string[]): Promise<number> {
  let values;
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        in: { type: "string" },
        out: { type: "string" },
        "units-per-inch": { type: "string" },
      },
    }));
  } catch {
    usage();
  }
  const inPath = values.in;
  const outPath = values.out;
  if (!inPath || !outPath) usage();
  const upiRaw = values["units-per-inch"];
  const unitsPerInch = upiRaw === undefined ? undefined : Number(upiRaw);
  if (unitsPerInch !== undefined && !(unitsPerInch > 0)) {
    console.error("error: --units-per-inch must be a positive number");
    return 2;
  }

  let parsed: unknown;
  try {
    parsed = JSON.parse(readFileSync(inPath, "utf-8"));
  } catch (error) {
    console.error(`error: cannot read ${inPath}: ${String(error)}`);
    return 2;
  }

  let model;
  try {
    model = importLayout(parsed);
  } catch (error) {
    if (error instanceof SchemaMismatchError || error instanceof UnknownVersionError) {
      console.error(`error: ${error.message}`);
      return 2;
    }
    throw error;
  }

  const result = await emitPptx(model, outPath, {
    unitsPerInch,
    assetBase: dirname(inPath),
  });
  for (const warning of result.warnings) {
    console.error(`warning: ${warning}`);
  }

  const report = await verifyPackage(outPath, model);
  for (const entry of report.entries) {
    const mark = entry.ok ? "ok" : "FAIL";
    console.error(`verify ${mark}: ${entry.check}${entry.detail ? ` (${entry.detail})` : ""}`);
  }
  console.log(outPath);
  return report.ok ? 0 : 1;
}

async function main(): Promise<void> {
  const [command, ...rest] = process.argv.slice(2);
  if (command !== "export") usage();
  process.exit(await runExport(rest));
}

main().catch((error) => {
  console.error(`error: ${String(error)}`);
  process.exit(2);
});
