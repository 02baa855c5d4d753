import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { PropertyColumn, writeMatrix, writeMatrixCsv, writeProperties, writeSequences } from "./formats.js";
import { coreError, runCli } from "./runner.js";
import { ArrayView, elementType, isArrayView } from "./views.js";

// ---------------------------------------------------------------------------
// run description

export interface FoldSpec {
  K: number;
  seed?: number;
}

/** One metric request, mirroring the engine's config entry one to one. */
export interface MetricEntry {
  name: string;
  label?: string;
  representation?: string;
  direction?: "maximize" | "minimize";
  fold?: FoldSpec;
  parameters?: Record<string, unknown>;
}

/** Per-group payload for one representation: an embedding view or a property table. */
export type GroupData = ArrayView | readonly PropertyColumn[];

/** Computes a group's representation from its sequences, called once per group. */
export type RepresentationFn = (batch: readonly string[]) => GroupData;

/** A representation the engine derives itself from the sequences. */
export interface EngineRepresentation {
  kind: "kmer" | "length";
  parameters?: Record<string, unknown>;
}

export type Representation =
  | GroupData
  | Record<string, GroupData>
  | RepresentationFn
  | EngineRepresentation;

export interface EvaluateOptions {
  /** Group name (or sequence-file path) the reference metrics compare against. */
  reference?: string;
  seed?: number;
  jobs?: number;
  /** Keep and reuse this directory instead of a throwaway temp dir. */
  workdir?: string;
}

// ---------------------------------------------------------------------------
// report record tree

export interface MetricHeader {
  name: string;
  direction: "maximize" | "minimize";
  arity: string;
}

export interface ValueCell {
  value: number;
  deviation?: number;
  per_fold?: number[];
}

export interface ErrorCell {
  error: string;
}

export type Cell = ValueCell | ErrorCell;

export interface Report {
  groups: string[];
  metrics: MetricHeader[];
  cells: Record<string, Record<string, Cell>>;
}

export function isErrorCell(c: Cell): c is ErrorCell {
  return "error" in c;
}

export function cellOf(report: Report, group: string, metric: string): Cell {
  const row = report.cells[group];
  if (row === undefined) throw new Error(`report has no group '${group}'`);
  const c = row[metric];
  if (c === undefined) throw new Error(`report has no metric '${metric}'`);
  return c;
}

/** The cell's value, rethrowing an error cell's engine text as an exception. */
export function valueOf(report: Report, group: string, metric: string): number {
  const c = cellOf(report, group, metric);
  if (isErrorCell(c)) throw new Error(c.error);
  return c.value;
}

// ---------------------------------------------------------------------------

function isEngineRep(x: Representation): x is EngineRepresentation {
  return (
    typeof x === "object" &&
    x !== null &&
    !Array.isArray(x) &&
    ((x as EngineRepresentation).kind === "kmer" || (x as EngineRepresentation).kind === "length")
  );
}

function isGroupData(x: unknown): x is GroupData {
  return isArrayView(x) || Array.isArray(x);
}

interface Workspace {
  dir: string;
  ephemeral: boolean;
}

function openWorkspace(options: EvaluateOptions): Workspace {
  if (options.workdir !== undefined) {
    fs.mkdirSync(options.workdir, { recursive: true });
    return { dir: options.workdir, ephemeral: false };
  }
  return { dir: fs.mkdtempSync(path.join(os.tmpdir(), "seqeval-")), ephemeral: true };
}

// File names inside the workspace are positional; group and representation
// names can hold characters a path cannot.
function writeGroupData(dir: string, stem: string, data: GroupData): string {
  if (isArrayView(data)) {
    if (elementType(data) === "f32") {
      writeMatrix(path.join(dir, `${stem}.bin`), data);
      return `${stem}.bin`;
    }
    writeMatrixCsv(path.join(dir, `${stem}.csv`), data);
    return `${stem}.csv`;
  }
  writeProperties(path.join(dir, `${stem}.props.csv`), data);
  return `${stem}.props.csv`;
}

interface RepFailure {
  repId: string;
  group: string;
  message: string;
}

/**
 * Evaluate groups of sequences against a list of metrics.
 *
 * Representations carry the numeric side: a single view or property table
 * (one group only), a per-group record of those, a function of the batch,
 * or an engine-side recipe such as a k-mer profile. Views are written to
 * the engine without copying their payload.
 *
 * Returns the engine's report as a record tree. Per-cell failures stay in
 * the tree as error cells; config-level problems throw with the engine's
 * message.
 */
export function evaluate(
  groups: Record<string, readonly string[]>,
  metrics: readonly MetricEntry[],
  representations: Record<string, Representation> = {},
  options: EvaluateOptions = {},
): Report {
  const groupNames = Object.keys(groups);
  if (groupNames.length === 0) throw new Error("evaluate needs at least one group");
  if (metrics.length === 0) throw new Error("evaluate needs at least one metric");

  const ws = openWorkspace(options);
  try {
    const groupFiles: Record<string, string> = {};
    groupNames.forEach((name, i) => {
      const file = `g${i}.txt`;
      writeSequences(path.join(ws.dir, file), groups[name]!);
      groupFiles[name] = file;
    });

    const failures: RepFailure[] = [];
    const repsConfig: Record<string, unknown> = {};
    let repIndex = 0;
    for (const [repId, rep] of Object.entries(representations)) {
      const stem = `rep${repIndex}`;
      repIndex += 1;
      if (isEngineRep(rep)) {
        repsConfig[repId] = rep.parameters === undefined ? { kind: rep.kind } : { kind: rep.kind, parameters: rep.parameters };
        continue;
      }
      const paths: Record<string, string> = {};
      if (typeof rep === "function") {
        groupNames.forEach((g, gi) => {
          let data: GroupData;
          try {
            data = rep(groups[g]!);
          } catch (exc) {
            failures.push({ repId, group: g, message: exc instanceof Error ? exc.message : String(exc) });
            // point at a file that never gets written so the cell fails in the engine too
            paths[g] = `${stem}_g${gi}.missing.bin`;
            return;
          }
          paths[g] = writeGroupData(ws.dir, `${stem}_g${gi}`, data);
        });
      } else if (isGroupData(rep)) {
        if (groupNames.length !== 1) {
          throw new Error(
            `representation '${repId}' is a single matrix or table but there are ${groupNames.length} groups; pass a per-group object`,
          );
        }
        paths[groupNames[0]!] = writeGroupData(ws.dir, stem, rep);
      } else {
        let gi = 0;
        for (const [g, data] of Object.entries(rep)) {
          if (!(g in groups) && g !== "reference") {
            throw new Error(`representation '${repId}' names unknown group '${g}'`);
          }
          if (!isGroupData(data)) {
            throw new Error(`representation '${repId}', group '${g}': not a view or property table`);
          }
          paths[g] = writeGroupData(ws.dir, `${stem}_g${gi}`, data);
          gi += 1;
        }
        if (gi === 0) throw new Error(`representation '${repId}' maps no groups`);
      }
      repsConfig[repId] = { kind: "file", parameters: { paths } };
    }

    // The engine names report columns by display label, which defaults to a
    // prettified form; pin it to the caller's own name so the record tree is
    // addressable without a lookup table.
    const wireMetrics = metrics.map((m) => ({ ...m, label: m.label ?? m.name }));
    const config = {
      config_version: 1,
      groups: groupFiles,
      ...(options.reference !== undefined ? { reference: options.reference } : {}),
      representations: repsConfig,
      metrics: wireMetrics,
      outputs: [{ format: "json", path: "report.json" }],
      seed: options.seed ?? 0,
    };
    fs.writeFileSync(path.join(ws.dir, "config.json"), JSON.stringify(config, null, 2) + "\n");

    const args = ["evaluate", "--config", "config.json", "--allow-errors"];
    if (options.jobs !== undefined) args.push("--jobs", String(options.jobs));
    const run = runCli(args, ws.dir);
    if (run.status !== 0) {
      throw new Error(coreError(run.stderr));
    }

    const report = JSON.parse(fs.readFileSync(path.join(ws.dir, "report.json"), "utf8")) as Report;
    spliceCallableFailures(report, metrics, failures);
    return report;
  } finally {
    if (ws.ephemeral) fs.rmSync(ws.dir, { recursive: true, force: true });
  }
}

// A failed callable leaves the engine staring at a missing file; the cause
// the caller cares about is the exception, so put that text in the cell.
function spliceCallableFailures(
  report: Report,
  metrics: readonly MetricEntry[],
  failures: readonly RepFailure[],
): void {
  for (const f of failures) {
    for (const m of metrics) {
      if (m.representation !== f.repId) continue;
      const reported = m.label ?? m.name;
      const row = report.cells[f.group];
      if (row !== undefined && reported in row) {
        row[reported] = { error: `representation '${f.repId}': ${f.message}` };
      }
    }
  }
}
