import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { evaluate, MetricEntry, Representation, valueOf } from "./evaluate.js";
import { PropertyColumn, readMatrix, writeMatrixCsv, writeProperties, writeSequences } from "./formats.js";
import { coreError, runCli } from "./runner.js";
import { ArrayView, fromRows, isArrayView } from "./views.js";

/** A matrix argument: a borrowed view or plain nested arrays (copied to f64). */
export type MatrixLike = ArrayView | readonly (readonly number[])[];

export function asView(x: MatrixLike): ArrayView {
  return isArrayView(x) ? x : fromRows(x);
}

function placeholders(n: number): string[] {
  const out: string[] = new Array(n);
  for (let i = 0; i < n; i++) out[i] = `s${i + 1}`;
  return out;
}

function singleCell(
  groups: Record<string, readonly string[]>,
  metric: MetricEntry,
  representations: Record<string, Representation>,
  reference?: string,
  seed?: number,
): number {
  const report = evaluate(groups, [metric], representations, { reference, seed });
  return valueOf(report, Object.keys(groups)[0]!, metric.label ?? metric.name);
}

// one generated group against a reference group, both given as matrices
function pairCell(name: string, x: MatrixLike, y: MatrixLike, parameters?: Record<string, unknown>): number {
  const vx = asView(x);
  const vy = asView(y);
  const entry: MetricEntry = { name, representation: "emb" };
  if (parameters !== undefined) entry.parameters = parameters;
  return singleCell(
    { designs: placeholders(vx.rows), reference: placeholders(vy.rows) },
    entry,
    { emb: { designs: vx, reference: vy } },
    "reference",
  );
}

function propertyCell(
  name: string,
  columns: readonly PropertyColumn[],
  refColumns: readonly PropertyColumn[] | undefined,
  parameters: Record<string, unknown>,
  seed?: number,
): number {
  const n = columns[0]!.values.length;
  const entry: MetricEntry = { name, representation: "props", parameters };
  if (refColumns === undefined) {
    return singleCell({ designs: placeholders(n) }, entry, { props: columns }, undefined, seed);
  }
  const m = refColumns[0]!.values.length;
  return singleCell(
    { designs: placeholders(n), reference: placeholders(m) },
    entry,
    { props: { designs: columns, reference: refColumns } },
    "reference",
    seed,
  );
}

function valueColumns(x: readonly number[] | MatrixLike): { columns: PropertyColumn[]; names: string[] } {
  if (Array.isArray(x) && x.length > 0 && typeof x[0] === "number") {
    return { columns: [{ name: "v", kind: "real", values: x as readonly number[] }], names: ["v"] };
  }
  const v = asView(x as MatrixLike);
  const columns: PropertyColumn[] = [];
  const names: string[] = [];
  for (let j = 0; j < v.cols; j++) {
    const vals: number[] = new Array(v.rows);
    for (let i = 0; i < v.rows; i++) vals[i] = v.data[i * v.rowStride + j]!;
    columns.push({ name: `p${j}`, kind: "real", values: vals });
    names.push(`p${j}`);
  }
  return { columns, names };
}

// ---------------------------------------------------------------------------
// sequence metrics

/** Fraction of designs absent from the reference set. */
export function novelty(designs: readonly string[], reference: readonly string[]): number {
  return singleCell(
    { designs, reference },
    { name: "novelty" },
    {},
    "reference",
  );
}

/** Fraction of distinct strings among the designs. */
export function uniqueness(designs: readonly string[]): number {
  return singleCell({ designs }, { name: "uniqueness" }, {});
}

export interface DiversityOptions {
  /** "exact" averages all pairs; a number samples that many partners per point. */
  k?: number | "exact";
  seed?: number;
}

/** Mean normalized edit distance between design pairs. */
export function diversity(designs: readonly string[], options: DiversityOptions = {}): number {
  const parameters: Record<string, unknown> = {};
  if (options.k !== undefined) parameters.k = options.k;
  if (options.seed !== undefined) parameters.seed = options.seed;
  return singleCell({ designs }, { name: "diversity", parameters }, {}, undefined, options.seed);
}

/** N-gram profile overlap between designs and reference. */
export function ngram(designs: readonly string[], reference: readonly string[], N?: number): number {
  const entry: MetricEntry = { name: "ngram" };
  if (N !== undefined) entry.parameters = { N };
  return singleCell({ designs, reference }, entry, {}, "reference");
}

/**
 * Edit distance between two sequences.
 *
 * Recovered from the two-element diversity, which reports the distance
 * normalized by the longer length; the product is rounded back to the
 * integer count. Sequences must be nonempty.
 */
export function levenshtein(a: string, b: string): number {
  if (a === b) return 0;
  const d = diversity([a, b]);
  return Math.round(d * Math.max(a.length, b.length));
}

// ---------------------------------------------------------------------------
// embedding metrics

/** Distance between Gaussian summaries of two embedded sets. */
export function fbd(x: MatrixLike, y: MatrixLike): number {
  return pairCell("fbd", x, y);
}

export interface MmdOptions {
  sigma?: number | "median-heuristic";
}

/** Unbiased kernel discrepancy between two embedded sets. */
export function mmd(x: MatrixLike, y: MatrixLike, options: MmdOptions = {}): number {
  const parameters = options.sigma === undefined ? undefined : { kernel: { sigma: options.sigma } };
  return pairCell("mmd", x, y, parameters);
}

/** Fraction of designs inside the reference's estimated support. */
export function precision(x: MatrixLike, y: MatrixLike, k?: number): number {
  return pairCell("precision", x, y, k === undefined ? undefined : { k });
}

/** Fraction of reference points inside the designs' estimated support. */
export function recall(x: MatrixLike, y: MatrixLike, k?: number): number {
  return pairCell("recall", x, y, k === undefined ? undefined : { k });
}

/** Fraction of designs that are not near-copies of reference points. */
export function authenticity(x: MatrixLike, y: MatrixLike): number {
  return pairCell("authenticity", x, y);
}

export interface VendiOptions {
  sigma?: number | "median-heuristic";
  alpha?: number;
}

/** Effective number of modes from the kernel spectrum. */
export function vendi(x: MatrixLike, options: VendiOptions = {}): number {
  const parameters: Record<string, unknown> = {};
  if (options.sigma !== undefined) parameters.kernel = { sigma: options.sigma };
  if (options.alpha !== undefined) parameters.alpha = options.alpha;
  const v = asView(x);
  return singleCell(
    { designs: placeholders(v.rows) },
    { name: "vendi", representation: "emb", parameters },
    { emb: v },
  );
}

export interface VendiFkeaOptions {
  numFeatures?: number;
  sigma?: number;
  renyiAlpha?: number;
  seed?: number;
}

/** Random-feature approximation of the vendi spectrum for large sets. */
export function vendiFkea(x: MatrixLike, options: VendiFkeaOptions = {}): number {
  const parameters: Record<string, unknown> = {};
  if (options.numFeatures !== undefined) parameters.num_features = options.numFeatures;
  if (options.sigma !== undefined) parameters.sigma = options.sigma;
  if (options.renyiAlpha !== undefined) parameters.renyi_alpha = options.renyiAlpha;
  if (options.seed !== undefined) parameters.seed = options.seed;
  const v = asView(x);
  return singleCell(
    { designs: placeholders(v.rows) },
    { name: "vendi-fkea", representation: "emb", parameters },
    { emb: v },
    undefined,
    options.seed,
  );
}

// ---------------------------------------------------------------------------
// property metrics

/** Mean and population deviation of a property. */
export function identity(values: readonly number[]): { value: number; deviation: number } {
  const report = evaluate(
    { designs: placeholders(values.length) },
    [{ name: "identity", representation: "props", parameters: { column: "v" } }],
    { props: [{ name: "v", kind: "real", values }] },
  );
  const c = report.cells["designs"]!["identity"]!;
  if ("error" in c) throw new Error(c.error);
  return { value: c.value, deviation: c.deviation ?? 0 };
}

/** Fraction of values strictly past the cutoff. */
export function thresholdRate(
  values: readonly number[],
  tau: number,
  side?: "above" | "below",
): number {
  const parameters: Record<string, unknown> = { column: "v", tau };
  if (side !== undefined) parameters.side = side;
  return propertyCell("threshold", [{ name: "v", kind: "real", values }], undefined, parameters);
}

/** Mean of a 0/1 property. */
export function hitRate(values: readonly number[]): number {
  return propertyCell("hit-rate", [{ name: "v", kind: "binary", values }], undefined, { column: "v" });
}

export interface HypervolumeOptions {
  referencePoint?: readonly number[];
  mode?: "pareto-indicator" | "convex-hull";
}

/** Objective-space volume covered by a set of property vectors. */
export function hypervolume(points: MatrixLike, options: HypervolumeOptions = {}): number {
  const { columns, names } = valueColumns(points);
  const parameters: Record<string, unknown> = { columns: names };
  if (options.referencePoint !== undefined) parameters.reference_point = options.referencePoint;
  if (options.mode !== undefined) parameters.mode = options.mode;
  return propertyCell("hypervolume", columns, undefined, parameters);
}

export interface ConformityOptions {
  folds?: number;
  seed?: number;
  trainFraction?: number;
}

/** Typicality of design property values under a model fitted to the reference. */
export function conformity(
  designValues: readonly number[] | MatrixLike,
  referenceValues: readonly number[] | MatrixLike,
  options: ConformityOptions = {},
): number {
  const g = valueColumns(designValues);
  const r = valueColumns(referenceValues);
  const parameters: Record<string, unknown> = { columns: g.names };
  if (options.folds !== undefined) parameters.folds = options.folds;
  if (options.seed !== undefined) parameters.seed = options.seed;
  if (options.trainFraction !== undefined) parameters.train_fraction = options.trainFraction;
  return propertyCell("conformity", g.columns, r.columns, parameters, options.seed);
}

export interface KlOptions {
  bandwidth?: number | "scott";
  mcSamples?: number;
  seed?: number;
}

/** Divergence of the designs' property density from the reference's. */
export function kl(
  designValues: readonly number[] | MatrixLike,
  referenceValues: readonly number[] | MatrixLike,
  options: KlOptions = {},
): number {
  const g = valueColumns(designValues);
  const r = valueColumns(referenceValues);
  const parameters: Record<string, unknown> = { columns: g.names };
  if (options.bandwidth !== undefined) parameters.bandwidth = options.bandwidth;
  if (options.mcSamples !== undefined) parameters.mc_samples = options.mcSamples;
  if (options.seed !== undefined) parameters.seed = options.seed;
  return propertyCell("kl", g.columns, r.columns, parameters, options.seed);
}

/** Divergence between two categorical label distributions. */
export function klCategorical(designLabels: readonly string[], referenceLabels: readonly string[]): number {
  const g: PropertyColumn[] = [{ name: "v", kind: "categorical", values: designLabels }];
  const r: PropertyColumn[] = [{ name: "v", kind: "categorical", values: referenceLabels }];
  return propertyCell("kl", g, r, { column: "v" });
}

// ---------------------------------------------------------------------------
// loaders and diagnostics over the other subcommands

function withTempDir<T>(fn: (dir: string) => T): T {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "seqeval-"));
  try {
    return fn(dir);
  } finally {
    fs.rmSync(dir, { recursive: true, force: true });
  }
}

export interface KmerEmbedOptions {
  k: number;
  alphabet?: string;
  vocabulary?: readonly string[];
  counts?: boolean;
}

/**
 * K-mer window profiles for a batch of sequences, computed by the engine.
 * Pass exactly one of alphabet or vocabulary. The result is an f32 view
 * and round-trips into evaluate as a file representation.
 */
export function kmerEmbed(sequences: readonly string[], options: KmerEmbedOptions): ArrayView {
  return withTempDir((dir) => {
    writeSequences(path.join(dir, "seqs.txt"), sequences);
    const args = ["embed", "--sequences", "seqs.txt", "--kmer", String(options.k), "--out", "emb.bin"];
    if (options.alphabet !== undefined) args.push("--alphabet", options.alphabet);
    if (options.vocabulary !== undefined) {
      fs.writeFileSync(path.join(dir, "vocab.txt"), options.vocabulary.join("\n") + "\n");
      args.push("--vocab", "vocab.txt");
    }
    if (options.counts) args.push("--counts");
    const run = runCli(args, dir);
    if (run.status !== 0) throw new Error(coreError(run.stderr));
    return readMatrix(path.join(dir, "emb.bin"));
  });
}

function diagnose(points: MatrixLike, column: PropertyColumn, args: string[], marker: string): number {
  return withTempDir((dir) => {
    writeMatrixCsv(path.join(dir, "emb.csv"), asView(points));
    writeProperties(path.join(dir, "props.csv"), [column]);
    const run = runCli(
      ["diagnose", "--embeddings", "emb.csv", "--properties", "props.csv", ...args],
      dir,
    );
    if (run.status !== 0) throw new Error(coreError(run.stderr));
    for (const line of run.stdout.split("\n")) {
      if (line.startsWith(marker)) return Number(line.slice(marker.length).trim());
    }
    throw new Error(`diagnose printed no '${marker}' line`);
  });
}

/**
 * Label agreement between embedding neighborhoods and a categorical
 * property, as printed by the engine (four decimal places).
 */
export function fas(points: MatrixLike, labels: readonly (string | number)[], k?: number): number {
  const column: PropertyColumn = { name: "label", kind: "categorical", values: labels.map(String) };
  const args = ["--labels", "label"];
  if (k !== undefined) args.push("--k", String(k));
  return diagnose(points, column, args, "FAS:");
}

/**
 * Rank alignment between embedding distances and a numeric property, as
 * printed by the engine (four decimal places).
 */
export function spearman(points: MatrixLike, values: readonly number[]): number {
  const column: PropertyColumn = { name: "v", kind: "real", values };
  return diagnose(points, column, ["--spearman", "v"], "Spearman:");
}
