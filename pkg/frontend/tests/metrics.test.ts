import { describe, expect, test } from "vitest";

import {
  authenticity,
  conformity,
  diversity,
  fas,
  fbd,
  hitRate,
  hypervolume,
  identity,
  kl,
  klCategorical,
  kmerEmbed,
  levenshtein,
  mmd,
  ngram,
  novelty,
  precision,
  recall,
  spearman,
  thresholdRate,
  uniqueness,
  vendi,
  vendiFkea,
} from "../src/metrics.js";
import { evaluate, valueOf } from "../src/evaluate.js";
import { at } from "../src/views.js";

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

// classic full-table edit distance, the independent check for the shim
function editDistance(a: string, b: string): number {
  const m = a.length;
  const n = b.length;
  const row: number[] = Array.from({ length: n + 1 }, (_, j) => j);
  for (let i = 1; i <= m; i++) {
    let prev = row[0]!;
    row[0] = i;
    for (let j = 1; j <= n; j++) {
      const cur = row[j]!;
      row[j] = Math.min(cur + 1, row[j - 1]! + 1, prev + (a[i - 1] === b[j - 1] ? 0 : 1));
      prev = cur;
    }
  }
  return row[n]!;
}

describe("sequence shims", () => {
  test("novelty fractions", () => {
    expect(novelty(["A", "B"], ["B"])).toBe(0.5);
    expect(novelty(["A", "B"], ["A", "B", "C"])).toBe(0);
    expect(novelty(["A", "B"], ["C"])).toBe(1);
  });

  test("uniqueness fractions", () => {
    expect(uniqueness(["A", "A", "B"])).toBeCloseTo(2 / 3, 12);
    expect(uniqueness(["A", "A", "A", "A", "A"])).toBeCloseTo(1 / 5, 12);
  });

  test("diversity endpoints and an enumerated average", () => {
    expect(diversity(["AB", "AB", "AB", "AB"])).toBe(0);
    expect(diversity(["AB", "CD"])).toBe(1);

    const seqs = ["AAB", "ABB", "BBA", "AB"];
    let total = 0;
    let pairs = 0;
    for (let i = 0; i < seqs.length; i++) {
      for (let j = 0; j < seqs.length; j++) {
        if (i === j) continue;
        total += editDistance(seqs[i]!, seqs[j]!) / Math.max(seqs[i]!.length, seqs[j]!.length);
        pairs += 1;
      }
    }
    expect(diversity(seqs)).toBeCloseTo(total / pairs, 12);
  });

  test("levenshtein recovers exact counts", () => {
    expect(levenshtein("kitten", "sitting")).toBe(3);
    expect(levenshtein("GFGD", "GFGD")).toBe(0);
    const rand = mulberry32(17);
    const word = () => {
      const len = 1 + Math.floor(rand() * 9);
      let s = "";
      for (let i = 0; i < len; i++) s += "abc"[Math.floor(rand() * 3)];
      return s;
    };
    for (let trial = 0; trial < 8; trial++) {
      const a = word();
      const b = word();
      expect(levenshtein(a, b), `${a} vs ${b}`).toBe(editDistance(a, b));
    }
  });

  test("ngram overlap", () => {
    // {AB,BC,CD} vs {AB,BX}: one shared bigram of four distinct
    expect(ngram(["ABCD"], ["ABX"], 2)).toBe(0.25);
    expect(ngram(["ABCD"], ["ABCD"], 2)).toBe(1);
  });
});

describe("embedding shims", () => {
  test("distribution distances on hand cases", () => {
    expect(fbd([[-1], [1]], [[0], [2]])).toBeCloseTo(1.0, 12);
    expect(fbd([[-1], [1]], [[-1], [1]])).toBeCloseTo(0, 12);
  });

  test("mmd matches a four-loop evaluation of the unbiased estimator", () => {
    const rand = mulberry32(23);
    const x = Array.from({ length: 7 }, () => [rand() * 2 - 1, rand() * 2 - 1]);
    const y = Array.from({ length: 6 }, () => [rand() * 2 - 1 + 0.3, rand() * 2 - 1]);
    const sigma = 1.5;
    const k = (p: number[], q: number[]) => {
      const d0 = p[0]! - q[0]!;
      const d1 = p[1]! - q[1]!;
      return Math.exp(-(d0 * d0 + d1 * d1) / (2 * sigma * sigma));
    };
    let xx = 0;
    for (let i = 0; i < x.length; i++)
      for (let j = 0; j < x.length; j++) if (i !== j) xx += k(x[i]!, x[j]!);
    xx /= x.length * (x.length - 1);
    let yy = 0;
    for (let i = 0; i < y.length; i++)
      for (let j = 0; j < y.length; j++) if (i !== j) yy += k(y[i]!, y[j]!);
    yy /= y.length * (y.length - 1);
    let xy = 0;
    for (const p of x) for (const q of y) xy += k(p, q);
    xy /= x.length * y.length;

    expect(Math.abs(mmd(x, y, { sigma }) - (xx + yy - 2 * xy))).toBeLessThanOrEqual(1e-10);
  });

  test("precision and recall are dual and saturate on identical sets", () => {
    const rand = mulberry32(29);
    const x = Array.from({ length: 8 }, () => [rand(), rand()]);
    const y = Array.from({ length: 6 }, () => [rand(), rand()]);
    expect(precision(x, x, 2)).toBe(1);
    expect(recall(x, x, 2)).toBe(1);
    expect(recall(x, y, 2)).toBe(precision(y, x, 2));
  });

  test("authenticity flags near-copies", () => {
    expect(authenticity([[0.5]], [[0.0], [0.1], [1.0]])).toBe(1);
    expect(authenticity([[0.4]], [[0.0], [1.0]])).toBe(0);
  });

  test("vendi counts effective modes", () => {
    const identical = [
      [1, 2],
      [1, 2],
      [1, 2],
      [1, 2],
    ];
    expect(vendi(identical, { sigma: 1.0 })).toBeCloseTo(1.0, 9);
    const spread = [
      [0, 0],
      [100, 0],
      [0, 100],
      [100, 100],
    ];
    expect(Math.abs(vendi(spread, { sigma: 1.0 }) - 4)).toBeLessThanOrEqual(1e-6);
    expect(vendiFkea(identical, { numFeatures: 32, sigma: 1.0, seed: 0 })).toBeCloseTo(1.0, 9);
  });
});

describe("property shims", () => {
  test("identity reports mean and population deviation", () => {
    const got = identity([1, 2, 3]);
    expect(got.value).toBe(2);
    expect(got.deviation).toBeCloseTo(Math.sqrt(2 / 3), 12);
  });

  test("threshold sides are strict", () => {
    expect(thresholdRate([1, 2, 3], 2, "above")).toBeCloseTo(1 / 3, 12);
    expect(thresholdRate([1, 2, 3], 2, "below")).toBeCloseTo(1 / 3, 12);
  });

  test("hit rate averages a binary property", () => {
    expect(hitRate([1, 0, 1, 1])).toBe(0.75);
  });

  test("hypervolume hand cases", () => {
    expect(hypervolume([
      [2, 1],
      [1, 2],
    ])).toBeCloseTo(3.0, 12);
    expect(hypervolume([[2, 3]])).toBeCloseTo(6.0, 12);
    expect(hypervolume([[3, 3]], { referencePoint: [1, 1] })).toBeCloseTo(4.0, 12);
    expect(hypervolume([
      [2, 1],
      [1, 2],
      [1.5, 0.5],
    ])).toBeCloseTo(3.0, 12);
    expect(
      hypervolume(
        [
          [0, 0],
          [1, 0],
          [0, 1],
        ],
        { mode: "convex-hull" },
      ),
    ).toBeCloseTo(0.5, 12);
  });

  test("self-conformity of distinct values lands on the closed form", () => {
    const values = [1, 2, 4, 8, 16, 32, 3, 5, 9, 17];
    expect(conformity(values, values)).toBeCloseTo((values.length + 1) / (2 * values.length), 12);
  });

  test("kl stays near zero for a shared sample and is seed-stable", () => {
    const rand = mulberry32(37);
    const values = Array.from({ length: 300 }, () => rand() * 3 - 1.5);
    const opts = { mcSamples: 2000, seed: 0 };
    const v = kl(values, values, opts);
    expect(Math.abs(v)).toBeLessThan(0.05);
    expect(kl(values, values, opts)).toBe(v);
  });

  test("categorical kl is zero for matching frequencies", () => {
    expect(klCategorical(["a", "a", "b", "b"], ["a", "b", "a", "b"])).toBe(0);
  });
});

describe("loaders and diagnostics", () => {
  test("kmer embedding windows and the round trip into evaluate", () => {
    const emb = kmerEmbed(["AAC"], { k: 1, alphabet: "AC" });
    expect(emb.rows).toBe(1);
    expect(emb.cols).toBe(2);
    expect(at(emb, 0, 0)).toBeCloseTo(2 / 3, 6);
    expect(at(emb, 0, 1)).toBeCloseTo(1 / 3, 6);

    const batch = ["AAC", "ACC", "CCC"];
    const matrix = kmerEmbed(batch, { k: 1, alphabet: "AC" });
    const report = evaluate(
      { designs: batch },
      [{ name: "vendi", representation: "emb", parameters: { kernel: { sigma: 0.5 } } }],
      { emb: matrix },
    );
    expect(valueOf(report, "designs", "vendi")).toBeGreaterThanOrEqual(1);
  });

  test("neighborhood label agreement is perfect on separated clusters", () => {
    const points: number[][] = [];
    const labels: string[] = [];
    const rand = mulberry32(43);
    for (let i = 0; i < 8; i++) {
      const cluster = i < 4 ? 0 : 1;
      points.push([cluster * 50 + rand(), cluster * 50 + rand()]);
      labels.push(cluster === 0 ? "left" : "right");
    }
    expect(fas(points, labels, 3)).toBe(1);
  });

  test("rank alignment is perfect under an affine property", () => {
    const points = Array.from({ length: 12 }, (_, i) => [i * 0.75]);
    const values = points.map((p) => 2 * p[0]! + 1);
    expect(spearman(points, values)).toBe(1);
  });

  test("engine refusals surface as exceptions", () => {
    expect(() => authenticity([[0]], [[0]])).toThrow(/reference/);
  });
});
