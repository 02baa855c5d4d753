import { spawnSync } from "node:child_process";

export interface RunResult {
  status: number;
  stdout: string;
  stderr: string;
}

// Resolved once per process: SEQEVAL_BIN wins, then the console script,
// then the module entry point as a fallback for environments without one.
let resolved: string[] | null = null;

function candidates(): string[][] {
  const out: string[][] = [];
  const env = process.env.SEQEVAL_BIN;
  if (env) out.push(env.split(" ").filter((p) => p.length > 0));
  out.push(["seqeval"]);
  out.push(["python3", "-m", "seqeval.cli"]);
  return out;
}

function tryRun(argv: string[], args: string[], cwd: string | undefined) {
  const [cmd, ...pre] = argv;
  return spawnSync(cmd!, [...pre, ...args], {
    cwd,
    encoding: "utf8",
    maxBuffer: 256 * 1024 * 1024,
  });
}

/**
 * Run one engine subcommand and capture its streams.
 *
 * Spawn failures (missing executable) fall through to the next candidate
 * command; anything the engine itself reports comes back in the result.
 */
export function runCli(args: string[], cwd?: string): RunResult {
  if (resolved !== null) {
    const r = tryRun(resolved, args, cwd);
    if (r.error) throw new Error(`failed to run ${resolved.join(" ")}: ${r.error.message}`);
    return { status: r.status ?? -1, stdout: r.stdout, stderr: r.stderr };
  }
  let lastError: Error | undefined;
  for (const argv of candidates()) {
    const r = tryRun(argv, args, cwd);
    if (r.error) {
      lastError = r.error;
      continue;
    }
    resolved = argv;
    return { status: r.status ?? -1, stdout: r.stdout, stderr: r.stderr };
  }
  throw new Error(`no working engine command found: ${lastError?.message ?? "nothing to try"}`);
}

/**
 * Pull the engine's own message out of a failed run's stderr.
 *
 * The CLI prefixes its diagnostics with "error: "; the text after the
 * prefix is passed through verbatim.
 */
export function coreError(stderr: string): string {
  for (const line of stderr.split("\n")) {
    if (line.startsWith("error: ")) return line.slice("error: ".length);
  }
  const trimmed = stderr.trim();
  return trimmed.length > 0 ? trimmed : "engine failed without a message";
}
