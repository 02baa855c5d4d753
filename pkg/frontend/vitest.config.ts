import { defineConfig } from "vitest/config";

// Every test drives the real engine binary, so the budget per test is the
// cost of a few process spawns, not microseconds.
export default defineConfig({
  test: {
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
