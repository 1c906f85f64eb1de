import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    setupFiles: ["tests/setup.ts"],
    include: ["tests/**/*.test.ts"],
    testTimeout: 120_000,
    hookTimeout: 120_000,
    // The e2e suite spawns one HTTP server; keep files sequential so unit
    // suites are not starved while it boots.
    fileParallelism: false,
  },
});
