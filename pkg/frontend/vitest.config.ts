import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // integration tests spawn the Python server and play whole sessions
    testTimeout: 30000,
    hookTimeout: 30000,
  },
});
