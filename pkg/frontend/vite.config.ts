import { defineConfig } from "vitest/config";

// The dev server proxies API paths to a locally running decision service,
// e.g. `bird --config fixtures/demo/config.json serve`.
const API_TARGET = "http://127.0.0.1:8000";

export default defineConfig({
  server: {
    proxy: {
      "/health": API_TARGET,
      "/scenarios": API_TARGET,
      "/sessions": API_TARGET,
    },
  },
  test: {
    environment: "jsdom",
  },
});
