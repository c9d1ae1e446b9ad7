/// <reference types="vitest" />
import { defineConfig } from "vite";

export default defineConfig({
  server: {
    // the UI consumes only the summarization service's HTTP interface
    proxy: { "/api": "http://127.0.0.1:8000" },
  },
  test: {
    environment: "jsdom",
  },
});
