import { defineConfig } from "vite";

// Bundle the client to a single ESM file that index.html loads directly,
// so the page can be served by any static file server with no rewriting.
export default defineConfig({
  build: {
    lib: {
      entry: "src/main.ts",
      formats: ["es"],
      fileName: () => "main.js",
    },
    outDir: "dist",
    emptyOutDir: true,
    minify: false,
  },
});
