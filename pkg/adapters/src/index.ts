export * from "./schema.js";
export * from "./config.js";
export * from "./backends.js";
export * from "./codec.js";
export * from "./png.js";
export * from "./queue.js";
export * from "./server.js";
