export * from "./api.js";
export * from "./html.js";
export * from "./search.js";
export * from "./fact.js";
export * from "./charts.js";
export * from "./nav.js";
export * from "./audit.js";
