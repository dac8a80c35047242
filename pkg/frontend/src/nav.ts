/** Breadcrumb tree over a navigation session.
 *
 * The session payload is a step tree with a pointer; rendering shows
 * the path to the pointer as crumbs and any sibling branches as a
 * visible fork. Back/branch actions are plain session API calls, so
 * the whole state survives a page refresh.
 */

import { Json, SessionTree } from "./api.js";
import { el, escapeHtml } from "./html.js";

function opLabel(op: Json): string {
  if (op !== null && typeof op === "object" && !Array.isArray(op)) {
    const record = op as { [key: string]: Json };
    if (typeof record["kind"] === "string") {
      const facets = record["facets"];
      if (facets && typeof facets === "object" && !Array.isArray(facets)) {
        const parts = Object.entries(facets as { [key: string]: Json }).map(
          ([field, values]) => `${field}=${(values as Json[]).join(",")}`,
        );
        return `${record["kind"]} ${parts.join(" ")}`;
      }
      return String(record["kind"]);
    }
    const request = record["request"];
    if (request && typeof request === "object" && !Array.isArray(request)) {
      return `search "${(request as { [key: string]: Json })["q"] ?? ""}"`;
    }
  }
  return "step";
}

export function pathToPointer(tree: SessionTree): string[] {
  const byId = new Map(tree.steps.map((s) => [s.stepId, s]));
  const path: string[] = [];
  let cursor: string | null = tree.pointer;
  while (cursor !== null) {
    path.push(cursor);
    cursor = byId.get(cursor)?.parent ?? null;
  }
  return path.reverse();
}

export function renderNavigationPath(tree: SessionTree): string {
  const onPath = new Set(pathToPointer(tree));
  const children = new Map<string | null, string[]>();
  for (const step of tree.steps) {
    const siblings = children.get(step.parent) ?? [];
    siblings.push(step.stepId);
    children.set(step.parent, siblings);
  }
  const byId = new Map(tree.steps.map((s) => [s.stepId, s]));

  const renderStep = (stepId: string): string => {
    const step = byId.get(stepId)!;
    const kids = children.get(stepId) ?? [];
    const classes = ["crumb"];
    if (onPath.has(stepId)) classes.push("on-path");
    if (stepId === tree.pointer) classes.push("pointer");
    if (kids.length > 1) classes.push("fork");
    return el("li", { class: classes.join(" "), "data-step": stepId }, [
      el("span", { class: "label" }, escapeHtml(opLabel(step.op))),
      kids.length > 0 ? el("ul", { class: "children" }, kids.map(renderStep)) : "",
    ]);
  };

  const roots = children.get(null) ?? [];
  return el(
    "nav",
    { class: "session", "data-session": tree.sessionId, "data-pointer": tree.pointer },
    [el("ul", { class: "tree" }, roots.map(renderStep))],
  );
}

/** Export the root-to-pointer path as a shareable document. */
export function exportPath(tree: SessionTree): string {
  const byId = new Map(tree.steps.map((s) => [s.stepId, s]));
  const steps = pathToPointer(tree).map((id) => byId.get(id)!);
  return JSON.stringify({ sessionId: tree.sessionId, steps }, null, 1) + "\n";
}
