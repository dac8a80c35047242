import { describe, expect, it } from "vitest";

import {
  ClimaxView,
  SessionTree,
  StorytellerView,
  TimelineView,
  escapeHtml,
  exportPath,
  pathToPointer,
  refineOp,
  renderClimax,
  renderFragment,
  renderNavigationPath,
  renderParticipation,
  renderTimeline,
} from "../src/index.js";

describe("fragments", () => {
  it("splits text around the highlight and escapes markup", () => {
    const html = renderFragment({
      text: 'geboren te <Rotterdam> op',
      highlightBegin: 11,
      highlightEnd: 22,
      docBegin: 30,
      docEnd: 41,
    });
    expect(html).toContain("<mark>&lt;Rotterdam&gt;</mark>");
    expect(html).toContain('data-begin="30"');
    expect(html.indexOf("geboren te ")).toBeLessThan(html.indexOf("<mark>"));
  });

  it("escapeHtml covers the dangerous characters", () => {
    expect(escapeHtml('<a href="x">&</a>')).toBe(
      "&lt;a href=&quot;x&quot;&gt;&amp;&lt;/a&gt;",
    );
  });
});

describe("timeline", () => {
  it("keeps payload order and flags undated entries", () => {
    const view: TimelineView = {
      personId: "p",
      entries: [
        { event: "e1", type: "Birth", date: "1466-10-28", place: "Rotterdam", sourceEntry: "er-1", offsets: [] },
        { event: "e2", type: "event", date: null, place: null, sourceEntry: null, offsets: [] },
      ],
    };
    const html = renderTimeline(view);
    expect(html.indexOf("1466-10-28")).toBeLessThan(html.indexOf("undated"));
    expect(html).toContain('class="event undated"');
  });
});

describe("participation and climax", () => {
  const story: StorytellerView = {
    actors: [
      { iri: "i/a", label: "A", eventCount: 3, colorIndex: 0 },
      { iri: "i/b", label: "B", eventCount: 1, colorIndex: 1 },
    ],
    events: [{ type: "Birth", year: 1500, participants: ["i/a", "i/b"] }],
    groups: [],
    undated: ["i/ev9"],
  };

  it("sizes actor bars by event count and shares nodes", () => {
    const html = renderParticipation(story);
    expect(html).toContain("width:3em");
    expect(html).toContain('data-actors="i/a i/b"');
    expect(html).toContain('class="node undated"');
  });

  it("does not re-sort climax groups client-side", () => {
    const view: ClimaxView = {
      scoring: "participants",
      groups: [
        { type: "Zeta", points: [{ year: 1500, score: 9 }] },
        { type: "Alpha", points: [{ year: 1501, score: 1 }] },
      ],
    };
    const html = renderClimax(view);
    expect(html.indexOf("Zeta")).toBeLessThan(html.indexOf("Alpha"));
    expect(html).toContain("1500: 9");
  });
});

describe("navigation", () => {
  const tree: SessionTree = {
    sessionId: "s1",
    pointer: "step-2",
    steps: [
      { stepId: "step-0", parent: null, op: { request: { q: "x" } }, createdAt: 1 },
      { stepId: "step-1", parent: "step-0", op: { kind: "refine", facets: { source: ["a"] } }, createdAt: 2 },
      { stepId: "step-2", parent: "step-0", op: { kind: "refine", facets: { source: ["b"] } }, createdAt: 3 },
    ],
  };

  it("computes the root-to-pointer path", () => {
    expect(pathToPointer(tree)).toEqual(["step-0", "step-2"]);
  });

  it("renders a single root crumb for a fresh session", () => {
    const fresh: SessionTree = {
      sessionId: "s2",
      pointer: "step-0",
      steps: [tree.steps[0]],
    };
    const html = renderNavigationPath(fresh);
    expect(html.match(/class="crumb[^"]*"/g)).toHaveLength(1);
    expect(html).toContain("pointer");
    expect(html).not.toContain("fork");
  });

  it("exported path re-imports to the same steps", () => {
    const doc = JSON.parse(exportPath(tree));
    expect(doc.steps.map((s: { stepId: string }) => s.stepId)).toEqual([
      "step-0",
      "step-2",
    ]);
  });

  it("refineOp shapes the facet click payload", () => {
    expect(refineOp("source", "vdaa")).toEqual({
      kind: "refine",
      facets: { source: ["vdaa"] },
    });
  });
});
