/** Scripted walkthrough over recorded service traffic:
 * search -> refine -> fact fold-out -> branch -> replay.
 *
 * The audit invariant: the UI computes nothing, so every number in the
 * rendered markup must appear verbatim in some recorded API payload.
 */

import { describe, expect, it } from "vitest";

import {
  ApiClient,
  Exchange,
  FactView,
  SearchResult,
  SessionReplay,
  auditRendering,
  renderFacets,
  renderFactFoldout,
  renderNavigationPath,
  renderParticipation,
  renderSearchResults,
  renderTimeline,
} from "../src/index.js";
import { replayTransport } from "./replay.js";
import fixture from "./fixtures/traffic.json";

const recorded = fixture.traffic as unknown as Exchange[];
const texts = fixture.texts as Record<string, string>;

async function walkthrough() {
  const client = new ApiClient(replayTransport(recorded));
  const search = await client.search({ q: "Erasmus" });
  const refined = await client.search({ q: "Erasmus", facets: { source: ["vdaa"] } });
  const timeline = await client.timeline("erasmus");
  const fact = await client.fact("erasmus", "birth-date");
  const participation = await client.participation();
  const created = await client.sessionCreate({ request: { q: "Erasmus" } });
  await client.sessionStep(created.sessionId, {
    kind: "refine",
    facets: { source: ["vdaa"] },
  });
  await client.sessionBranch(created.sessionId, "step-0", {
    kind: "refine",
    facets: { source: ["dbnl"] },
  });
  const replay1 = await client.session(created.sessionId);
  const replay2 = await client.session(created.sessionId);
  return { client, search, refined, timeline, fact, participation, replay1, replay2 };
}

describe("UI audit", () => {
  it("renders no number that is absent from the recorded payloads", async () => {
    const w = await walkthrough();
    const rendered = [
      renderSearchResults(w.search),
      renderFacets(w.search),
      renderSearchResults(w.refined),
      renderFacets(w.refined),
      renderTimeline(w.timeline),
      renderFactFoldout(w.fact, w.fact.alternatives[0].value),
      renderParticipation(w.participation),
      renderNavigationPath(w.replay1.session),
    ].join("\n");
    expect(auditRendering(rendered, w.client.traffic)).toEqual([]);
  });

  it("shows facet counts that sum to the result total", async () => {
    const w = await walkthrough();
    for (const result of [w.search, w.refined]) {
      for (const counts of Object.values(result.facets)) {
        const sum = Object.values(counts).reduce((a, b) => a + b, 0);
        expect(sum).toBe(result.total);
      }
    }
    const html = renderFacets(w.refined);
    expect(html).toContain('data-field="source" data-value="vdaa"');
    expect(html).toContain("selected");
  });

  it("highlights fact fragments at exactly the mention offsets", async () => {
    const w = await walkthrough();
    const html = renderFactFoldout(w.fact, w.fact.alternatives[0].value);
    let marked = 0;
    for (const alt of w.fact.alternatives) {
      for (const src of alt.sources) {
        for (const frag of src.fragments) {
          const slice = frag.text.slice(frag.highlightBegin, frag.highlightEnd);
          // payload-internal consistency against the source document
          expect(texts[src.entryId!].slice(frag.docBegin, frag.docEnd)).toBe(slice);
          if (alt.value === w.fact.alternatives[0].value) {
            expect(html).toContain(`<mark>${slice}</mark>`);
            marked += 1;
          }
        }
      }
    }
    expect(marked).toBeGreaterThan(0);
  });

  it("marks metadata-only sources instead of faking a fragment", async () => {
    const w = await walkthrough();
    const html = renderFactFoldout(w.fact, w.fact.alternatives[0].value);
    const metadataOnly = w.fact.alternatives[0].sources.filter((s) => !s.grounded);
    expect(metadataOnly.length).toBeGreaterThan(0);
    expect(html).toContain("from metadata");
  });

  it("renders the branch as a visible fork under the shared root", async () => {
    const w = await walkthrough();
    const html = renderNavigationPath(w.replay1.session);
    expect(html).toContain('fork" data-step="step-0"');
    expect(html).toContain('data-step="step-1"');
    expect(html).toContain('data-step="step-2"');
    expect(html).toContain('data-pointer="step-2"');
    // the pointer replays the dbnl branch, not the vdaa sibling
    expect(w.replay1.result.query.facets).toEqual({ source: ["dbnl"] });
  });

  it("re-replaying the session renders identical results", async () => {
    const w = await walkthrough();
    const first = renderSearchResults(w.replay1.result) + renderFacets(w.replay1.result);
    const second = renderSearchResults(w.replay2.result) + renderFacets(w.replay2.result);
    expect(second).toBe(first);
    expect(w.replay2).toEqual(w.replay1);
  });

  it("refuses requests the service never answered", async () => {
    const client = new ApiClient(replayTransport(recorded));
    await expect(client.search({ q: "nonsense" })).rejects.toThrow(/no recorded/);
  });
});

describe("recorded traffic sanity", () => {
  it("contains the full walkthrough", () => {
    const urls = recorded.map((e) => `${e.method} ${e.url}`);
    expect(urls).toContain("POST /api/v1/search");
    expect(urls).toContain("GET /api/v1/person/erasmus/fact/birth-date");
    expect(urls).toContain("POST /api/v1/session/s1/branch");
    expect(urls.filter((u) => u === "GET /api/v1/session/s1")).toHaveLength(2);
  });

  it("keeps the three conflicting birth dates distinct", () => {
    const fact = recorded.find((e) => e.url.endsWith("/fact/birth-date"))!
      .response as unknown as FactView;
    expect(fact.alternatives.map((a) => a.value)).toEqual([
      "1466-10-28",
      "1467-10-28",
      "1469-10-28",
    ]);
  });

  it("refinement narrows the recorded result", () => {
    const [broad, narrow] = recorded
      .filter((e) => e.url === "/api/v1/search")
      .map((e) => e.response as unknown as SearchResult);
    expect(narrow.total).toBeLessThan(broad.total);
    const replay = recorded.find((e) => e.method === "GET" && e.url === "/api/v1/session/s1")!
      .response as unknown as SessionReplay;
    expect(replay.session.steps).toHaveLength(3);
  });
});
