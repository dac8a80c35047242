/** Search results and facet sidebar.
 *
 * Pure payload-to-markup: every number shown (totals, facet counts,
 * page indices) is copied verbatim from the API response.
 */

import { SearchResult } from "./api.js";
import { el, escapeHtml } from "./html.js";

export function renderSearchResults(result: SearchResult): string {
  const persons = result.persons.map((p) =>
    el("li", { class: "person", "data-person": p.personId }, [
      el("span", { class: "names" }, escapeHtml(p.names.join(" / "))),
      el("span", { class: "weight" }, String(p.matchWeight)),
    ]),
  );
  const entries = result.entries.map((e) =>
    el("li", { class: "entry", "data-entry": e.entryId }, [
      el("span", { class: "field" }, escapeHtml(e.matchField)),
      el("span", { class: "person-ref" }, escapeHtml(e.personId ?? "")),
    ]),
  );
  return el("section", { class: "search-results" }, [
    el("p", { class: "total" }, `${result.total} results (page ${result.page})`),
    el("ol", { class: "persons" }, persons),
    el("ul", { class: "entries" }, entries),
  ]);
}

export function renderFacets(result: SearchResult): string {
  const active = result.query.facets;
  const blocks = Object.entries(result.facets).map(([field, counts]) => {
    const rows = Object.entries(counts)
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
      .map(([value, count]) => {
        const selected = (active[field] ?? []).includes(value);
        return el(
          "li",
          {
            class: selected ? "facet selected" : "facet",
            "data-field": field,
            "data-value": value,
          },
          `${escapeHtml(value)} (${count})`,
        );
      });
    return el("div", { class: "facet-block", "data-field": field }, [
      el("h3", {}, escapeHtml(field)),
      el("ul", {}, rows),
    ]);
  });
  return el("aside", { class: "facets" }, blocks);
}

/** The request to send when the user clicks a facet value. */
export function refineOp(field: string, value: string): { kind: string; facets: Record<string, string[]> } {
  return { kind: "refine", facets: { [field]: [value] } };
}
