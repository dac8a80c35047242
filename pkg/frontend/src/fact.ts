/** Fact fold-out: one row per alternative value, grouped by agreement
 * with the selected value, expandable to the supporting sources.
 *
 * Grounded sources show their text fragment with the mention wrapped in
 * <mark> at exactly the offsets the payload supplies; metadata-only
 * sources get an origin badge instead.
 */

import { FactView, Fragment } from "./api.js";
import { el, escapeHtml } from "./html.js";

export function renderFragment(fragment: Fragment): string {
  const before = fragment.text.slice(0, fragment.highlightBegin);
  const hit = fragment.text.slice(fragment.highlightBegin, fragment.highlightEnd);
  const after = fragment.text.slice(fragment.highlightEnd);
  return el(
    "blockquote",
    { class: "fragment", "data-begin": fragment.docBegin, "data-end": fragment.docEnd },
    [escapeHtml(before), el("mark", {}, escapeHtml(hit)), escapeHtml(after)],
  );
}

export function renderFactFoldout(view: FactView, openValue?: string): string {
  const rows = view.alternatives.map((alt) => {
    const open = alt.value === openValue;
    const sources = alt.sources.map((src) =>
      el("div", { class: "source", "data-entry": src.entryId ?? "" }, [
        el("span", { class: "author" }, escapeHtml(src.author ?? "")),
        src.grounded
          ? src.fragments.map(renderFragment).join("")
          : el("span", { class: "badge metadata-origin" }, "from metadata"),
      ]),
    );
    return el(
      "li",
      {
        class: `alternative ${alt.agreementWithSelected}${alt.selected ? " selected" : ""}${open ? " open" : ""}`,
        "data-value": alt.value,
      },
      [
        el("span", { class: "value" }, escapeHtml(alt.value)),
        el("span", { class: "agreement" }, escapeHtml(alt.agreementWithSelected)),
        el("span", { class: "source-count" }, String(alt.sources.length)),
        open ? el("div", { class: "fold-out" }, sources) : "",
      ],
    );
  });
  return el("section", { class: "fact", "data-kind": view.kind }, [
    el("h2", {}, escapeHtml(`${view.personId}: ${view.kind}`)),
    el("ul", { class: "alternatives" }, rows),
  ]);
}
