/** Timeline, participation, and climax renderings.
 *
 * The UI does no analytics of its own: positions, counts, and scores
 * are taken from the payloads as-is, and group order is preserved
 * exactly (the service already sorts by descending maximum score).
 */

import { ClimaxView, StorytellerView, TimelineView } from "./api.js";
import { el, escapeHtml } from "./html.js";

export function renderTimeline(view: TimelineView): string {
  const rows = view.entries.map((entry) =>
    el("li", { class: entry.date === null ? "event undated" : "event" }, [
      el("span", { class: "date" }, escapeHtml(entry.date ?? "undated")),
      el("span", { class: "type" }, escapeHtml(entry.type)),
      el("span", { class: "place" }, escapeHtml(entry.place ?? "")),
      el("span", { class: "source" }, escapeHtml(entry.sourceEntry ?? "")),
    ]),
  );
  return el("section", { class: "timeline", "data-person": view.personId }, [
    el("ol", {}, rows),
  ]);
}

export function renderParticipation(view: StorytellerView): string {
  // left side: one bar per actor, sized by event count, colored by index
  const actorBars = view.actors.map((actor) =>
    el(
      "div",
      {
        class: "actor",
        "data-color": actor.colorIndex,
        "data-iri": actor.iri,
      },
      [
        el("span", { class: "label" }, escapeHtml(actor.label)),
        el("span", { class: "bar", style: `width:${actor.eventCount}em` },
          String(actor.eventCount)),
      ],
    ),
  );
  // chart body: nodes at (type, year); actor lines intersect at shared nodes
  const nodes = view.events.map((event) =>
    el(
      "div",
      {
        class: "node",
        "data-type": event.type,
        "data-year": event.year,
        "data-actors": event.participants.join(" "),
      },
      `${escapeHtml(event.type)} ${event.year}`,
    ),
  );
  const undated = view.undated.map((iri) =>
    el("div", { class: "node undated", "data-event": iri }, "undated"),
  );
  return el("section", { class: "participation" }, [
    el("div", { class: "actors" }, actorBars),
    el("div", { class: "chart" }, [...nodes, ...undated]),
  ]);
}

export function renderClimax(view: ClimaxView): string {
  const groups = view.groups.map((group) =>
    el("div", { class: "climax-group", "data-type": group.type }, [
      el("h3", {}, escapeHtml(group.type)),
      el(
        "ul",
        {},
        group.points.map((point) =>
          el(
            "li",
            { class: "point", "data-year": point.year },
            `${point.year}: ${point.score}`,
          ),
        ),
      ),
    ]),
  );
  return el("section", { class: "climax", "data-scoring": view.scoring }, groups);
}
