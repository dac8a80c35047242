/** Audit helper: checks that rendered markup invents no numbers.
 *
 * Collects every numeric token from recorded API payloads and from a
 * rendered HTML string; the render side must be a subset. Markup
 * attributes that merely restate payload values (data-year and the
 * like) are covered by the same rule.
 */

import { Exchange, Json } from "./api.js";

function collect(value: Json, out: Set<string>): void {
  if (typeof value === "number") {
    out.add(String(value));
  } else if (typeof value === "string") {
    for (const match of value.match(/\d+(?:\.\d+)?/g) ?? []) {
      out.add(match);
    }
  } else if (Array.isArray(value)) {
    for (const item of value) collect(item, out);
  } else if (value !== null && typeof value === "object") {
    // object keys carry payload data too (facet values, year buckets)
    for (const [key, item] of Object.entries(value)) {
      collect(key, out);
      collect(item, out);
    }
  }
}

export function payloadNumbers(traffic: Exchange[]): Set<string> {
  const out = new Set<string>();
  for (const exchange of traffic) {
    collect(exchange.response, out);
  }
  return out;
}

export function renderedNumbers(html: string): Set<string> {
  const out = new Set<string>();
  for (const match of html.match(/\d+(?:\.\d+)?/g) ?? []) {
    out.add(match);
  }
  return out;
}

/** Numbers present in the markup but absent from every recorded payload. */
export function auditRendering(html: string, traffic: Exchange[]): string[] {
  const allowed = payloadNumbers(traffic);
  return [...renderedNumbers(html)].filter((n) => !allowed.has(n)).sort();
}
