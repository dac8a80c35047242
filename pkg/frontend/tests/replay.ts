/** Replay transport over recorded API traffic.
 *
 * Requests are matched on method, url, and canonicalized body; a test
 * that strays from what the real service answered fails loudly instead
 * of inventing data.
 */

import { Exchange, Json, Transport } from "../src/api.js";

function canonical(value: Json | undefined): string {
  if (value === undefined || value === null) return "null";
  if (Array.isArray(value)) {
    return "[" + value.map((v) => canonical(v)).join(",") + "]";
  }
  if (typeof value === "object") {
    const keys = Object.keys(value).sort();
    return "{" + keys.map((k) => JSON.stringify(k) + ":" + canonical(value[k])).join(",") + "}";
  }
  return JSON.stringify(value);
}

export function replayTransport(traffic: Exchange[]): Transport {
  return async (method, url, body) => {
    for (const exchange of traffic) {
      if (
        exchange.method === method &&
        exchange.url === url &&
        canonical(exchange.body ?? undefined) === canonical(body)
      ) {
        return exchange.response;
      }
    }
    throw new Error(`no recorded exchange for ${method} ${url} ${canonical(body)}`);
  };
}
