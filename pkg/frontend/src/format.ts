/** The one formatting routine for numbers that came from the server.
 *
 * Every quantity on screen goes through `fmt`, and the e2e network audit
 * applies the same function to the recorded payloads -- so a displayed
 * number can always be traced back to a payload value.  Formatting trims
 * to at most three decimals; it never combines or converts values.
 */

export function fmt(n: number): string {
  if (Number.isInteger(n)) return String(n);
  const rounded = Math.round(n * 1000) / 1000;
  return String(rounded);
}

/** Collect every number reachable in a JSON payload, plus array lengths
 * (a count shown in the UI is the length of a payload array) and numeric
 * tokens inside payload strings (server messages quote versions etc.).
 */
export function collectNumbers(value: unknown, into: Set<string>): void {
  if (typeof value === "number" && Number.isFinite(value)) {
    into.add(fmt(value));
    return;
  }
  if (typeof value === "string") {
    for (const tok of value.match(/-?\d+(?:\.\d+)?/g) ?? []) {
      into.add(fmt(Number(tok)));
    }
    return;
  }
  if (Array.isArray(value)) {
    into.add(fmt(value.length));
    for (const item of value) collectNumbers(item, into);
    return;
  }
  if (value && typeof value === "object") {
    for (const item of Object.values(value)) collectNumbers(item, into);
  }
}
