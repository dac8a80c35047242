/** Minimal HTML string helpers; no framework, output is inspectable text. */

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function el(
  tag: string,
  attrs: Record<string, string | number> = {},
  children: string[] | string = [],
): string {
  const attrText = Object.entries(attrs)
    .map(([k, v]) => ` ${k}="${escapeHtml(String(v))}"`)
    .join("");
  const body = Array.isArray(children) ? children.join("") : children;
  return `<${tag}${attrText}>${body}</${tag}>`;
}
