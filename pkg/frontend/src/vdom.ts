// Minimal virtual node tree with a deterministic HTML printer. Screens build
// plain data here; snapshot tests and the browser entry point both consume the
// printed form, so rendering stays a pure function of its inputs.

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  children: Array<VNode | string>;
}

type Child = VNode | string | null | undefined | false;

export function h(tag: string, attrs: Record<string, string> = {}, ...children: Child[]): VNode {
  const kept: Array<VNode | string> = [];
  for (const child of children) {
    if (child !== null && child !== undefined && child !== false) kept.push(child);
  }
  return { tag, attrs, children: kept };
}

const VOID_TAGS = new Set(["br", "hr", "img", "input", "link", "meta"]);

function escapeHtml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function attrString(attrs: Record<string, string>): string {
  const keys = Object.keys(attrs).sort();
  return keys.map((k) => ` ${k}="${escapeHtml(attrs[k]!)}"`).join("");
}

/** Pretty-print a node; attribute order is sorted so output is stable. */
export function renderToHtml(node: VNode | string, indent = 0): string {
  const pad = "  ".repeat(indent);
  if (typeof node === "string") return pad + escapeHtml(node);
  const open = `${pad}<${node.tag}${attrString(node.attrs)}`;
  if (VOID_TAGS.has(node.tag)) return `${open}/>`;
  if (node.children.length === 0) return `${open}></${node.tag}>`;
  const inner = node.children.map((c) => renderToHtml(c, indent + 1)).join("\n");
  return `${open}>\n${inner}\n${pad}</${node.tag}>`;
}

/** Depth-first collection of every element node matching the predicate. */
export function findAll(node: VNode, predicate: (n: VNode) => boolean): VNode[] {
  const out: VNode[] = [];
  const stack: VNode[] = [node];
  while (stack.length > 0) {
    const current = stack.pop()!;
    if (predicate(current)) out.push(current);
    for (let i = current.children.length - 1; i >= 0; i -= 1) {
      const child = current.children[i]!;
      if (typeof child !== "string") stack.push(child);
    }
  }
  return out;
}

export function findAllByClass(node: VNode, className: string): VNode[] {
  return findAll(node, (n) => (n.attrs["class"] ?? "").split(" ").includes(className));
}

/** All text content beneath the node, concatenated in document order. */
export function textOf(node: VNode | string): string {
  if (typeof node === "string") return node;
  return node.children.map(textOf).join("");
}
