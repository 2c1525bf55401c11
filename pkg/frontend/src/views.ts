/**
 * Panel renderers.
 *
 * The server is the single source of analysis truth: every numeric shown
 * is the verbatim string form of a value from an API response.  Client
 * code computes geometry (bar widths, positions) but never the numbers
 * it prints.
 */

export interface CdResponse {
  frameworks: string[];
  avg_ranks: number[];
  friedman_chi2: number;
  friedman_pvalue: number;
  critical_difference: number;
  alpha: number;
  groups: number[][];
}

export interface ScaledResponse {
  baseline: string;
  frameworks: string[];
  tasks: string[];
  scaled: (number | null)[][];
  excluded_tasks: string[];
}

export interface ParetoResponse {
  scenario: string;
  points: Record<string, [number, number]>;
  front: [number, number][];
}

export interface TreeNode {
  kind: "split" | "leaf";
  n: number;
  feature?: string;
  cutpoint?: number;
  p_value?: number;
  left?: TreeNode;
  right?: TreeNode;
  worths?: Record<string, number>;
}

export interface TreeResponse {
  frameworks: string[];
  alpha: number;
  max_depth: number;
  min_node: number;
  root: TreeNode;
}

export interface ErrorsResponse {
  categories: string[];
  counts: Record<string, Record<string, number>>;
}

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function errorPanel(message: string): HTMLElement {
  return el("div", "panel-error", message);
}

export function renderCd(doc: CdResponse | null, error: string | null): HTMLElement {
  const root = el("section", "panel cd-panel");
  root.appendChild(el("h2", undefined, "Critical differences"));
  if (error !== null || doc === null) {
    root.appendChild(errorPanel(error ?? "no data"));
    return root;
  }
  const order = doc.frameworks
    .map((fw, i) => ({ fw, rank: doc.avg_ranks[i], i }))
    .sort((a, b) => a.rank - b.rank);
  const list = el("ol", "cd-ticks");
  const span = Math.max(...doc.avg_ranks) - Math.min(...doc.avg_ranks) || 1;
  const lowest = Math.min(...doc.avg_ranks);
  for (const { fw, rank } of order) {
    const item = el("li", "cd-tick");
    item.appendChild(el("span", "cd-name", fw));
    item.appendChild(el("span", "cd-rank", String(rank)));
    const bar = el("span", "cd-bar");
    bar.style.width = `${(8 + (92 * (rank - lowest)) / span).toFixed(1)}%`;
    item.appendChild(bar);
    list.appendChild(item);
  }
  root.appendChild(list);
  const stats = el("dl", "cd-stats");
  const pairs: [string, number][] = [
    ["critical difference", doc.critical_difference],
    ["Friedman chi2", doc.friedman_chi2],
    ["p-value", doc.friedman_pvalue],
    ["alpha", doc.alpha],
  ];
  for (const [label, value] of pairs) {
    stats.appendChild(el("dt", undefined, label));
    stats.appendChild(el("dd", undefined, String(value)));
  }
  root.appendChild(stats);
  const groups = el("p", "cd-groups");
  groups.textContent = doc.groups.length
    ? doc.groups
        .map((g) => `{${g.map((i) => doc.frameworks[i]).join(", ")}}`)
        .join(" ")
    : "all pairwise rank gaps significant";
  root.appendChild(groups);
  return root;
}

export function renderScaled(
  doc: ScaledResponse | null, error: string | null,
): HTMLElement {
  const root = el("section", "panel scaled-panel");
  root.appendChild(el("h2", undefined, "Scaled scores"));
  if (error !== null || doc === null) {
    root.appendChild(errorPanel(error ?? "no data"));
    return root;
  }
  root.appendChild(
    el("p", "scaled-caption",
       `baseline ${doc.baseline} maps to zero, the best observed score to one`),
  );
  const table = el("table", "scaled-table");
  const head = el("tr");
  head.appendChild(el("th", undefined, "framework"));
  for (const task of doc.tasks) head.appendChild(el("th", undefined, task));
  table.appendChild(head);
  doc.frameworks.forEach((fw, i) => {
    const row = el("tr");
    row.appendChild(el("td", "scaled-fw", fw));
    doc.tasks.forEach((_task, t) => {
      const value = doc.scaled[i][t];
      row.appendChild(
        el("td", "scaled-value", value === null ? "degenerate" : String(value)),
      );
    });
    table.appendChild(row);
  });
  root.appendChild(table);
  if (doc.excluded_tasks.length) {
    root.appendChild(
      el("p", "scaled-excluded",
         `excluded from scaling: ${doc.excluded_tasks.join(", ")}`),
    );
  }
  return root;
}

export function renderPareto(
  doc: ParetoResponse | null, error: string | null,
): HTMLElement {
  const root = el("section", "panel pareto-panel");
  root.appendChild(el("h2", undefined, "Accuracy vs inference speed"));
  if (error !== null || doc === null) {
    root.appendChild(errorPanel(error ?? "no data"));
    return root;
  }
  root.appendChild(el("p", "pareto-caption", `scenario: ${doc.scenario}`));
  const frontKeys = new Set(doc.front.map(([x, y]) => `${x}|${y}`));
  const table = el("table", "pareto-table");
  const head = el("tr");
  for (const h of ["framework", "rows/second", "scaled score", ""]) {
    head.appendChild(el("th", undefined, h));
  }
  table.appendChild(head);
  for (const fw of Object.keys(doc.points).sort()) {
    const [speed, score] = doc.points[fw];
    const row = el("tr", "pareto-point");
    row.appendChild(el("td", undefined, fw));
    row.appendChild(el("td", "pareto-speed", String(speed)));
    row.appendChild(el("td", "pareto-score", String(score)));
    row.appendChild(
      el("td", "pareto-front-mark",
         frontKeys.has(`${speed}|${score}`) ? "on front" : ""),
    );
    table.appendChild(row);
  }
  root.appendChild(table);
  return root;
}

export function renderTree(
  doc: TreeResponse | null, error: string | null,
): HTMLElement {
  const root = el("section", "panel tree-panel");
  root.appendChild(el("h2", undefined, "Preference tree"));
  if (error !== null || doc === null) {
    root.appendChild(errorPanel(error ?? "no data"));
    return root;
  }
  root.appendChild(renderTreeNode(doc.root));
  return root;
}

function renderTreeNode(node: TreeNode): HTMLElement {
  if (node.kind === "leaf") {
    const leaf = el("div", "tree-leaf");
    leaf.appendChild(el("div", "tree-leaf-n", `n = ${String(node.n)}`));
    const worths = node.worths ?? {};
    const widest = Math.max(...Object.values(worths), 1e-12);
    const bars = el("div", "worth-bars");
    for (const fw of Object.keys(worths).sort()) {
      const row = el("div", "worth-row");
      row.appendChild(el("span", "worth-name", fw));
      const bar = el("span", "worth-bar");
      bar.style.width = `${((100 * worths[fw]) / widest).toFixed(1)}%`;
      row.appendChild(bar);
      row.appendChild(el("span", "worth-value", String(worths[fw])));
      bars.appendChild(row);
    }
    leaf.appendChild(bars);
    return leaf;
  }
  const split = el("div", "tree-split");
  const header = el("div", "tree-split-header");
  header.appendChild(el("span", "tree-feature", node.feature ?? ""));
  header.appendChild(el("span", "tree-cutpoint", String(node.cutpoint)));
  header.appendChild(el("span", "tree-p", `p = ${String(node.p_value)}`));
  split.appendChild(header);
  const children = el("div", "tree-children");
  const left = el("div", "tree-child tree-left");
  left.appendChild(el("div", "tree-edge", "<= cutpoint"));
  left.appendChild(renderTreeNode(node.left as TreeNode));
  const right = el("div", "tree-child tree-right");
  right.appendChild(el("div", "tree-edge", "> cutpoint"));
  right.appendChild(renderTreeNode(node.right as TreeNode));
  children.appendChild(left);
  children.appendChild(right);
  split.appendChild(children);
  return split;
}

export function renderErrors(
  doc: ErrorsResponse | null, error: string | null,
): HTMLElement {
  const root = el("section", "panel errors-panel");
  root.appendChild(el("h2", undefined, "Failures by category"));
  if (error !== null || doc === null) {
    root.appendChild(errorPanel(error ?? "no data"));
    return root;
  }
  const table = el("table", "errors-table");
  const head = el("tr");
  head.appendChild(el("th", undefined, "framework"));
  for (const cat of doc.categories) head.appendChild(el("th", undefined, cat));
  table.appendChild(head);
  for (const fw of Object.keys(doc.counts).sort()) {
    const row = el("tr");
    row.appendChild(el("td", undefined, fw));
    for (const cat of doc.categories) {
      row.appendChild(el("td", "error-count", String(doc.counts[fw][cat])));
    }
    table.appendChild(row);
  }
  root.appendChild(table);
  return root;
}
