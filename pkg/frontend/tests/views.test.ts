/**
 * DOM-vs-response diff: panels render captured API responses (real
 * server output checked into fixtures/), and every numeric token that
 * appears in the DOM must appear verbatim in the response that fed it.
 */

import { describe, expect, it } from "vitest";

import cdFixture from "./fixtures/cd.json";
import cdSubsetFixture from "./fixtures/cd_subset.json";
import scaledFixture from "./fixtures/scaled.json";
import paretoFixture from "./fixtures/pareto.json";
import treeFixture from "./fixtures/bttree.json";
import errorsFixture from "./fixtures/errors.json";
import {
  CdResponse,
  ErrorsResponse,
  ParetoResponse,
  ScaledResponse,
  TreeResponse,
  renderCd,
  renderErrors,
  renderPareto,
  renderScaled,
  renderTree,
} from "../src/views.js";

function responseNumbers(doc: unknown, out = new Set<string>()): Set<string> {
  if (typeof doc === "number") {
    out.add(String(doc));
  } else if (Array.isArray(doc)) {
    for (const item of doc) responseNumbers(item, out);
  } else if (doc !== null && typeof doc === "object") {
    for (const value of Object.values(doc as Record<string, unknown>)) {
      responseNumbers(value, out);
    }
  }
  return out;
}

const NUMBER_TOKEN = /(?<![\w.])-?\d+(?:\.\d+)?(?:e[+-]?\d+)?(?![\w.])/g;

function displayedNumbers(node: HTMLElement): string[] {
  // tokens are extracted per leaf element: concatenated textContent of
  // sibling elements would glue labels onto numbers
  const leaves = [...node.querySelectorAll("*")].filter(
    (child) => child.children.length === 0,
  );
  const tokens: string[] = [];
  for (const leaf of leaves) {
    const text = leaf.textContent ?? "";
    tokens.push(...[...text.matchAll(NUMBER_TOKEN)].map((m) => m[0]));
  }
  return tokens;
}

function assertNumbersComeFromResponse(node: HTMLElement, fixture: unknown) {
  const allowed = responseNumbers(fixture);
  const shown = displayedNumbers(node);
  expect(shown.length).toBeGreaterThan(0);
  for (const token of shown) {
    expect(allowed, `displayed ${token} missing from response`).toContain(token);
  }
}

describe("CD panel", () => {
  it("renders one tick per framework", () => {
    const panel = renderCd(cdFixture as CdResponse, null);
    expect(panel.querySelectorAll(".cd-tick").length).toBe(
      (cdFixture as CdResponse).frameworks.length,
    );
  });

  it("deselecting a framework drops its tick", () => {
    const full = renderCd(cdFixture as CdResponse, null);
    const subset = renderCd(cdSubsetFixture as CdResponse, null);
    expect(subset.querySelectorAll(".cd-tick").length).toBe(
      full.querySelectorAll(".cd-tick").length - 1,
    );
    expect(subset.textContent).not.toContain("mock-crashy");
  });

  it("all displayed numerics come from the response", () => {
    assertNumbersComeFromResponse(
      renderCd(cdFixture as CdResponse, null), cdFixture,
    );
  });

  it("degenerate selection shows the server notice", () => {
    const panel = renderCd(null, "CD analysis needs at least 2 frameworks");
    expect(panel.querySelector(".panel-error")?.textContent).toContain(
      "at least 2 frameworks",
    );
  });
});

describe("scaled panel", () => {
  it("all displayed numerics come from the response", () => {
    assertNumbersComeFromResponse(
      renderScaled(scaledFixture as ScaledResponse, null), scaledFixture,
    );
  });

  it("one row per framework, one column per task", () => {
    const doc = scaledFixture as ScaledResponse;
    const panel = renderScaled(doc, null);
    const rows = panel.querySelectorAll("tr");
    expect(rows.length).toBe(1 + doc.frameworks.length);
    expect(rows[0].querySelectorAll("th").length).toBe(1 + doc.tasks.length);
  });
});

describe("pareto panel", () => {
  it("all displayed numerics come from the response", () => {
    assertNumbersComeFromResponse(
      renderPareto(paretoFixture as ParetoResponse, null), paretoFixture,
    );
  });

  it("front membership is marked", () => {
    const panel = renderPareto(paretoFixture as ParetoResponse, null);
    const marks = [...panel.querySelectorAll(".pareto-front-mark")].map(
      (n) => n.textContent,
    );
    expect(marks).toContain("on front");
  });
});

describe("tree panel", () => {
  it("single-leaf tree renders one worth bar chart summing to one", () => {
    const doc = treeFixture as TreeResponse;
    const panel = renderTree(doc, null);
    expect(panel.querySelectorAll(".tree-leaf").length).toBe(1);
    const values = [...panel.querySelectorAll(".worth-value")].map((n) =>
      Number(n.textContent),
    );
    expect(values.length).toBe(doc.frameworks.length);
    expect(values.reduce((a, b) => a + b, 0)).toBeCloseTo(1.0, 6);
  });

  it("worth bars are proportional to the worths", () => {
    const panel = renderTree(treeFixture as TreeResponse, null);
    const rows = [...panel.querySelectorAll(".worth-row")];
    const widths = rows.map((row) =>
      parseFloat((row.querySelector(".worth-bar") as HTMLElement).style.width),
    );
    const worths = rows.map((row) =>
      Number(row.querySelector(".worth-value")?.textContent),
    );
    const scale = widths[0] / worths[0];
    widths.forEach((w, i) => {
      // widths are rounded to 0.1% in the style attribute
      expect(Math.abs(w / worths[i] - scale) / scale).toBeLessThan(0.02);
    });
    expect(Math.max(...widths)).toBeCloseTo(100, 1);
  });

  it("all displayed numerics come from the response", () => {
    assertNumbersComeFromResponse(
      renderTree(treeFixture as TreeResponse, null), treeFixture,
    );
  });

  it("depth-3 synthetic tree lays out split headers and leaves", () => {
    const synthetic: TreeResponse = {
      frameworks: ["a", "b"],
      alpha: 0.05,
      max_depth: 3,
      min_node: 2,
      root: {
        kind: "split", n: 40, feature: "n_instances",
        cutpoint: 8237.5, p_value: 0.005,
        left: {
          kind: "split", n: 20, feature: "n_features",
          cutpoint: 43.5, p_value: 0.01,
          left: { kind: "leaf", n: 10, worths: { a: 0.7, b: 0.3 } },
          right: { kind: "leaf", n: 10, worths: { a: 0.4, b: 0.6 } },
        },
        right: { kind: "leaf", n: 20, worths: { a: 0.2, b: 0.8 } },
      },
    };
    const panel = renderTree(synthetic, null);
    expect(panel.querySelectorAll(".tree-split").length).toBe(2);
    expect(panel.querySelectorAll(".tree-leaf").length).toBe(3);
    expect(panel.textContent).toContain("8237.5");
    assertNumbersComeFromResponse(panel, synthetic);
  });
});

describe("errors panel", () => {
  it("all displayed numerics come from the response", () => {
    assertNumbersComeFromResponse(
      renderErrors(errorsFixture as ErrorsResponse, null), errorsFixture,
    );
  });

  it("counts land under the right category", () => {
    const doc = errorsFixture as ErrorsResponse;
    const panel = renderErrors(doc, null);
    const implIdx = doc.categories.indexOf("implementation");
    const crashyRow = [...panel.querySelectorAll("tr")].find((row) =>
      row.textContent?.includes("mock-crashy"),
    );
    const cells = crashyRow!.querySelectorAll(".error-count");
    expect(cells[implIdx].textContent).toBe(
      String(doc.counts["mock-crashy"]["implementation"]),
    );
  });
});
