/**
 * Wiring: the filter panel drives refreshes, refreshes repaint the
 * panels atomically, and the current state is always reflected in the
 * URL so any view is shareable.
 */

import { AnalysisClient, ViewModel } from "./api.js";
import {
  FilterState,
  decodePermalink,
  defaultState,
  encodePermalink,
} from "./state.js";
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
} from "./views.js";

const client = new AnalysisClient("");
let state: FilterState = defaultState();
let allFrameworks: string[] = [];
let allTasks: string[] = [];
let allMetafeatures: string[] = [];

function checkboxGroup(
  title: string,
  options: string[],
  selected: string[],
  onChange: (chosen: string[]) => void,
): HTMLElement {
  const group = document.createElement("fieldset");
  const legend = document.createElement("legend");
  legend.textContent = title;
  group.appendChild(legend);
  const effective = selected.length ? selected : options;
  for (const option of options) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.value = option;
    box.checked = effective.includes(option);
    box.addEventListener("change", () => {
      const chosen = [...group.querySelectorAll("input:checked")].map(
        (node) => (node as HTMLInputElement).value,
      );
      onChange(chosen.length === options.length ? [] : chosen);
    });
    label.appendChild(box);
    label.appendChild(document.createTextNode(option));
    group.appendChild(label);
  }
  return group;
}

function renderFilterPanel(): HTMLElement {
  const panel = document.createElement("aside");
  panel.id = "filters";
  panel.appendChild(
    checkboxGroup("Frameworks", allFrameworks, state.frameworks, (chosen) => {
      state.frameworks = chosen;
      apply();
    }),
  );
  panel.appendChild(
    checkboxGroup("Tasks", allTasks, state.tasks, (chosen) => {
      state.tasks = chosen;
      apply();
    }),
  );
  panel.appendChild(
    checkboxGroup("Meta-features", allMetafeatures, state.metafeatures, (chosen) => {
      state.metafeatures = chosen.length ? chosen : [...state.metafeatures];
      apply();
    }),
  );

  const alphaLabel = document.createElement("label");
  alphaLabel.textContent = "alpha ";
  const alpha = document.createElement("select");
  for (const value of ["0.05", "0.1"]) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = value;
    option.selected = Number(value) === state.alpha;
    alpha.appendChild(option);
  }
  alpha.addEventListener("change", () => {
    state.alpha = Number(alpha.value);
    apply();
  });
  alphaLabel.appendChild(alpha);
  panel.appendChild(alphaLabel);

  const depthLabel = document.createElement("label");
  depthLabel.textContent = "tree depth ";
  const depth = document.createElement("input");
  depth.type = "number";
  depth.min = "0";
  depth.max = "6";
  depth.value = String(state.maxDepth);
  depth.addEventListener("change", () => {
    state.maxDepth = Number(depth.value);
    apply();
  });
  depthLabel.appendChild(depth);
  panel.appendChild(depthLabel);
  return panel;
}

export function renderPanels(target: HTMLElement, vm: ViewModel): void {
  target.replaceChildren(
    renderCd(vm.cd.data as CdResponse | null, vm.cd.error),
    renderScaled(vm.scaled.data as ScaledResponse | null, vm.scaled.error),
    renderPareto(vm.pareto.data as ParetoResponse | null, vm.pareto.error),
    renderTree(vm.tree.data as TreeResponse | null, vm.tree.error),
    renderErrors(vm.errors.data as ErrorsResponse | null, vm.errors.error),
  );
}

async function apply(): Promise<void> {
  history.replaceState(null, "", `${location.pathname}${encodePermalink(state)}`);
  const sidebar = document.getElementById("sidebar");
  if (sidebar) sidebar.replaceChildren(renderFilterPanel());
  const vm = await client.refresh(state);
  if (vm === null) return; // superseded by a newer filter change
  const target = document.getElementById("panels");
  if (target) renderPanels(target, vm);
}

async function init(): Promise<void> {
  state = decodePermalink(location.search);
  [allFrameworks, allTasks, allMetafeatures] = await Promise.all([
    client.getFrameworks(),
    client.getTasks().then((tasks) => tasks.map((t) => String(t.id))),
    client.getMetafeatureNames(),
  ]);
  await apply();
}

if (typeof document !== "undefined" && document.getElementById("panels")) {
  void init();
}
