import { ApiClient } from "./api.js";
import { renderSvg } from "./graph.js";
import { allOptions, MenuOption } from "./menus.js";
import { ExplorerController, ExplorerState } from "./state.js";
import { OperationRequest } from "./types.js";

const controller = new ExplorerController(new ApiClient(""));

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const fileInput = el<HTMLInputElement>("file-input");
const uploadHint = el<HTMLElement>("upload-hint");
const summaryBox = el<HTMLElement>("summary");
const errorBox = el<HTMLElement>("error");
const graphBox = el<HTMLElement>("graph");
const menusBox = el<HTMLElement>("menus");
const historyBox = el<HTMLElement>("history");
const undoButton = el<HTMLButtonElement>("undo");
const thresholdInput = el<HTMLInputElement>("threshold");
const thresholdLabel = el<HTMLElement>("threshold-label");
const exportLink = el<HTMLAnchorElement>("export");

const MENU_TITLES: Record<string, string> = {
  "drill-down": "Drill down",
  "roll-up": "Roll up",
  unfold: "Unfold",
  fold: "Fold",
};

function renderMenus(state: ExplorerState): void {
  menusBox.textContent = "";
  if (!state.summary) {
    return;
  }
  const options = allOptions(state.summary.catalog);
  for (const [kind, title] of Object.entries(MENU_TITLES)) {
    const group = document.createElement("div");
    group.className = "menu-group";
    const heading = document.createElement("h3");
    heading.textContent = title;
    group.appendChild(heading);
    const list = options[kind] ?? [];
    if (list.length === 0) {
      const empty = document.createElement("p");
      empty.className = "empty";
      empty.textContent = "nothing applicable";
      group.appendChild(empty);
    }
    for (const option of list) {
      group.appendChild(menuButton(option, state.pending));
    }
    menusBox.appendChild(group);
  }
}

function menuButton(option: MenuOption, pending: boolean): HTMLButtonElement {
  const button = document.createElement("button");
  button.textContent = option.label;
  button.disabled = pending;
  button.addEventListener("click", () => void controller.apply(option.request));
  return button;
}

function describe(request: OperationRequest): string {
  if (request.kind === "drill-down" || request.kind === "roll-up") {
    return `${request.kind} ${request.object_type} by ${request.attribute}`;
  }
  return `${request.kind} ${request.event_type} over ${request.object_type}`;
}

function render(state: ExplorerState): void {
  uploadHint.hidden = state.sessionId !== null;
  errorBox.textContent = state.error ?? "";
  errorBox.hidden = !state.error;
  undoButton.disabled = state.pending || state.version === 0;
  thresholdLabel.textContent = String(state.threshold);

  if (state.summary) {
    const s = state.summary;
    summaryBox.textContent =
      `${s.events} events, ${s.objects} objects, ` +
      `${s.object_types.length} object types, ${s.event_types.length} event types ` +
      `(version ${state.version})`;
  } else {
    summaryBox.textContent = "";
  }

  historyBox.textContent = "";
  state.history.forEach((request, index) => {
    const crumb = document.createElement("li");
    crumb.textContent = `${index + 1}. ${describe(request)}`;
    historyBox.appendChild(crumb);
  });

  renderMenus(state);
  graphBox.innerHTML = state.dfg ? renderSvg(state.dfg) : "";

  if (state.sessionId) {
    exportLink.hidden = false;
    exportLink.href = `/api/sessions/${state.sessionId}/log`;
    window.location.hash = state.sessionId;
  } else {
    exportLink.hidden = true;
  }
}

controller.subscribe(render);

fileInput.addEventListener("change", async () => {
  const file = fileInput.files?.[0];
  if (!file) {
    return;
  }
  const bytes = new Uint8Array(await file.arrayBuffer());
  await controller.upload(bytes);
});

undoButton.addEventListener("click", () => void controller.undo());

thresholdInput.addEventListener("change", () => {
  const value = Number(thresholdInput.value);
  if (Number.isInteger(value) && value >= 1) {
    void controller.setThreshold(value);
  }
});

// Reloading the page with a session hash reattaches to the same session.
const hash = window.location.hash.slice(1);
if (hash) {
  void controller.rehydrate(hash);
}
