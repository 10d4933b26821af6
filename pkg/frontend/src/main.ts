/**
 * Browser entry point: binds the annotation session and the dashboard
 * to the page. Everything interesting lives in the pure modules; this
 * file only projects screens onto elements and forwards events.
 *
 * Configuration comes from query parameters:
 *   ?service=http://127.0.0.1:8402   review service base URL
 *   &campaign=<id>                   campaign to annotate
 *   &annotator=<id>                  opaque annotator id
 */

import { ReviewApiClient } from "./client.js";
import { AnnotationSession } from "./session.js";
import {
  campaignDashboard,
  type Dashboard,
  type TaskScreen,
} from "./view.js";
import type { AnnotationValue } from "./schema.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function renderTaskPanel(
  root: HTMLElement,
  screen: TaskScreen | null,
  session: AnnotationSession,
  rerender: () => void,
): void {
  root.replaceChildren();
  if (screen === null) {
    root.append(el("p", "done-note", "All tasks annotated. Thank you."));
    return;
  }

  root.append(el("div", "progress", `Progress: ${screen.progress}`));
  root.append(el("div", "relation", screen.relationName));
  const statement = el("blockquote", "statement", screen.statement);
  root.append(statement);

  const search = el("a", "search-link", "Search the web for this statement");
  search.href = screen.searchLink;
  search.target = "_blank";
  search.rel = "noopener";
  root.append(search);

  const actions = el("div", "actions");
  for (const action of screen.actions) {
    const button = el(
      "button",
      action.selected ? "value selected" : "value",
      action.label,
    );
    button.addEventListener("click", () => {
      session.selectValue(action.value as AnnotationValue);
      rerender();
    });
    actions.append(button);
  }
  root.append(actions);

  const fields = el("div", "fields");
  const inputs: Array<
    [string, { value: string; required: boolean }, (text: string) => void]
  > = [
    ["Evidence URL", screen.evidenceUrl, (t) => session.setEvidenceUrl(t)],
    ["Snippet", screen.snippet, (t) => session.setSnippet(t)],
    ["Explanation", screen.explanation, (t) => session.setExplanation(t)],
  ];
  for (const [label, field, setter] of inputs) {
    const wrap = el("label", field.required ? "field required" : "field");
    wrap.append(el("span", "field-label", label));
    const input = el("input");
    input.value = field.value;
    input.addEventListener("input", () => {
      setter(input.value);
      rerender();
    });
    wrap.append(input);
    fields.append(wrap);
  }
  root.append(fields);

  if (screen.inlineError !== null) {
    root.append(el("div", "inline-error", screen.inlineError));
  }

  const submit = el("button", "submit", "Submit vote");
  submit.disabled = !screen.submitEnabled;
  submit.addEventListener("click", () => {
    void session.submit().then(rerender);
  });
  root.append(submit);
}

function renderDashboard(
  root: HTMLElement,
  dashboard: Dashboard,
  onExport: (policy: "strict" | "plausible") => void,
): void {
  root.replaceChildren();
  root.append(el("h2", undefined, "Campaign"));
  root.append(el("div", "progress", `Votes: ${dashboard.progress}`));
  if (dashboard.zeroState) {
    root.append(el("p", "zero-state", "No votes yet."));
  }
  for (const row of dashboard.rows) {
    const section = el("div", "relation-row");
    section.append(el("div", "relation", `${row.relation} (${row.total})`));
    const bars = el("div", "bars");
    for (const cell of row.cells) {
      const bar = el("div", `bar value-${cell.value}`);
      bar.style.width = `${cell.percent}%`;
      bar.title = `${cell.label}: ${cell.count} (${cell.percent}%)`;
      bars.append(bar);
      section.append(
        el("span", "cell", `${cell.label} ${cell.count} (${cell.percent}%)`),
      );
    }
    section.append(bars);
    root.append(section);
  }
  const exports = el("div", "exports");
  for (const button of dashboard.exportButtons) {
    const node = el("button", "export", button.label);
    node.addEventListener("click", () => onExport(button.policy));
    exports.append(node);
  }
  root.append(exports);
}

function download(name: string, payload: unknown): void {
  const blob = new Blob([JSON.stringify(payload, null, 2)], {
    type: "application/json",
  });
  const link = el("a");
  link.href = URL.createObjectURL(blob);
  link.download = name;
  link.click();
  URL.revokeObjectURL(link.href);
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const service = params.get("service") ?? window.location.origin;
  const campaign = params.get("campaign") ?? "";
  const annotator = params.get("annotator") ?? "anonymous";

  const taskRoot = document.getElementById("task") as HTMLElement;
  const dashboardRoot = document.getElementById("dashboard") as HTMLElement;

  const client = new ReviewApiClient(service);
  if (campaign === "") {
    taskRoot.textContent = "Pass ?campaign=<id> to start annotating.";
    return;
  }
  const session = new AnnotationSession(client, campaign, annotator);

  const refreshDashboard = async (): Promise<void> => {
    try {
      const summary = await client.summary(campaign);
      renderDashboard(dashboardRoot, campaignDashboard(summary), (policy) => {
        void client
          .exportAccepted(campaign, policy)
          .then((result) => download(`export-${policy}.json`, result));
      });
    } catch {
      // offline service: keep the last view, show a retry banner
      const banner = el("div", "retry-banner", "Service unreachable, retrying");
      dashboardRoot.prepend(banner);
      setTimeout(() => void refreshDashboard(), 2000);
    }
  };

  const rerender = (): void => {
    renderTaskPanel(taskRoot, session.screen, session, rerender);
    void refreshDashboard();
  };

  await session.start();
  rerender();
}

void boot();
