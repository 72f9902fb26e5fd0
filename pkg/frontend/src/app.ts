// Single-page analyst app: queue list, per-instance overlay detail, decision
// submission, session report. Decision state is shown only after the server
// acknowledges the write; the queue is re-fetched on a poll timer.

import { Client } from "./api.js";
import { renderOverlayPanel } from "./chart.js";
import {
  dispositionLabel,
  formatConfidence,
  isFlag,
  labelName,
  queueCounts,
  reportRows,
  visibleCards,
} from "./logic.js";
import type { QueueCard } from "./types.js";

const POLL_MS = 5000;

interface ViewState {
  session: string;
  analystId: string;
  flagsOnly: boolean;
  hideDecided: boolean;
  cards: QueueCard[];
  selected: number | null;
}

export function startApp(root: HTMLElement, client: Client, session: string): void {
  const state: ViewState = {
    session,
    analystId: "analyst",
    flagsOnly: false,
    hideDecided: false,
    cards: [],
    selected: null,
  };

  root.innerHTML = `
    <header>
      <h1>flowtriage review</h1>
      <label>analyst <input id="analyst" value="analyst"></label>
      <label><input type="checkbox" id="flags-only"> flags only</label>
      <label><input type="checkbox" id="hide-decided"> hide decided</label>
      <span id="counts"></span>
    </header>
    <main>
      <ul id="queue"></ul>
      <section id="detail"><p>Select an instance.</p></section>
    </main>
    <footer><div id="report"></div></footer>
  `;

  const queueEl = root.querySelector<HTMLUListElement>("#queue")!;
  const detailEl = root.querySelector<HTMLElement>("#detail")!;
  const countsEl = root.querySelector<HTMLElement>("#counts")!;
  const reportEl = root.querySelector<HTMLElement>("#report")!;

  root.querySelector<HTMLInputElement>("#analyst")!.addEventListener("input", (ev) => {
    state.analystId = (ev.target as HTMLInputElement).value || "analyst";
  });
  root.querySelector<HTMLInputElement>("#flags-only")!.addEventListener("change", (ev) => {
    state.flagsOnly = (ev.target as HTMLInputElement).checked;
    renderQueue();
  });
  root.querySelector<HTMLInputElement>("#hide-decided")!.addEventListener("change", (ev) => {
    state.hideDecided = (ev.target as HTMLInputElement).checked;
    renderQueue();
  });

  function renderQueue(): void {
    const counts = queueCounts(state.cards);
    countsEl.textContent =
      `${counts.total} queued, ${counts.flagged} flagged, ${counts.decided} decided`;
    queueEl.innerHTML = "";
    for (const card of visibleCards(state.cards, state.flagsOnly, state.hideDecided)) {
      const item = document.createElement("li");
      item.dataset.rowId = String(card.row_id);
      item.className = isFlag(card) ? "flagged" : "accepted";
      if (card.row_id === state.selected) item.classList.add("selected");
      item.innerHTML =
        `<strong>#${card.row_id}</strong> ${labelName(card.predicted_label)} ` +
        `@ ${formatConfidence(card.confidence)} — ${dispositionLabel(card)}` +
        (card.decided_label === null
          ? ""
          : ` <em>decided: ${labelName(card.decided_label)}</em>`);
      item.addEventListener("click", () => void openDetail(card));
      queueEl.appendChild(item);
    }
  }

  async function openDetail(card: QueueCard): Promise<void> {
    state.selected = card.row_id;
    renderQueue();
    const payload = await client.fetchOverlays(card.row_id);
    detailEl.innerHTML = "";

    const summary = document.createElement("p");
    summary.id = "verdict-line";
    summary.textContent =
      `#${card.row_id}: predicted ${labelName(card.predicted_label)} at ` +
      `${formatConfidence(card.confidence)} — ${dispositionLabel(card)}` +
      (card.plot_sim_match !== null
        ? ` (overlap ${card.plot_sim_match} vs ${card.plot_sim_mismatch})`
        : "");
    detailEl.appendChild(summary);

    const panels = document.createElement("div");
    panels.className = "panels";
    for (const plot of payload.overlays) {
      panels.appendChild(renderOverlayPanel(plot));
    }
    detailEl.appendChild(panels);

    const controls = document.createElement("div");
    controls.className = "decision-controls";
    for (const label of [1, 0] as const) {
      const button = document.createElement("button");
      button.dataset.decide = String(label);
      button.textContent = `mark ${labelName(label)}`;
      button.addEventListener("click", () => void submit(card.row_id, label, button));
      controls.appendChild(button);
    }
    const status = document.createElement("span");
    status.id = "decision-status";
    controls.appendChild(status);
    detailEl.appendChild(controls);
  }

  async function submit(rowId: number, label: 0 | 1, button: HTMLButtonElement): Promise<void> {
    const status = detailEl.querySelector<HTMLElement>("#decision-status")!;
    button.disabled = true;
    status.textContent = "saving…";
    try {
      const ack = await client.submitDecision(rowId, state.analystId, label);
      status.textContent = `recorded (seq ${ack.seq})`;
      await refresh();
    } catch (err) {
      status.textContent = `failed: ${err instanceof Error ? err.message : err}`;
    } finally {
      button.disabled = false;
    }
  }

  async function refresh(): Promise<void> {
    const [queue, report] = await Promise.all([
      client.fetchQueue(state.session),
      client.fetchReport(state.session),
    ]);
    state.cards = queue.queue;
    renderQueue();
    const rows = reportRows(report.groups);
    reportEl.textContent =
      `session ${report.session}: ${report.decided} decided` +
      (rows.length
        ? " · " + rows.map((r) => `${r.group} ${r.text}`).join("  ")
        : "");
  }

  void refresh();
  setInterval(() => void refresh(), POLL_MS);
}

// Entry point when loaded from the served page (skipped under tests, where
// startApp is driven explicitly).
if (typeof document !== "undefined" && document.getElementById("app")) {
  const params = new URLSearchParams(window.location.search);
  startApp(
    document.getElementById("app")!,
    new Client(""),
    params.get("session") ?? "default",
  );
}
