/**
 * Pure HTML renderers for every screen of the annotation flow.
 * No DOM access here; main.ts mounts the strings and wires events.
 */

import { FlowView } from "./flow.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderProgress(index: number, total: number): string {
  return `<p class="bws-progress">Question ${index + 1} of ${total}</p>`;
}

function renderChoiceGroup(kind: "best" | "worst", view: FlowView): string {
  const label =
    kind === "best"
      ? `Which word do you associate MOST with ${escapeHtml(view.emotion ?? "")}?`
      : `Which word do you associate LEAST with ${escapeHtml(view.emotion ?? "")}?`;
  const other = kind === "best" ? view.selection.worst : view.selection.best;
  const rows = (view.words ?? [])
    .map((word) => {
      const checked = view.selection[kind] === word ? " checked" : "";
      // picking the same word in both groups is blocked at the input
      const disabled = word === other ? " disabled" : "";
      return `<label class="bws-choice"><input type="radio" name="${kind}" value="${escapeHtml(
        word,
      )}"${checked}${disabled}><span>${escapeHtml(word)}</span></label>`;
    })
    .join("\n    ");
  return `<fieldset class="bws-group" data-kind="${kind}">
    <legend>${label}</legend>
    ${rows}
  </fieldset>`;
}

export function renderTuple(view: FlowView): string {
  const { best, worst } = view.selection;
  const ready = !!best && !!worst && best !== worst;
  const busy = view.state === "submitting";
  const error = view.error
    ? `<p class="bws-error" role="alert">${escapeHtml(view.error)}</p>`
    : "";
  return `<div class="bws-tuple">
  ${renderProgress(view.index ?? 0, view.total ?? 0)}
  ${error}
  ${renderChoiceGroup("best", view)}
  ${renderChoiceGroup("worst", view)}
  <button type="button" class="bws-submit"${ready && !busy ? "" : " disabled"}>${
    busy ? "Submitting..." : "Submit"
  }</button>
</div>`;
}

export function renderDemographicsForm(): string {
  return `<form class="bws-demographics">
  <label>Participant code <input type="text" name="annotator_id" required></label>
  <label>Age <input type="number" name="age" min="18" max="99"></label>
  <label>Gender <input type="text" name="gender"></label>
  <label>Education <input type="text" name="education"></label>
  <label class="bws-native"><input type="checkbox" name="native_speaker"> Native English speaker</label>
  <button type="submit">Start</button>
</form>`;
}

export function renderComplete(sessionCode: string): string {
  return `<div class="bws-complete">
  <h2>All done, thank you!</h2>
  <p>Your completion code:</p>
  <p class="bws-code">${escapeHtml(sessionCode)}</p>
</div>`;
}

export function renderClosed(): string {
  return `<div class="bws-closed">
  <h2>Study closed</h2>
  <p>All annotation slots for this study are taken. Thanks for your interest.</p>
</div>`;
}

export function renderFailed(message: string): string {
  return `<div class="bws-failed">
  <p class="bws-error" role="alert">${escapeHtml(message)}</p>
  <button type="button" class="bws-retry">Try again</button>
</div>`;
}

export function renderLoading(): string {
  return `<p class="bws-loading">Loading...</p>`;
}

export function render(view: FlowView): string {
  switch (view.state) {
    case "idle":
      return renderDemographicsForm();
    case "opening":
    case "loading":
      return renderLoading();
    case "question":
    case "submitting":
      return renderTuple(view);
    case "complete":
      return renderComplete(view.sessionCode ?? "");
    case "closed":
      return renderClosed();
    case "failed":
      return renderFailed(view.error ?? "Something went wrong.");
    default:
      return renderLoading();
  }
}
