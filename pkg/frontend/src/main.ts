/**
 * Browser entry point: mounts the annotation flow into #app.
 *
 * Configuration comes from data attributes on the mount node:
 *   <div id="app" data-service-url="http://localhost:8765" data-study-id="abc123"></div>
 */

import { ApiClient, Demographics } from "./api.js";
import { SessionFlow } from "./flow.js";
import { render } from "./render.js";

function readDemographics(form: HTMLFormElement): {
  annotatorId: string;
  demographics: Demographics;
} {
  const data = new FormData(form);
  const annotatorId = String(data.get("annotator_id") ?? "").trim();
  const demographics: Demographics = {
    native_speaker: data.get("native_speaker") !== null,
  };
  const age = String(data.get("age") ?? "").trim();
  if (age) demographics.age = Number(age);
  const gender = String(data.get("gender") ?? "").trim();
  if (gender) demographics.gender = gender;
  const education = String(data.get("education") ?? "").trim();
  if (education) demographics.education = education;
  return { annotatorId, demographics };
}

export function mount(root: HTMLElement): void {
  const serviceUrl = root.dataset.serviceUrl ?? "";
  const studyId = root.dataset.studyId ?? "";
  if (!serviceUrl || !studyId) {
    root.innerHTML = "<p>Missing data-service-url or data-study-id.</p>";
    return;
  }

  const flow = new SessionFlow(new ApiClient(serviceUrl), studyId);

  const paint = (): void => {
    root.innerHTML = render(flow.view());
  };

  root.addEventListener("submit", (event) => {
    const form = event.target;
    if (!(form instanceof HTMLFormElement)) return;
    event.preventDefault();
    const { annotatorId, demographics } = readDemographics(form);
    if (!annotatorId) return;
    void flow.start(annotatorId, demographics).then(paint);
    paint();
  });

  root.addEventListener("change", (event) => {
    const input = event.target;
    if (!(input instanceof HTMLInputElement) || input.type !== "radio") return;
    const kind = input.name === "best" ? "best" : input.name === "worst" ? "worst" : null;
    if (!kind) return;
    flow.select(kind, input.value);
    paint();
  });

  root.addEventListener("click", (event) => {
    const target = event.target;
    if (!(target instanceof HTMLElement)) return;
    if (target.classList.contains("bws-submit")) {
      void flow.submit().then(paint);
      paint();
    } else if (target.classList.contains("bws-retry")) {
      void flow.retry().then(paint);
      paint();
    }
  });

  paint();
}

const app = typeof document === "undefined" ? null : document.getElementById("app");
if (app) mount(app);
