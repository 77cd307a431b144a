// Application wiring: the query form submits a job, the poll loop drives
// the status panel, and completion fans out into the four analysis panels.
// The only state that survives a reload is the job id in the URL hash
// (#/jobs/<id>); everything else is re-fetched from the service.

import { ApiClient, ApiError } from "./api.js";
import {
  renderErrorBanner,
  renderResults,
  renderRetweets,
  renderSentiment,
  renderStatus,
  renderUsers,
} from "./views.js";

export interface AppOptions {
  pollMs?: number;
  pollMaxMs?: number;
}

export const METHODS = ["histogram", "daisy", "orb", "improved-orb", "cnn"];

// slider domain per method polarity (server holds the real defaults)
const THRESHOLD_RANGES: Record<string, { min: number; max: number; step: number; value: number }> = {
  histogram: { min: 0.05, max: 0.95, step: 0.05, value: 0.4 },
  daisy: { min: 0.01, max: 0.2, step: 0.01, value: 0.06 },
  orb: { min: 5, max: 80, step: 1, value: 29 },
  "improved-orb": { min: 0.05, max: 0.95, step: 0.05, value: 0.35 },
  cnn: { min: 0.05, max: 0.95, step: 0.05, value: 0.5 },
};

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class App {
  readonly api: ApiClient;
  private pollMs: number;
  private pollMaxMs: number;
  private currentJob: string | null = null;
  private pollToken = 0;

  constructor(private root: HTMLElement, api: ApiClient, options: AppOptions = {}) {
    this.api = api;
    this.pollMs = options.pollMs ?? 1000;
    this.pollMaxMs = options.pollMaxMs ?? 5000;
    this.renderShell();
    window.addEventListener("hashchange", () => this.onHashChange());
  }

  // --- shell ---

  private renderShell(): void {
    this.root.innerHTML = `
      <header><h1>image spread search</h1></header>
      <div id="banners"></div>
      <form id="job-form" class="card">
        <label>keywords
          <input name="keywords" id="f-keywords" placeholder="riot, cartoon" required>
        </label>
        <label>query image (upload)
          <input type="file" id="f-image" accept="image/png,image/jpeg">
        </label>
        <label>or image URL
          <input id="f-image-url" placeholder="https://...">
        </label>
        <label>feed source (optional override)
          <input id="f-source" placeholder="server default">
        </label>
        <label>method
          <select id="f-method"></select>
        </label>
        <label>threshold
          <input type="range" id="f-threshold">
          <output id="f-threshold-value"></output>
        </label>
        <button type="submit" id="f-submit">search</button>
      </form>
      <section class="card"><h2>job</h2><div id="panel-status"></div></section>
      <section class="card"><h2>results</h2><div id="panel-results"></div></section>
      <section class="card"><h2>propagating users</h2><div id="panel-users"></div></section>
      <section class="card"><h2>sentiment</h2><div id="panel-sentiment"></div></section>
      <section class="card"><h2>tweets vs retweets</h2><div id="panel-retweets"></div></section>
    `;
    const select = this.el<HTMLSelectElement>("#f-method");
    for (const method of METHODS) {
      const option = document.createElement("option");
      option.value = method;
      option.textContent = method;
      select.appendChild(option);
    }
    select.value = "improved-orb";
    select.addEventListener("change", () => this.syncThresholdSlider());
    this.syncThresholdSlider();

    const slider = this.el<HTMLInputElement>("#f-threshold");
    slider.addEventListener("input", () => {
      this.el<HTMLOutputElement>("#f-threshold-value").value = slider.value;
    });

    this.el<HTMLFormElement>("#job-form").addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.submit();
    });
  }

  private syncThresholdSlider(): void {
    const method = this.el<HTMLSelectElement>("#f-method").value;
    const range = THRESHOLD_RANGES[method];
    const slider = this.el<HTMLInputElement>("#f-threshold");
    slider.min = String(range.min);
    slider.max = String(range.max);
    slider.step = String(range.step);
    slider.value = String(range.value);
    this.el<HTMLOutputElement>("#f-threshold-value").value = slider.value;
  }

  private el<T extends HTMLElement>(selector: string): T {
    const node = this.root.querySelector<T>(selector);
    if (!node) throw new Error(`missing element ${selector}`);
    return node;
  }

  private banner(message: string): void {
    renderErrorBanner(this.el("#banners"), message, () => undefined);
  }

  private setFormEnabled(enabled: boolean): void {
    this.el<HTMLButtonElement>("#f-submit").disabled = !enabled;
  }

  // --- job flow ---

  async submit(): Promise<void> {
    const fileInput = this.el<HTMLInputElement>("#f-image");
    const threshold = Number(this.el<HTMLInputElement>("#f-threshold").value);
    try {
      this.setFormEnabled(false);
      const { job_id } = await this.api.submitJob({
        keywords: this.el<HTMLInputElement>("#f-keywords").value,
        method: this.el<HTMLSelectElement>("#f-method").value,
        threshold,
        source: this.el<HTMLInputElement>("#f-source").value || undefined,
        imageFile: fileInput.files?.[0] ?? null,
        imageUrl: this.el<HTMLInputElement>("#f-image-url").value || undefined,
      });
      window.location.hash = `#/jobs/${job_id}`;
      await this.watchJob(job_id);
    } catch (err) {
      this.setFormEnabled(true);
      this.banner(err instanceof Error ? err.message : String(err));
    }
  }

  onHashChange(): Promise<void> | undefined {
    const match = window.location.hash.match(/^#\/jobs\/([\w-]+)$/);
    if (match && match[1] !== this.currentJob) {
      return this.watchJob(match[1]);
    }
    return undefined;
  }

  async watchJob(jobId: string): Promise<void> {
    this.currentJob = jobId;
    const token = ++this.pollToken;
    const statusHost = this.el<HTMLElement>("#panel-status");
    let delay = this.pollMs;
    try {
      for (;;) {
        const job = await this.api.getJob(jobId);
        if (token !== this.pollToken) return; // superseded by a newer job
        renderStatus(statusHost, job);
        if (job.state === "complete") {
          await this.loadPanels(jobId);
          this.setFormEnabled(true);
          return;
        }
        if (job.state === "failed") {
          this.setFormEnabled(true);
          return;
        }
        await sleep(delay);
        delay = Math.min(delay * 1.5, this.pollMaxMs); // backoff
      }
    } catch (err) {
      if (token !== this.pollToken) return;
      this.setFormEnabled(true);
      if (err instanceof ApiError && err.status === 409) {
        // artifacts not ready yet: resume polling
        await sleep(delay);
        return this.watchJob(jobId);
      }
      this.banner(err instanceof Error ? err.message : String(err));
    }
  }

  async loadPanels(jobId: string): Promise<void> {
    const [results, users, sentiment, retweets] = await Promise.all([
      this.api.getResults(jobId),
      this.api.getUsers(jobId),
      this.api.getSentiment(jobId),
      this.api.getRetweets(jobId),
    ]);
    renderResults(this.el("#panel-results"), results, (u) => this.api.imageSrc(u));
    renderUsers(this.el("#panel-users"), users);
    renderSentiment(this.el("#panel-sentiment"), sentiment);
    renderRetweets(this.el("#panel-retweets"), retweets);
  }

  /** Entry point: resume a job from the URL hash if one is present. */
  start(): Promise<void> | undefined {
    return this.onHashChange();
  }
}
