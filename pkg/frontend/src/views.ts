// DOM renderers for each panel. Render functions replace the panel's
// contents from an API payload and nothing else; all numbers shown come
// straight from the service.

import { donutChart, splitBar } from "./charts.js";
import type {
  JobRecord,
  ResultsPayload,
  RetweetsPayload,
  SentimentPayload,
  UsersPayload,
} from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderStatus(host: HTMLElement, job: JobRecord): void {
  host.replaceChildren();
  const badge = el("span", `status-badge status-${job.state}`, job.state);
  host.appendChild(badge);

  if (job.state === "comparing" && job.progress) {
    const { done, total } = job.progress;
    const wrap = el("div", "progress");
    const bar = el("div", "progress-bar");
    const pct = total > 0 ? (100 * done) / total : 0;
    bar.style.width = `${pct}%`;
    bar.setAttribute("data-done", String(done));
    bar.setAttribute("data-total", String(total));
    wrap.appendChild(bar);
    host.appendChild(wrap);
    host.appendChild(el("span", "progress-text", `${done} / ${total} compared`));
  }
  if (job.state === "failed" && job.error) {
    host.appendChild(el("div", "job-error", job.error));
  }
  if (job.state === "complete" && job.timings) {
    host.appendChild(el(
      "span", "timings",
      `ingest ${job.timings.ingest_s.toFixed(2)}s, compare ${job.timings.compare_s.toFixed(2)}s ` +
      `(${job.timings.mean_pair_s.toFixed(3)}s/pair), analyze ${job.timings.analyze_s.toFixed(2)}s`,
    ));
  }
}

export function renderResults(host: HTMLElement, payload: ResultsPayload,
                              imageSrc: (url: string) => string): void {
  host.replaceChildren();

  const headline = el("div", "reduction-headline");
  headline.appendChild(el("strong", "reduction-figure",
                          `${payload.reduction_pct.toFixed(1)}%`));
  headline.appendChild(el("span", undefined,
                          ` search space reduction - ${payload.retrieved} of ` +
                          `${payload.corpus_size} images retrieved (${payload.method})`));
  host.appendChild(headline);

  const grid = el("div", "results-grid");
  for (const entry of payload.entries) {
    const card = el("figure", "result-card");
    const img = el("img", "result-thumb");
    img.src = imageSrc(entry.image_url);
    img.alt = `retrieved image ${entry.sha256.slice(0, 12)}`;
    card.appendChild(img);
    const caption = el("figcaption");
    caption.appendChild(el("span", "score", `score ${entry.score.toFixed(3)}`));
    for (const post of entry.posts) {
      const postLine = el("div", "post-line");
      const author = el("a", "author", `@${post.username}`);
      author.href = post.profile_url || "#";
      postLine.appendChild(author);
      postLine.appendChild(el("span", "post-text", ` ${post.text}`));
      caption.appendChild(postLine);
    }
    card.appendChild(caption);
    grid.appendChild(card);
  }
  host.appendChild(grid);
  if (payload.entries.length === 0) {
    host.appendChild(el("p", "empty", "No similar images retrieved."));
  }
}

export function renderUsers(host: HTMLElement, payload: UsersPayload): void {
  host.replaceChildren();
  if (payload.users.length === 0) {
    host.appendChild(el("p", "empty", "No propagating users."));
    return;
  }
  const table = el("table", "users-table");
  const head = el("tr");
  for (const col of ["user", "location", "posts", "profile"]) {
    head.appendChild(el("th", undefined, col));
  }
  table.appendChild(head);
  for (const user of payload.users) {
    const row = el("tr");
    row.dataset.username = user.username;
    const nameCell = el("td");
    nameCell.appendChild(el("strong", undefined, user.display_name || user.username));
    nameCell.appendChild(el("div", "muted", `@${user.username}`));
    row.appendChild(nameCell);
    row.appendChild(el("td", undefined, user.location));
    row.appendChild(el("td", "count", String(user.post_count)));
    const linkCell = el("td");
    if (user.profile_url) {
      const link = el("a", undefined, "open");
      link.href = user.profile_url;
      linkCell.appendChild(link);
    }
    row.appendChild(linkCell);
    table.appendChild(row);
  }
  host.appendChild(table);
}

const SENTIMENT_COLORS = { positive: "#4caf78", negative: "#e2574c", neutral: "#c9cdd6" };

export function renderSentiment(host: HTMLElement, payload: SentimentPayload): void {
  host.replaceChildren();
  const donut = donutChart([
    { label: "positive", value: payload.pos_pct, color: SENTIMENT_COLORS.positive },
    { label: "negative", value: payload.neg_pct, color: SENTIMENT_COLORS.negative },
    { label: "neutral", value: payload.neu_pct, color: SENTIMENT_COLORS.neutral },
  ]);
  donut.classList.add("sentiment-donut");
  host.appendChild(donut);
  const legend = el("ul", "legend");
  for (const [label, value] of [["positive", payload.pos_pct],
                                ["negative", payload.neg_pct],
                                ["neutral", payload.neu_pct]] as const) {
    legend.appendChild(el("li", `legend-${label}`, `${label}: ${value.toFixed(1)}%`));
  }
  host.appendChild(legend);
}

export function renderRetweets(host: HTMLElement, payload: RetweetsPayload): void {
  host.replaceChildren();
  const bar = splitBar(payload.retweet_pct, "retweets", "original posts");
  bar.classList.add("retweet-bar");
  host.appendChild(bar);
  host.appendChild(el(
    "p", "retweet-text",
    `${payload.retweet_pct.toFixed(1)}% of ${payload.post_count} posts are retweets`,
  ));
}

export function renderErrorBanner(host: HTMLElement, message: string,
                                  onDismiss: () => void): void {
  const banner = el("div", "error-banner");
  banner.appendChild(el("span", undefined, message));
  const close = el("button", "dismiss", "dismiss");
  close.addEventListener("click", () => {
    banner.remove();
    onDismiss();
  });
  banner.appendChild(close);
  host.appendChild(banner);
}
