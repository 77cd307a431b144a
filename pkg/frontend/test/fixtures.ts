// Recorded payloads from the retrieval service (fixture event: 8 copies of
// the query among 20 corpus images). Contract tests render from these with
// no live backend.

import type {
  JobRecord,
  ResultsPayload,
  RetweetsPayload,
  SentimentPayload,
  UsersPayload,
} from "../src/types.js";

export const JOB_ID = "e79c0b54-4a7e-4f0a-9e53-2f6f1cf0a111";

const request = {
  keywords: ["riot"],
  method: "improved-orb",
  threshold: 0.35,
  source: "http://127.0.0.1:9810/feed",
  max_posts: 200,
  image_url: null,
};

export const jobQueued: JobRecord = {
  job_id: JOB_ID,
  state: "queued",
  progress: null,
  error: null,
  timings: null,
  corpus_id: null,
  created_at: "2026-03-02T09:15:00Z",
  request,
};

export const jobComparing: JobRecord = {
  ...jobQueued,
  state: "comparing",
  corpus_id: "riot-5f2c91aa",
  progress: { done: 3, total: 20 },
};

export const jobComplete: JobRecord = {
  ...jobQueued,
  state: "complete",
  corpus_id: "riot-5f2c91aa",
  progress: { done: 20, total: 20 },
  timings: { ingest_s: 1.82, compare_s: 4.31, analyze_s: 0.02, mean_pair_s: 0.215 },
};

export const results: ResultsPayload = {
  query: "query.png",
  corpus_id: "riot-5f2c91aa",
  method: "improved-orb",
  threshold: 0.35,
  corpus_size: 20,
  retrieved: 8,
  compared: 20,
  skipped: 0,
  reduction_pct: 60.0,
  timings: { compare_s: 4.31, mean_pair_s: 0.215 },
  entries: [
    {
      sha256: "a61f09".padEnd(64, "0"),
      score: 1.0,
      image_url: "/images/" + "a61f09".padEnd(64, "0"),
      posts: [{
        post_id: "post-0", text: "shameful riot footage", created_at: "2026-03-01T10:00:00Z",
        is_retweet: true, username: "alice", display_name: "Alice",
        profile_url: "https://example.org/alice",
      }],
    },
    {
      sha256: "b72e11".padEnd(64, "0"),
      score: 0.9,
      image_url: "/images/" + "b72e11".padEnd(64, "0"),
      posts: [{
        post_id: "post-3", text: "same picture cropped", created_at: "2026-03-01T10:04:00Z",
        is_retweet: false, username: "bob", display_name: "Bob",
        profile_url: "https://example.org/bob",
      }],
    },
    {
      sha256: "c83f22".padEnd(64, "0"),
      score: 0.77,
      image_url: "/images/" + "c83f22".padEnd(64, "0"),
      posts: [{
        post_id: "post-7", text: "now with a caption", created_at: "2026-03-01T10:11:00Z",
        is_retweet: true, username: "carol", display_name: "Carol",
        profile_url: "https://example.org/carol",
      }],
    },
  ],
};

export const users: UsersPayload = {
  users: [
    { username: "alice", display_name: "Alice", description: "reporter",
      location: "Delhi", profile_image_url: "", profile_url: "https://example.org/alice",
      post_count: 4 },
    { username: "bob", display_name: "Bob", description: "",
      location: "Mumbai", profile_image_url: "", profile_url: "https://example.org/bob",
      post_count: 2 },
    { username: "carol", display_name: "Carol", description: "",
      location: "", profile_image_url: "", profile_url: "https://example.org/carol",
      post_count: 1 },
  ],
  post_count: 7,
};

export const sentiment: SentimentPayload = {
  pos_pct: 14.3, neg_pct: 28.6, neu_pct: 57.1, post_count: 7,
};

export const sentimentAllNeutral: SentimentPayload = {
  pos_pct: 0, neg_pct: 0, neu_pct: 100, post_count: 7,
};

export const retweets: RetweetsPayload = { retweet_pct: 71.4, post_count: 7 };
