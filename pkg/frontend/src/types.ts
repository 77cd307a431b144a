// Shapes of the retrieval service's JSON payloads. The UI renders these
// verbatim; scores and percentages are never recomputed client-side.

export type JobState = "queued" | "ingesting" | "comparing" | "complete" | "failed";

export interface JobProgress {
  done: number;
  total: number;
}

export interface JobRecord {
  job_id: string;
  state: JobState;
  progress: JobProgress | null;
  error: string | null;
  timings: {
    ingest_s: number;
    compare_s: number;
    analyze_s: number;
    mean_pair_s: number;
  } | null;
  corpus_id: string | null;
  created_at: string;
  request: {
    keywords: string[];
    method: string;
    threshold: number | null;
    source: string;
    max_posts: number;
    image_url: string | null;
  };
}

export interface ResultPost {
  post_id: string;
  text: string;
  created_at: string;
  is_retweet: boolean;
  username: string;
  display_name: string;
  profile_url: string;
}

export interface ResultEntry {
  sha256: string;
  score: number;
  image_url: string;
  posts: ResultPost[];
}

export interface ResultsPayload {
  query: string;
  corpus_id: string;
  method: string;
  threshold: number;
  corpus_size: number;
  retrieved: number;
  compared: number;
  skipped: number;
  reduction_pct: number;
  timings: { compare_s: number; mean_pair_s: number };
  entries: ResultEntry[];
}

export interface UserRow {
  username: string;
  display_name: string;
  description: string;
  location: string;
  profile_image_url: string;
  profile_url: string;
  post_count: number;
}

export interface UsersPayload {
  users: UserRow[];
  post_count: number;
}

export interface SentimentPayload {
  pos_pct: number;
  neg_pct: number;
  neu_pct: number;
  post_count: number;
}

export interface RetweetsPayload {
  retweet_pct: number;
  post_count: number;
}
