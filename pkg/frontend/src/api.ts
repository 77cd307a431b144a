// Thin typed client over the job service HTTP API.

import type {
  JobRecord,
  ResultsPayload,
  RetweetsPayload,
  SentimentPayload,
  UsersPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export interface JobSubmission {
  keywords: string;
  method: string;
  threshold: number | null;
  source?: string;
  imageFile?: File | null;
  imageUrl?: string;
}

export class ApiClient {
  constructor(public baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await fetch(this.baseUrl + path, init);
    if (!res.ok) {
      let detail = `${res.status}`;
      try {
        const body = (await res.json()) as { error?: string };
        if (body.error) detail = body.error;
      } catch {
        // non-JSON error body: keep the status code
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  async submitJob(job: JobSubmission): Promise<{ job_id: string }> {
    if (job.imageFile) {
      const form = new FormData();
      form.append("keywords", job.keywords);
      form.append("method", job.method);
      if (job.threshold !== null) form.append("threshold", String(job.threshold));
      if (job.source) form.append("source", job.source);
      form.append("image", job.imageFile);
      return this.request("/jobs", { method: "POST", body: form });
    }
    return this.request("/jobs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        keywords: job.keywords,
        method: job.method,
        threshold: job.threshold,
        source: job.source || undefined,
        image_url: job.imageUrl,
      }),
    });
  }

  getJob(id: string): Promise<JobRecord> {
    return this.request(`/jobs/${id}`);
  }

  getResults(id: string): Promise<ResultsPayload> {
    return this.request(`/jobs/${id}/results`);
  }

  getUsers(id: string): Promise<UsersPayload> {
    return this.request(`/jobs/${id}/users`);
  }

  getSentiment(id: string): Promise<SentimentPayload> {
    return this.request(`/jobs/${id}/sentiment`);
  }

  getRetweets(id: string): Promise<RetweetsPayload> {
    return this.request(`/jobs/${id}/retweets`);
  }

  imageSrc(imageUrl: string): string {
    return this.baseUrl + imageUrl;
  }
}
