// Shared test doubles: a deterministic in-memory stand-in for the service
// (implements the documented JSON contract over the injectable fetch shape)
// plus a manual timer host and clip fixtures.

import type { FetchLike, RequestOptions } from "../src/api.js";
import type { TimerHost } from "../src/clipPlayer.js";
import {
  allConfigs,
  ATTRIBUTES,
  configSlug,
  DEFAULT_CONFIG,
  parseConfigSlug,
  type Clip,
  type ComparisonQuery,
  type Domain,
  type UiConfig,
} from "../src/types.js";

export class FakeTimerHost implements TimerHost {
  private nextId = 1;
  private readonly intervals = new Map<number, { fn: () => void; ms: number }>();

  setInterval(fn: () => void, ms: number): number {
    const id = this.nextId;
    this.nextId += 1;
    this.intervals.set(id, { fn, ms });
    return id;
  }

  clearInterval(id: number): void {
    this.intervals.delete(id);
  }

  get activeCount(): number {
    return this.intervals.size;
  }

  registeredMs(): number[] {
    return [...this.intervals.values()].map((e) => e.ms);
  }

  /** Fire every active interval callback `times` times. */
  fire(times = 1): void {
    for (let n = 0; n < times; n += 1) {
      for (const { fn } of [...this.intervals.values()]) fn();
    }
  }
}

/** Clips with constant per-clip state; distinct configs across clips. */
export function makeClips(domain: Domain, count: number): Clip[] {
  const configs = allConfigs();
  const clips: Clip[] = [];
  for (let i = 0; i < count; i += 1) {
    const state = configs[(i * 7) % configs.length]!;
    clips.push({
      id: `${domain}-clip-${String(i).padStart(3, "0")}`,
      domain,
      steps: Array.from({ length: 8 }, () => ({ state, action: { kind: "noop" as const } })),
      render_hint_ms_per_step: 500,
    });
  }
  return clips;
}

/** Distinct utilities, deliberately not monotone in clip index. */
export function distinctUtilities(clips: Clip[]): Map<string, number> {
  const utils = new Map<string, number>();
  clips.forEach((clip, i) => utils.set(clip.id, (i * 37) % 101));
  return utils;
}

interface PendingQuery extends ComparisonQuery {
  candidateSide: "left" | "right";
  mid: number;
}

function jsonBody(init?: RequestOptions): unknown {
  return init?.body ? JSON.parse(init.body) : undefined;
}

interface RoutedResponse {
  status: number;
  body: unknown;
}

export interface RecordedRequest {
  method: string;
  path: string;
  search: Record<string, string>;
  body: unknown;
}

/**
 * In-memory ranking session speaking the service's JSON contract. Placement
 * uses binary insertion over ranked buckets, driven purely by the answers the
 * client posts; left/right assignment is shuffled deterministically so tests
 * catch orientation mix-ups.
 */
export class FakeRankServer {
  readonly sessionId: string;
  readonly clips = new Map<string, Clip>();
  buckets: string[][] = [];
  answered = 0;
  /** When set, the next posted answer is rejected as stale (409). */
  rejectNextAnswer = false;

  readonly requests: RecordedRequest[] = [];
  concurrent = 0;
  maxConcurrent = 0;

  private queue: string[];
  private candidate: string | null = null;
  private lo = 0;
  private hi = 0;
  private current: PendingQuery | null = null;
  private queryCounter = 0;
  private seedState: number;
  private readonly total: number;

  constructor(sessionId: string, clips: Clip[], seed = 7) {
    if (clips.length < 2) throw new Error("need at least two clips");
    this.sessionId = sessionId;
    for (const clip of clips) this.clips.set(clip.id, clip);
    this.total = clips.length;
    this.seedState = seed;
    const ids = clips.map((c) => c.id);
    this.buckets = [[ids[0]!]];
    this.queue = ids.slice(1);
    this.advanceCandidate();
  }

  get complete(): boolean {
    return this.candidate === null && this.queue.length === 0;
  }

  get placed(): number {
    return this.buckets.reduce((n, bucket) => n + bucket.length, 0);
  }

  private nextRand(): number {
    // MINSTD: multiplier small enough to stay exact in double precision.
    this.seedState = (this.seedState * 48271) % 2147483647;
    return this.seedState;
  }

  private advanceCandidate(): void {
    this.candidate = this.queue.shift() ?? null;
    if (this.candidate === null) {
      this.current = null;
      return;
    }
    this.lo = 0;
    this.hi = this.buckets.length;
    this.makeQuery();
  }

  private makeQuery(): void {
    if (this.lo === this.hi) {
      this.buckets.splice(this.lo, 0, [this.candidate!]);
      this.advanceCandidate();
      return;
    }
    const mid = (this.lo + this.hi) >> 1;
    const pivot = this.buckets[mid]![0]!;
    const swap = this.nextRand() % 2 === 1;
    this.queryCounter += 1;
    this.current = {
      query_id: `q-${this.queryCounter}`,
      left: swap ? pivot : this.candidate!,
      right: swap ? this.candidate! : pivot,
      candidateSide: swap ? "right" : "left",
      mid,
    };
  }

  currentQuery(): ComparisonQuery | null {
    if (this.current === null) return null;
    const { query_id, left, right } = this.current;
    return { query_id, left, right };
  }

  private nextResponse(): RoutedResponse {
    if (this.complete) {
      return {
        status: 200,
        body: { complete: true, query: null, ranking: this.buckets.map((b) => [...b]) },
      };
    }
    return { status: 200, body: { complete: false, query: this.currentQuery() } };
  }

  private progressResponse(): RoutedResponse {
    return {
      status: 200,
      body: { placed: this.placed, total: this.total, answered: this.answered, complete: this.complete },
    };
  }

  private answerResponse(body: unknown): RoutedResponse {
    const { query_id, label } = body as { query_id: string; label: string };
    if (this.complete || this.current === null) {
      return { status: 410, body: { code: "session_complete", message: "session already complete" } };
    }
    if (this.rejectNextAnswer) {
      this.rejectNextAnswer = false;
      return { status: 409, body: { code: "query_mismatch", message: "stale query" } };
    }
    if (query_id !== this.current.query_id) {
      return { status: 409, body: { code: "query_mismatch", message: `expected ${this.current.query_id}` } };
    }
    this.answered += 1;
    const { mid, candidateSide } = this.current;
    if (label === "equal" || label === "skip") {
      this.buckets[mid]!.push(this.candidate!);
      this.advanceCandidate();
    } else {
      const candidateWins = label === candidateSide;
      if (candidateWins) this.hi = mid;
      else this.lo = mid + 1;
      this.makeQuery();
    }
    return {
      status: 200,
      body: {
        accepted: true,
        complete: this.complete,
        progress: { placed: this.placed, total: this.total, answered: this.answered },
      },
    };
  }

  private route(method: string, path: string, body: unknown): RoutedResponse {
    const clipMatch = path.match(/^\/clips\/([^/]+)$/);
    if (method === "GET" && clipMatch) {
      const clip = this.clips.get(decodeURIComponent(clipMatch[1]!));
      if (!clip) return { status: 404, body: { code: "unknown_clip", message: "no such clip" } };
      return { status: 200, body: clip };
    }
    const sessionMatch = path.match(/^\/sessions\/([^/]+)\/(next|answers|progress)$/);
    if (sessionMatch) {
      if (decodeURIComponent(sessionMatch[1]!) !== this.sessionId) {
        return { status: 404, body: { code: "unknown_session", message: "no such session" } };
      }
      const tail = sessionMatch[2]!;
      if (tail === "next" && method === "GET") return this.nextResponse();
      if (tail === "progress" && method === "GET") return this.progressResponse();
      if (tail === "answers" && method === "POST") return this.answerResponse(body);
    }
    return { status: 404, body: { code: "not_found", message: `no route for ${method} ${path}` } };
  }

  readonly fetch: FetchLike = async (url, init) => {
    this.concurrent += 1;
    this.maxConcurrent = Math.max(this.maxConcurrent, this.concurrent);
    // Yield so overlapping callers would actually overlap and be counted.
    await new Promise((resolve) => setTimeout(resolve, 0));
    try {
      const parsed = new URL(url);
      const search: Record<string, string> = {};
      parsed.searchParams.forEach((value, key) => {
        search[key] = value;
      });
      const method = init?.method ?? "GET";
      const body = jsonBody(init);
      this.requests.push({ method, path: parsed.pathname, search, body });
      const routed = this.route(method, parsed.pathname, body);
      return { status: routed.status, text: async () => JSON.stringify(routed.body) };
    } finally {
      this.concurrent -= 1;
    }
  };
}

/**
 * Stand-in for GET /users/{id}/ui. Non-adaptive always pins the default
 * configuration; adaptive fixes one attribute per call until the state
 * reaches the target, then reports a no-op.
 */
export class FakeAdaptedUiServer {
  calls = 0;
  readonly requests: RecordedRequest[] = [];

  constructor(private readonly target: UiConfig) {}

  readonly fetch: FetchLike = async (url, init) => {
    await new Promise((resolve) => setTimeout(resolve, 0));
    const parsed = new URL(url);
    const search: Record<string, string> = {};
    parsed.searchParams.forEach((value, key) => {
      search[key] = value;
    });
    this.requests.push({ method: init?.method ?? "GET", path: parsed.pathname, search, body: jsonBody(init) });
    if (!/^\/users\/[^/]+\/ui$/.test(parsed.pathname)) {
      return { status: 404, text: async () => JSON.stringify({ code: "not_found", message: "no route" }) };
    }
    this.calls += 1;
    const technique = search["technique"];
    const state = parseConfigSlug(search["state"]!);
    let body: unknown;
    if (technique === "na") {
      body = { action: { kind: "noop" }, next_config: DEFAULT_CONFIG };
    } else {
      const pending = ATTRIBUTES.find((name) => state[name] !== this.target[name]);
      if (pending === undefined) {
        body = { action: { kind: "noop" }, next_config: state };
      } else {
        const next = { ...state, [pending]: this.target[pending] };
        body = {
          action: { kind: "assign", attribute: pending, value: this.target[pending] },
          next_config: next,
        };
      }
    }
    return { status: 200, text: async () => JSON.stringify(body) };
  };
}

export function slugTrail(configs: UiConfig[]): string[] {
  return configs.map(configSlug);
}
