// The pairwise comparison screen. Two clips loop side by side; the visitor
// answers Left / Right / Equal / Skip and the answer is posted to the session
// before anything else is fetched. All ordering state lives on the server:
// this screen only displays the queries and, at the end, the ranking exactly
// as the service returns it.

import { ApiClient, ApiError } from "./api.js";
import { ClipPlayer, type TimerHost } from "./clipPlayer.js";
import { renderMockUi } from "./mockUi.js";
import { h, type VNode } from "./vdom.js";
import type { ComparisonQuery, PreferenceChoice, SessionProgress } from "./types.js";

export type ComparisonPhase = "loading" | "comparing" | "complete";

const CHOICES: Array<{ label: PreferenceChoice; text: string }> = [
  { label: "left", text: "Left" },
  { label: "right", text: "Right" },
  { label: "equal", text: "Equal" },
  { label: "skip", text: "Skip" },
];

export class ComparisonScreen {
  phase: ComparisonPhase = "loading";
  query: ComparisonQuery | null = null;
  left: ClipPlayer | null = null;
  right: ClipPlayer | null = null;
  progress: SessionProgress | null = null;
  ranking: string[][] | null = null;
  /** True while an answer or refetch is in flight; further input is ignored. */
  busy = false;
  onUpdate: () => void = () => {};

  private readonly api: ApiClient;
  private readonly host: TimerHost | undefined;

  constructor(api: ApiClient, readonly sessionId: string, host?: TimerHost) {
    this.api = api;
    this.host = host;
  }

  async start(): Promise<void> {
    await this.resync();
  }

  /**
   * Submit the visitor's choice for the current query. Returns false when the
   * input was ignored (already busy, not comparing) or when the server
   * reported the query as stale, in which case the screen silently refetches
   * the current query instead of surfacing an error.
   */
  async choose(label: PreferenceChoice): Promise<boolean> {
    if (this.busy || this.phase !== "comparing" || this.query === null) return false;
    this.busy = true;
    try {
      try {
        await this.api.postAnswer(this.sessionId, this.query.query_id, label);
      } catch (err) {
        if (err instanceof ApiError && err.code === "query_mismatch") {
          await this.resync();
          return false;
        }
        throw err;
      }
      await this.resync();
      return true;
    } finally {
      this.busy = false;
    }
  }

  private stopPlayers(): void {
    this.left?.pause();
    this.right?.pause();
    this.left = null;
    this.right = null;
  }

  /**
   * Pull the current query (or final ranking) and progress from the service.
   * Requests are strictly sequential: the screen never has more than one
   * call to the service in flight.
   */
  private async resync(): Promise<void> {
    const next = await this.api.nextQuery(this.sessionId);
    this.progress = await this.api.progress(this.sessionId);
    if (next.complete) {
      this.stopPlayers();
      this.query = null;
      this.ranking = next.ranking ?? [];
      this.phase = "complete";
    } else {
      const query = next.query!;
      const leftClip = await this.api.getClip(query.left);
      const rightClip = await this.api.getClip(query.right);
      this.stopPlayers();
      this.left = new ClipPlayer(leftClip, this.host);
      this.right = new ClipPlayer(rightClip, this.host);
      const tick = () => this.onUpdate();
      this.left.onTick = tick;
      this.right.onTick = tick;
      // Both players start at step zero on the same timer host, so the pair
      // loops in lockstep.
      this.left.play();
      this.right.play();
      this.query = query;
      this.phase = "comparing";
    }
    this.onUpdate();
  }

  private renderProgress(): VNode {
    const placed = this.progress?.placed ?? 0;
    const total = this.progress?.total ?? 0;
    const answered = this.progress?.answered ?? 0;
    const pct = total > 0 ? Math.round((100 * placed) / total) : 0;
    return h(
      "header",
      { class: "session-progress" },
      h(
        "div",
        { class: "progress-bar" },
        h("div", { class: "progress-fill", style: `width: ${pct}%` })
      ),
      h("p", { class: "progress-caption" }, `Placed ${placed} of ${total} clips (${answered} answers)`)
    );
  }

  private renderPane(side: "left" | "right", player: ClipPlayer): VNode {
    const step = player.currentStep();
    return h(
      "section",
      { class: `clip-pane clip-${side}`, "data-clip": player.clip.id, "data-step": String(player.cursor) },
      renderMockUi(step.state, player.clip.domain)
    );
  }

  private renderButtons(): VNode {
    return h(
      "div",
      { class: "choices" },
      ...CHOICES.map(({ label, text }) => {
        const attrs: Record<string, string> = { class: "choice", "data-label": label };
        if (this.busy) attrs["disabled"] = "disabled";
        return h("button", attrs, text);
      })
    );
  }

  render(): VNode {
    if (this.phase === "loading") {
      return h("section", { class: "comparison loading" }, h("p", {}, "Loading session"));
    }
    if (this.phase === "complete") {
      const buckets = this.ranking ?? [];
      return h(
        "section",
        { class: "comparison complete" },
        h("h2", {}, "Ranking complete"),
        h("p", { class: "progress-caption" }, `${this.progress?.answered ?? 0} answers recorded`),
        h(
          "ol",
          { class: "ranking" },
          ...buckets.map((bucket, i) =>
            h(
              "li",
              { class: "ranking-bucket", "data-rank": String(i + 1), "data-clips": bucket.join(",") },
              bucket.join(" = ")
            )
          )
        )
      );
    }
    return h(
      "section",
      { class: "comparison comparing" },
      this.renderProgress(),
      h("div", { class: "panes" }, this.renderPane("left", this.left!), this.renderPane("right", this.right!)),
      this.renderButtons()
    );
  }
}
