// The live demo application participants actually use. Every navigation
// event asks the service what the interface should look like next; under the
// non-adaptive technique that is always the default configuration, under the
// adaptive technique it is the trained agent's next step from the current
// state. The client applies whatever the service returns and keeps no policy
// of its own.

import { ApiClient } from "./api.js";
import { renderMockUi, navSections } from "./mockUi.js";
import { h, type VNode } from "./vdom.js";
import { configSlug, DEFAULT_CONFIG, type Domain, type Technique, type UiConfig } from "./types.js";

export class DemoApp {
  config: UiConfig = DEFAULT_CONFIG;
  /** Navigation trail, newest last. */
  visited: string[] = [];
  busy = false;
  onUpdate: () => void = () => {};

  private readonly api: ApiClient;

  constructor(
    api: ApiClient,
    readonly userId: string,
    readonly domain: Domain,
    readonly technique: Technique
  ) {
    this.api = api;
  }

  /** Sections a visitor can navigate to in this domain. */
  sections(): string[] {
    return navSections(this.domain);
  }

  get currentSection(): string {
    return this.visited[this.visited.length - 1] ?? this.sections()[0]!;
  }

  /**
   * Record a navigation event and apply the configuration the service
   * prescribes for the state the visitor is now in.
   */
  async navigate(section: string): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      this.visited.push(section);
      const res = await this.api.adaptedUi(
        this.userId,
        this.domain,
        this.technique,
        configSlug(this.config)
      );
      this.config = res.next_config;
    } finally {
      this.busy = false;
    }
    this.onUpdate();
  }

  render(): VNode {
    return h(
      "div",
      { class: `demo demo-${this.technique}`, "data-config": configSlug(this.config) },
      h(
        "header",
        { class: "demo-toolbar" },
        h("span", { class: "demo-technique" }, `technique: ${this.technique}`),
        h("span", { class: "demo-section" }, `section: ${this.currentSection}`)
      ),
      renderMockUi(this.config, this.domain)
    );
  }
}
