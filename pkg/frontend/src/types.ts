// Shared types mirroring the service's JSON contract. Every attribute value
// and payload shape here matches what the HTTP endpoints accept and return;
// nothing in the client invents state the server does not know about.

export type Domain = "courses" | "trips";
export const DOMAINS: readonly Domain[] = ["courses", "trips"];

export type Layout = "list" | "grid2" | "grid3" | "grid4" | "grid5";
export type FontSize = "small" | "medium" | "large";
export type Density = "detailed" | "condensed";
export type Theme = "light" | "dark";
export type Widget = "list_menu" | "dropdown";

export const LAYOUTS: readonly Layout[] = ["list", "grid2", "grid3", "grid4", "grid5"];
export const FONT_SIZES: readonly FontSize[] = ["small", "medium", "large"];
export const DENSITIES: readonly Density[] = ["detailed", "condensed"];
export const THEMES: readonly Theme[] = ["light", "dark"];
export const WIDGETS: readonly Widget[] = ["list_menu", "dropdown"];

export interface UiConfig {
  layout: Layout;
  font_size: FontSize;
  density: Density;
  theme: Theme;
  widget: Widget;
}

export const ATTRIBUTES = ["layout", "font_size", "density", "theme", "widget"] as const;
export type AttributeName = (typeof ATTRIBUTES)[number];

const ATTRIBUTE_VALUES: Record<AttributeName, readonly string[]> = {
  layout: LAYOUTS,
  font_size: FONT_SIZES,
  density: DENSITIES,
  theme: THEMES,
  widget: WIDGETS,
};

export const DEFAULT_CONFIG: UiConfig = {
  layout: "list",
  font_size: "medium",
  density: "detailed",
  theme: "light",
  widget: "list_menu",
};

/** Comma-joined attribute values in canonical attribute order. */
export function configSlug(config: UiConfig): string {
  return ATTRIBUTES.map((name) => config[name]).join(",");
}

export function parseConfigSlug(slug: string): UiConfig {
  const parts = slug.split(",");
  if (parts.length !== ATTRIBUTES.length) {
    throw new Error(`config slug needs ${ATTRIBUTES.length} values, got ${parts.length}`);
  }
  ATTRIBUTES.forEach((name, i) => {
    const value = parts[i]!;
    if (!ATTRIBUTE_VALUES[name].includes(value)) {
      throw new Error(`unknown ${name} value "${value}"`);
    }
  });
  return {
    layout: parts[0] as Layout,
    font_size: parts[1] as FontSize,
    density: parts[2] as Density,
    theme: parts[3] as Theme,
    widget: parts[4] as Widget,
  };
}

/** Every expressible configuration, in deterministic attribute order. */
export function allConfigs(): UiConfig[] {
  const out: UiConfig[] = [];
  for (const layout of LAYOUTS)
    for (const font_size of FONT_SIZES)
      for (const density of DENSITIES)
        for (const theme of THEMES)
          for (const widget of WIDGETS)
            out.push({ layout, font_size, density, theme, widget });
  return out;
}

export type AdaptationAction =
  | { kind: "noop" }
  | { kind: "assign"; attribute: AttributeName; value: string };

export interface ClipStep {
  state: UiConfig;
  action: AdaptationAction;
}

export interface Clip {
  id: string;
  domain: Domain;
  steps: ClipStep[];
  render_hint_ms_per_step: number;
}

export type PreferenceChoice = "left" | "right" | "equal" | "skip";

export interface ComparisonQuery {
  query_id: string;
  left: string;
  right: string;
}

export interface NextQueryResponse {
  complete: boolean;
  query: ComparisonQuery | null;
  /** Present once complete: clip id buckets, best first; ties share a bucket. */
  ranking?: string[][];
}

export interface SessionProgress {
  placed: number;
  total: number;
  answered: number;
  complete: boolean;
}

export interface AnswerAck {
  accepted: boolean;
  complete: boolean;
  progress: { placed: number; total: number; answered: number };
}

export interface UserRecord {
  user_id: string;
  group: number;
  demographic: Record<string, string> | null;
  created_at: number;
}

export interface SessionCreated {
  session_id: string;
  domain: Domain;
  total_clips: number;
}

export interface JobCreated {
  job_id: string;
  status: string;
}

export interface JobRecord {
  job_id: string;
  user_id: string;
  kind: "reward" | "agent";
  params: { beta: number | null; steps: number | null; domains: string[] };
  status: "queued" | "running" | "done" | "error";
  created_at: number;
  started_at: number | null;
  finished_at: number | null;
  detail: unknown;
}

export type Technique = "adaptive" | "na";

export interface AdaptedUiResponse {
  action: AdaptationAction;
  next_config: UiConfig;
}

export interface QuestionnairePayload {
  kind: "quis" | "ues";
  items: number[];
  dimensions?: string[];
  reverse_coded?: boolean[];
}

export interface QuestionnaireScore {
  user_id: string;
  period: number;
  kind: string;
  score: number;
}

export interface HealthResponse {
  status: string;
  clips: number;
}
