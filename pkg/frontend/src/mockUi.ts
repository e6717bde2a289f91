// The mock application surface whose look the adaptation loop controls. The
// same renderer draws clip playback frames, the live demo app, and the
// snapshot fixtures, so what participants compare is exactly what the demo
// shows. Rendering is a pure function of (config, domain): no clocks, no
// randomness, no ambient state.

import type { Density, Domain, FontSize, Layout, UiConfig, Widget } from "./types.js";
import { h, type VNode } from "./vdom.js";

interface CardData {
  title: string;
  description: string;
}

const COURSE_CARDS: CardData[] = [
  { title: "Linear Algebra", description: "Vectors, matrices, and eigenvalue problems with weekly problem sets." },
  { title: "World History", description: "From early settlements to the modern era in twelve guided units." },
  { title: "Intro to Painting", description: "Color, composition, and studio practice for complete beginners." },
  { title: "Data Structures", description: "Lists, trees, and hash tables with graded programming labs." },
  { title: "Microeconomics", description: "Supply, demand, and market design with case based exercises." },
  { title: "Creative Writing", description: "Short fiction workshops with peer review every second week." },
];

const TRIP_CARDS: CardData[] = [
  { title: "Lisbon Weekend", description: "Three days of tram rides, tiled alleys, and seafood dinners." },
  { title: "Kyoto in Autumn", description: "Temples, gardens, and maple season walks over five days." },
  { title: "Patagonia Trek", description: "A ten day guided hike across glaciers and granite towers." },
  { title: "Rome on a Budget", description: "Ancient sites and trattorias without breaking fifty a day." },
  { title: "Iceland Ring Road", description: "Waterfalls, black beaches, and hot springs in one week." },
  { title: "Marrakech Souks", description: "Markets, riads, and day trips to the Atlas foothills." },
];

const NAV_SECTIONS: Record<Domain, string[]> = {
  courses: ["Catalog", "My courses", "Deadlines", "Grades"],
  trips: ["Destinations", "Itineraries", "Bookings", "Budget"],
};

const PAGE_TITLES: Record<Domain, string> = {
  courses: "Course planner",
  trips: "Trip planner",
};

const LAYOUT_COLUMNS: Record<Layout, number> = {
  list: 1,
  grid2: 2,
  grid3: 3,
  grid4: 4,
  grid5: 5,
};

export function layoutColumns(layout: Layout): number {
  return LAYOUT_COLUMNS[layout];
}

export function cardsFor(domain: Domain): CardData[] {
  return domain === "courses" ? COURSE_CARDS : TRIP_CARDS;
}

export function navSections(domain: Domain): string[] {
  return NAV_SECTIONS[domain];
}

function renderNav(domain: Domain, widget: Widget): VNode {
  const sections = NAV_SECTIONS[domain];
  if (widget === "list_menu") {
    return h(
      "aside",
      { class: "nav nav-list" },
      h("ul", {}, ...sections.map((s) => h("li", { class: "nav-item" }, s)))
    );
  }
  return h(
    "nav",
    { class: "nav nav-dropdown" },
    h(
      "select",
      { class: "nav-select" },
      ...sections.map((s) => h("option", { value: s }, s))
    )
  );
}

function renderCard(card: CardData, density: Density, index: number): VNode {
  const children: VNode[] = [h("h3", { class: "card-title" }, card.title)];
  if (density === "detailed") {
    children.push(h("p", { class: "card-description" }, card.description));
  }
  return h("article", { class: "card", "data-index": String(index) }, ...children);
}

function renderCardArea(domain: Domain, layout: Layout, density: Density): VNode {
  const cards = cardsFor(domain);
  const columns = LAYOUT_COLUMNS[layout];
  const columnNodes: VNode[] = [];
  for (let col = 0; col < columns; col += 1) {
    const members = cards
      .map((card, i) => ({ card, i }))
      .filter(({ i }) => i % columns === col)
      .map(({ card, i }) => renderCard(card, density, i));
    columnNodes.push(h("div", { class: "column", "data-column": String(col) }, ...members));
  }
  return h(
    "main",
    { class: `cards layout-${layout}`, "data-columns": String(columns) },
    ...columnNodes
  );
}

function rootClass(theme: UiConfig["theme"], fontSize: FontSize, density: Density): string {
  return `app theme-${theme} font-${fontSize} density-${density}`;
}

/** Render the mock application for one configuration and content domain. */
export function renderMockUi(config: UiConfig, domain: Domain): VNode {
  return h(
    "div",
    { class: rootClass(config.theme, config.font_size, config.density), "data-domain": domain },
    h("header", { class: "masthead" }, h("h1", { class: "page-title" }, PAGE_TITLES[domain])),
    renderNav(domain, config.widget),
    renderCardArea(domain, config.layout, config.density)
  );
}
