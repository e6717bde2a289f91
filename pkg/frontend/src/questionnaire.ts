// Questionnaire forms for the two study instruments: a 27-item satisfaction
// scale answered 1..10 and a 31-item engagement scale answered 1..5. Ranges
// are enforced client-side before anything is posted; the service computes
// and stores the score.

import { ApiClient } from "./api.js";
import { h, type VNode } from "./vdom.js";
import type { QuestionnaireScore } from "./types.js";

export interface ScaleSpec {
  kind: "quis" | "ues";
  title: string;
  min: number;
  max: number;
  prompts: string[];
}

const QUIS_PROMPTS: string[] = [
  // Overall reactions
  "Overall reaction: terrible to wonderful",
  "Overall reaction: difficult to easy",
  "Overall reaction: frustrating to satisfying",
  "Overall reaction: inadequate power to adequate power",
  "Overall reaction: dull to stimulating",
  "Overall reaction: rigid to flexible",
  // Screen
  "Reading characters on the screen",
  "Highlighting simplifies task",
  "Organization of information",
  "Sequence of screens",
  // Terminology and system information
  "Use of terms throughout system",
  "Terminology relates to task",
  "Position of messages on screen",
  "Prompts for input",
  "Computer informs about its progress",
  "Error messages",
  // Learning
  "Learning to operate the system",
  "Exploring new features by trial and error",
  "Remembering names and use of commands",
  "Performing tasks is straightforward",
  "Help messages on the screen",
  "Supplemental reference materials",
  // System capabilities
  "System speed",
  "System reliability",
  "System tends to be noisy or quiet",
  "Correcting your mistakes",
  "Designed for all levels of users",
];

const UES_PROMPTS: string[] = [
  // Focused attention (7)
  "I lost myself in this experience",
  "I was so involved that I lost track of time",
  "I blocked out things around me when using the application",
  "When using the application I lost track of the world around me",
  "The time I spent using the application just slipped away",
  "I was absorbed in this experience",
  "During this experience I let myself go",
  // Perceived usability (8)
  "I felt frustrated while using this application",
  "I found this application confusing to use",
  "I felt annoyed while using this application",
  "I felt discouraged while using this application",
  "Using this application was mentally taxing",
  "This experience was demanding",
  "I felt in control while using this application",
  "I could not do some of the things I needed to do",
  // Aesthetics (5)
  "This application was attractive",
  "This application was aesthetically appealing",
  "I liked the graphics and images used",
  "The application appealed to my visual senses",
  "The screen layout was visually pleasing",
  // Endurability (5)
  "Using the application was worthwhile",
  "I consider my experience a success",
  "This experience did not work out the way I had planned",
  "My experience was rewarding",
  "I would recommend this application to my friends and family",
  // Novelty (3)
  "I continued to use the application out of curiosity",
  "The content of the application incited my curiosity",
  "I felt interested in my task",
  // Felt involvement (3)
  "I was really drawn into my task",
  "I felt involved in this task",
  "This experience was fun",
];

export const QUIS_FORM: ScaleSpec = {
  kind: "quis",
  title: "Satisfaction questionnaire",
  min: 1,
  max: 10,
  prompts: QUIS_PROMPTS,
};

export const UES_FORM: ScaleSpec = {
  kind: "ues",
  title: "Engagement questionnaire",
  min: 1,
  max: 5,
  prompts: UES_PROMPTS,
};

export class ValidationError extends Error {
  constructor(readonly issues: string[]) {
    super(issues.join("; "));
    this.name = "ValidationError";
  }
}

export class QuestionnaireForm {
  readonly spec: ScaleSpec;
  /** One slot per prompt; null until the visitor answers the item. */
  items: Array<number | null>;
  errors: string[] = [];
  result: QuestionnaireScore | null = null;

  constructor(spec: ScaleSpec) {
    this.spec = spec;
    this.items = new Array<number | null>(spec.prompts.length).fill(null);
  }

  setItem(index: number, value: number | null): void {
    if (index < 0 || index >= this.items.length) {
      throw new Error(`item index ${index} out of range`);
    }
    this.items[index] = value;
  }

  /** All problems with the current answers, one message per offending item. */
  validate(): string[] {
    const issues: string[] = [];
    this.items.forEach((value, i) => {
      const item = i + 1;
      if (value === null) {
        issues.push(`item ${item}: no answer`);
      } else if (!Number.isInteger(value)) {
        issues.push(`item ${item}: answer must be a whole number`);
      } else if (value < this.spec.min || value > this.spec.max) {
        issues.push(`item ${item}: ${value} is outside ${this.spec.min}..${this.spec.max}`);
      }
    });
    return issues;
  }

  get valid(): boolean {
    return this.validate().length === 0;
  }

  /**
   * Validate and post the answers for one study period. Invalid forms never
   * reach the network; the offending items are kept on `errors` for display.
   */
  async submit(api: ApiClient, userId: string, period: number): Promise<QuestionnaireScore> {
    this.errors = this.validate();
    if (this.errors.length > 0) {
      throw new ValidationError(this.errors);
    }
    this.result = await api.postQuestionnaire(userId, period, {
      kind: this.spec.kind,
      items: this.items as number[],
    });
    return this.result;
  }

  render(): VNode {
    const rows = this.spec.prompts.map((prompt, i) =>
      h(
        "div",
        { class: "form-row", "data-item": String(i + 1) },
        h("label", { for: `item-${i + 1}` }, prompt),
        h("input", {
          id: `item-${i + 1}`,
          type: "number",
          min: String(this.spec.min),
          max: String(this.spec.max),
          value: this.items[i] === null ? "" : String(this.items[i]),
        })
      )
    );
    const errorList =
      this.errors.length > 0
        ? h("ul", { class: "form-errors" }, ...this.errors.map((e) => h("li", {}, e)))
        : false;
    const scoreNote = this.result
      ? h("p", { class: "form-score" }, `Recorded score: ${this.result.score.toFixed(2)}`)
      : false;
    return h(
      "form",
      { class: `questionnaire questionnaire-${this.spec.kind}` },
      h("h2", {}, this.spec.title),
      h("p", { class: "form-scale" }, `Answer every item from ${this.spec.min} to ${this.spec.max}.`),
      ...rows,
      errorList,
      scoreNote,
      h("button", { class: "submit", type: "submit" }, "Submit")
    );
  }
}
