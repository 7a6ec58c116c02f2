// Query form: sector and region multi-selects, date range, axis toggles
// and the optional comparison periods. Reads into / writes from a
// QueryFormState so the URL round-trip can reproduce the form exactly.

import type { MetaResponse, QueryFormState } from "./types";
import { defaultState } from "./types";

function multiSelect(name: string, options: { value: string; text: string }[]): HTMLSelectElement {
  const select = document.createElement("select");
  select.multiple = true;
  select.name = name;
  select.size = 8;
  for (const { value, text } of options) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = text;
    select.appendChild(option);
  }
  return select;
}

function dateInput(name: string, value: string): HTMLInputElement {
  const input = document.createElement("input");
  input.type = "date";
  input.name = name;
  input.value = value;
  return input;
}

function labelled(text: string, control: HTMLElement): HTMLElement {
  const wrap = document.createElement("label");
  wrap.className = "field";
  const caption = document.createElement("span");
  caption.textContent = text;
  wrap.append(caption, control);
  return wrap;
}

export class QueryForm {
  readonly root: HTMLFormElement;
  private labelSelect: HTMLSelectElement;
  private regionSelect: HTMLSelectElement;
  private fromInput: HTMLInputElement;
  private toInput: HTMLInputElement;
  private countMode: HTMLSelectElement;
  private categoryAxis: HTMLSelectElement;
  private compareInputs: Record<string, HTMLInputElement>;
  private errorBox: HTMLElement;

  constructor(meta: MetaResponse, onSubmit: (state: QueryFormState) => void) {
    const initial = defaultState();
    this.root = document.createElement("form");
    this.root.className = "query-form";

    this.labelSelect = multiSelect(
      "labels",
      meta.labels.map((l) => ({ value: l, text: l })),
    );
    this.regionSelect = multiSelect(
      "regions",
      meta.regions.map((r) => ({ value: r.code, text: `${r.name} (${r.code})` })),
    );
    this.fromInput = dateInput("from", initial.range.from);
    this.toInput = dateInput("to", initial.range.to);

    this.countMode = document.createElement("select");
    this.countMode.name = "count-mode";
    for (const value of ["raw", "per-capita"]) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value === "raw" ? "raw count" : "per capita";
      this.countMode.appendChild(option);
    }
    this.categoryAxis = document.createElement("select");
    this.categoryAxis.name = "category-axis";
    for (const value of ["contract", "mode"]) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value === "contract" ? "contract type" : "employment mode";
      this.categoryAxis.appendChild(option);
    }

    this.compareInputs = {
      aFrom: dateInput("compare-a-from", ""),
      aTo: dateInput("compare-a-to", ""),
      bFrom: dateInput("compare-b-from", ""),
      bTo: dateInput("compare-b-to", ""),
    };

    this.errorBox = document.createElement("div");
    this.errorBox.className = "form-errors";

    const submit = document.createElement("button");
    submit.type = "submit";
    submit.textContent = "Run query";

    const filters = document.createElement("div");
    filters.className = "form-row";
    filters.append(
      labelled("Sectors", this.labelSelect),
      labelled("Regions", this.regionSelect),
    );
    const rangeRow = document.createElement("div");
    rangeRow.className = "form-row";
    rangeRow.append(
      labelled("From", this.fromInput),
      labelled("To", this.toInput),
      labelled("Series", this.countMode),
      labelled("Categories", this.categoryAxis),
    );
    const compareRow = document.createElement("div");
    compareRow.className = "form-row compare-row";
    compareRow.append(
      labelled("Period A from", this.compareInputs.aFrom),
      labelled("Period A to", this.compareInputs.aTo),
      labelled("Period B from", this.compareInputs.bFrom),
      labelled("Period B to", this.compareInputs.bTo),
    );
    this.root.append(filters, rangeRow, compareRow, this.errorBox, submit);

    this.root.addEventListener("submit", (event) => {
      event.preventDefault();
      const state = this.readState();
      const problems = validate(state);
      if (problems.length) {
        this.showErrors(problems);
        return;
      }
      this.showErrors([]);
      onSubmit(state);
    });
  }

  showErrors(problems: string[]): void {
    this.errorBox.replaceChildren();
    for (const problem of problems) {
      const item = document.createElement("div");
      item.className = "form-error";
      item.textContent = problem;
      this.errorBox.appendChild(item);
    }
  }

  readState(): QueryFormState {
    const selected = (select: HTMLSelectElement) =>
      Array.from(select.selectedOptions).map((o) => o.value);
    const compareA =
      this.compareInputs.aFrom.value && this.compareInputs.aTo.value
        ? { from: this.compareInputs.aFrom.value, to: this.compareInputs.aTo.value }
        : null;
    const compareB =
      this.compareInputs.bFrom.value && this.compareInputs.bTo.value
        ? { from: this.compareInputs.bFrom.value, to: this.compareInputs.bTo.value }
        : null;
    return {
      labels: selected(this.labelSelect),
      regions: selected(this.regionSelect),
      range: { from: this.fromInput.value, to: this.toInput.value },
      countMode: this.countMode.value as QueryFormState["countMode"],
      categoryAxis: this.categoryAxis.value as QueryFormState["categoryAxis"],
      compareA,
      compareB,
    };
  }

  writeState(state: QueryFormState): void {
    for (const option of Array.from(this.labelSelect.options)) {
      option.selected = state.labels.includes(option.value);
    }
    for (const option of Array.from(this.regionSelect.options)) {
      option.selected = state.regions.includes(option.value);
    }
    this.fromInput.value = state.range.from;
    this.toInput.value = state.range.to;
    this.countMode.value = state.countMode;
    this.categoryAxis.value = state.categoryAxis;
    this.compareInputs.aFrom.value = state.compareA?.from ?? "";
    this.compareInputs.aTo.value = state.compareA?.to ?? "";
    this.compareInputs.bFrom.value = state.compareB?.from ?? "";
    this.compareInputs.bTo.value = state.compareB?.to ?? "";
  }
}

export function validate(state: QueryFormState): string[] {
  const problems: string[] = [];
  if (!state.range.from || !state.range.to) {
    problems.push("both dates are required");
  } else if (state.range.from > state.range.to) {
    problems.push("the start date is after the end date");
  }
  const half = (state.compareA === null) !== (state.compareB === null);
  if (half) problems.push("comparison needs both periods");
  if (state.compareA && state.compareA.from > state.compareA.to) {
    problems.push("comparison period A is reversed");
  }
  if (state.compareB && state.compareB.from > state.compareB.to) {
    problems.push("comparison period B is reversed");
  }
  return problems;
}
