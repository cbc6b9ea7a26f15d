// Browser entry point: wires the policy form, the assumption toggles and
// the question panel to the HTTP service. All verdict logic stays on the
// server; this file only renders state held by the models.

import { ApiClient, ApiError } from "./api.js";
import { PREDICATES, PolicyFormModel } from "./form.js";
import { QuestionPanelModel } from "./panel.js";
import { witnessSentences } from "./sentences.js";
import type { AssumptionInfo, ScenarioJson } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function toast(message: string): void {
  const box = document.getElementById("toasts")!;
  const item = el("div", { class: "toast" }, [message]);
  box.append(item);
  setTimeout(() => item.remove(), 6000);
}

function multiSelect(
  options: string[],
  selected: string[],
  onChange: (values: string[]) => void,
): HTMLElement {
  const wrap = el("div", { class: "choices" });
  for (const option of options) {
    const input = el("input", { type: "checkbox", value: option }) as HTMLInputElement;
    input.checked = selected.includes(option);
    input.addEventListener("change", () => {
      const next = selected.slice();
      if (input.checked) next.push(option);
      else next.splice(next.indexOf(option), 1);
      selected.length = 0;
      selected.push(...next);
      onChange(selected);
    });
    wrap.append(el("label", {}, [input, ` ${option}`]));
  }
  return wrap;
}

function labelled(text: string, control: Node, error?: string): HTMLElement {
  const row = el("div", { class: "field" }, [el("span", { class: "label" }, [text]), control]);
  if (error) {
    row.append(el("span", { class: "field-error" }, [error]));
  }
  return row;
}

function select(
  options: string[],
  value: string,
  onChange: (value: string) => void,
  placeholder = "choose...",
): HTMLSelectElement {
  const node = el("select") as HTMLSelectElement;
  node.append(el("option", { value: "" }, [placeholder]));
  for (const option of options) {
    node.append(el("option", { value: option }, [option]));
  }
  node.value = value;
  node.addEventListener("change", () => onChange(node.value));
  return node;
}

class App {
  private form!: PolicyFormModel;
  private panel!: QuestionPanelModel;
  private scenario!: ScenarioJson;
  private assumptions: AssumptionInfo[] = [];
  private fieldErrors: Record<string, string> = {};
  private submittedSentence: string | null = null;

  constructor(private readonly api: ApiClient) {}

  async start(): Promise<void> {
    const params = new URLSearchParams(location.search);
    const scenarios = await this.api.listScenarios();
    if (scenarios.length === 0) {
      toast("the service has no scenarios");
      return;
    }
    const requested = params.get("scenario");
    const chosen = scenarios.find((s) => s.id === requested) ?? scenarios[0]!;
    this.scenario = await this.api.getScenario(chosen.id);
    this.assumptions = await this.api.getAssumptions(chosen.id);
    this.form = new PolicyFormModel({
      datatypes: this.scenario.hierarchies.datatypes.labels,
      entities: this.scenario.hierarchies.entities.labels,
      purposes: this.scenario.hierarchies.purposes.labels,
      items: this.scenario.items.map((i) => i.id),
    });
    this.panel = new QuestionPanelModel(
      this.api,
      this.scenario.id,
      this.scenario.questions.map((q) => ({ name: q.name, text: q.text ?? q.name })),
    );
    this.panel.onChange(() => this.renderPanel());
    this.renderForm();
    this.renderAssumptions();
    this.renderPanel();
  }

  // -- policy form ------------------------------------------------------------

  private renderForm(): void {
    const root = document.getElementById("policy-form")!;
    root.replaceChildren();
    const errors = this.fieldErrors;

    root.append(
      labelled(
        "Data of type",
        select(this.form.vocabulary.datatypes, this.form.datatype, (v) => {
          this.form.datatype = v;
          this.renderForm();
        }),
        errors["datatype"],
      ),
      labelled(
        "may be collected by",
        select(this.form.vocabulary.entities, this.form.entity, (v) => {
          this.form.entity = v;
          this.renderForm();
        }),
        errors["entity"],
      ),
      labelled(
        "for the purposes",
        multiSelect(this.form.vocabulary.purposes, this.form.purposes, () =>
          this.renderForm(),
        ),
        errors["purposes"],
      ),
      labelled("until (DD/MM/YYYY)", this.dateInput(), errors["until"]),
      this.conditionRows(),
      this.transferBlocks(),
      this.submitRow(),
    );
  }

  private dateInput(): HTMLInputElement {
    const input = el("input", {
      type: "text",
      placeholder: "21/03/2019",
      value: this.form.until,
    }) as HTMLInputElement;
    input.addEventListener("change", () => {
      this.form.until = input.value.trim();
      this.renderForm();
    });
    return input;
  }

  private conditionRows(): HTMLElement {
    const wrap = el("fieldset", {}, [el("legend", {}, ["collection conditions"])]);
    this.form.conditions.forEach((row, i) => {
      const itemSel = select(this.form.vocabulary.items, row.item, (v) => {
        row.item = v;
        this.renderForm();
      });
      const predSel = select([...PREDICATES], row.predicate, (v) => {
        row.predicate = v;
        this.renderForm();
      }, "predicate");
      const valueInput = el("input", { type: "text", value: row.value }) as HTMLInputElement;
      valueInput.addEventListener("change", () => {
        row.value = valueInput.value;
        this.renderForm();
      });
      const remove = el("button", { type: "button" }, ["remove"]);
      remove.addEventListener("click", () => {
        this.form.conditions.splice(i, 1);
        this.renderForm();
      });
      const error = this.fieldErrors[`conditions[${i}].item`] ??
        this.fieldErrors[`conditions[${i}].value`];
      const rowEl = el("div", { class: "condition-row" }, [itemSel, predSel, valueInput, remove]);
      if (error) rowEl.append(el("span", { class: "field-error" }, [error]));
      wrap.append(rowEl);
    });
    const add = el("button", { type: "button" }, ["add condition"]);
    add.addEventListener("click", () => {
      this.form.addConditionRow();
      this.renderForm();
    });
    wrap.append(add);
    return wrap;
  }

  private transferBlocks(): HTMLElement {
    const wrap = el("fieldset", {}, [el("legend", {}, ["transfer rules"])]);
    this.form.transfers.forEach((block, i) => {
      const prefix = `transfers[${i}].`;
      const blockEl = el("div", { class: "transfer-block" });
      blockEl.append(
        labelled(
          "may be transferred to",
          select(this.form.vocabulary.entities, block.entity, (v) => {
            block.entity = v;
            this.renderForm();
          }),
          this.fieldErrors[`${prefix}entity`],
        ),
        labelled(
          "for the purposes",
          multiSelect(this.form.vocabulary.purposes, block.purposes, () =>
            this.renderForm(),
          ),
          this.fieldErrors[`${prefix}purposes`],
        ),
      );
      const until = el("input", {
        type: "text",
        placeholder: "26/04/2019",
        value: block.until,
      }) as HTMLInputElement;
      until.addEventListener("change", () => {
        block.until = until.value.trim();
        this.renderForm();
      });
      blockEl.append(labelled("until (DD/MM/YYYY)", until, this.fieldErrors[`${prefix}until`]));
      const remove = el("button", { type: "button" }, ["remove transfer"]);
      remove.addEventListener("click", () => {
        this.form.removeTransferBlock(i);
        this.renderForm();
      });
      blockEl.append(remove);
      wrap.append(blockEl);
    });
    const add = el("button", { type: "button" }, ["add transfer rule"]);
    add.addEventListener("click", () => {
      this.form.addTransferBlock();
      this.renderForm();
    });
    wrap.append(add);
    return wrap;
  }

  private submitRow(): HTMLElement {
    const button = el("button", { type: "button", class: "submit" }, ["Submit policy"]);
    if (!this.form.isSubmittable()) {
      button.setAttribute("disabled", "disabled");
    }
    button.addEventListener("click", () => void this.submitPolicy());
    const row = el("div", { class: "submit-row" }, [button]);
    if (this.submittedSentence) {
      row.append(el("blockquote", { class: "rendered" }, [this.submittedSentence]));
    }
    return row;
  }

  private async submitPolicy(): Promise<void> {
    this.fieldErrors = this.form.fieldErrors();
    if (Object.keys(this.fieldErrors).length > 0) {
      this.renderForm();
      return;
    }
    const policy = this.form.toPolicy();
    try {
      const rendered = await this.api.renderPolicy(policy, this.scenario.id);
      this.submittedSentence = rendered.text;
      // the policy constrains the item owner's releases, and the collecting
      // entity mirrors it as its declared policy (worst case)
      const owner = this.scenario.items[0]?.owner;
      const collector = this.scenario.devices.find(
        (d) => d.entity === this.form.entity,
      )?.id;
      const targets = [owner, collector].filter((d): d is string => Boolean(d));
      this.panel.setPolicy(rendered.policy, targets);
      this.renderForm();
    } catch (err) {
      if (err instanceof ApiError) {
        this.fieldErrors = { datatype: err.message };
        toast(err.message);
      } else {
        toast("the service is unreachable");
      }
      this.renderForm();
    }
  }

  // -- assumptions and questions ---------------------------------------------------

  private renderAssumptions(): void {
    const root = document.getElementById("assumptions")!;
    root.replaceChildren(el("h2", {}, ["Risk assumptions"]));
    for (const assumption of this.assumptions) {
      const input = el("input", { type: "checkbox", value: assumption.id }) as HTMLInputElement;
      input.checked = this.panel.assumptions.has(assumption.id);
      input.addEventListener("change", () => this.panel.toggleAssumption(assumption.id));
      root.append(el("label", { class: "assumption" }, [input, ` ${assumption.description}`]));
    }
  }

  private renderPanel(): void {
    const root = document.getElementById("questions")!;
    root.replaceChildren(el("h2", {}, ["Questions"]));
    if (!this.panel.submittedPolicy) {
      root.append(el("p", { class: "hint" }, ["Submit a policy to enable verification."]));
    }
    for (const q of this.panel.questions) {
      const status = el("span", { class: `status ${this.statusClass(q)}` }, [q.status]);
      const verify = el("button", { type: "button" }, [
        this.panel.isVerifying(q.name) ? "Verifying..." : "Verify!",
      ]);
      if (!this.panel.submittedPolicy || this.panel.isVerifying(q.name)) {
        verify.setAttribute("disabled", "disabled");
      }
      verify.addEventListener("click", () => void this.panel.verify(q.name));
      const row = el("div", { class: "question" }, [
        el("span", { class: "question-text" }, [q.text]),
        status,
        verify,
      ]);
      if (q.error) {
        row.append(el("span", { class: "field-error" }, [q.error]));
      }
      if (q.status === "Yes" && q.witness && q.witness.length > 0) {
        const toggle = el("button", { type: "button", class: "link" }, [
          q.expanded ? "hide trace" : "how?",
        ]);
        toggle.addEventListener("click", () => this.panel.toggleWitness(q.name));
        row.append(toggle);
        if (q.expanded) {
          const items = witnessSentences(
            q.witness,
            new Map(this.scenario.items.map((i) => [i.id, i.datatype])),
          );
          row.append(el("ol", { class: "witness" },
            items.map((s) => el("li", {}, [s.replace(/^\d+\. /, "")]))));
        }
      }
      if (q.status === "Yes" && q.byOwnership) {
        row.append(el("span", { class: "hint" }, ["(the owner holds this item by construction)"]));
      }
      root.append(row);
    }
  }

  private statusClass(q: { status: string; respected: string | null }): string {
    if (q.status === "Not Analyzed") return "pending";
    if (q.status === "Yes" && q.respected === "red") return "violated";
    return "ok";
  }
}

if (typeof document !== "undefined") {
  const params = new URLSearchParams(location.search);
  const base = params.get("api") ?? "http://127.0.0.1:8000";
  const app = new App(new ApiClient(base));
  app.start().catch(() => toast("could not reach the verification service"));
}
