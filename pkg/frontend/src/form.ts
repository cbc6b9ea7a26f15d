// Policy form model: mirrors the sentence structure of a policy (datatype,
// collecting entity, condition rows, purposes, retention deadline, plus
// repeatable transfer blocks) and maps to the structured policy form. The
// form is submittable exactly when that mapping yields a well-formed policy
// over the scenario's vocabulary.

import type { PolicyJson, RuleJson } from "./types.js";

export const PREDICATES = ["is", "=", "!=", "<", "<=", ">", ">="] as const;

export interface ConditionRow {
  item: string;
  predicate: string;
  value: string;
}

export interface TransferBlock {
  entity: string;
  purposes: string[];
  until: string;
  conditions: ConditionRow[];
}

export interface Vocabulary {
  datatypes: string[];
  entities: string[];
  purposes: string[];
  items: string[];
}

const DATE_RE = /^(\d{2})\/(\d{2})\/(\d{4})$/;
const BARE_STRING_RE = /^[A-Z][A-Za-z0-9_]*$/;
const INT_RE = /^\d+$/;

export function isValidDate(text: string): boolean {
  const match = DATE_RE.exec(text);
  if (!match) return false;
  const [, dd, mm, yyyy] = match;
  const day = Number(dd), month = Number(mm), year = Number(yyyy);
  const parsed = new Date(Date.UTC(year, month - 1, day));
  return (
    parsed.getUTCFullYear() === year &&
    parsed.getUTCMonth() === month - 1 &&
    parsed.getUTCDate() === day
  );
}

function renderValue(raw: string): string {
  const value = raw.trim();
  if (INT_RE.test(value) || DATE_RE.test(value) || BARE_STRING_RE.test(value)) {
    return value;
  }
  return `"${value}"`;
}

function renderCondition(rows: ConditionRow[]): string | undefined {
  if (rows.length === 0) return undefined;
  return rows
    .map((row) => `${row.item} ${row.predicate} ${renderValue(row.value)}`)
    .join(" and ");
}

export class PolicyFormModel {
  datatype = "";
  entity = "";
  purposes: string[] = [];
  until = "";
  conditions: ConditionRow[] = [];
  transfers: TransferBlock[] = [];

  constructor(readonly vocabulary: Vocabulary) {}

  addConditionRow(): void {
    this.conditions.push({ item: "", predicate: "is", value: "" });
  }

  addTransferBlock(): void {
    this.transfers.push({ entity: "", purposes: [], until: "", conditions: [] });
  }

  removeTransferBlock(index: number): void {
    this.transfers.splice(index, 1);
  }

  private ruleErrors(
    prefix: string,
    entity: string,
    purposes: string[],
    until: string,
    conditions: ConditionRow[],
    errors: Record<string, string>,
  ): void {
    if (!this.vocabulary.entities.includes(entity)) {
      errors[`${prefix}entity`] = entity
        ? `unknown entity: ${entity}`
        : "select an entity";
    }
    if (purposes.length === 0) {
      errors[`${prefix}purposes`] = "select at least one purpose";
    } else {
      for (const p of purposes) {
        if (!this.vocabulary.purposes.includes(p)) {
          errors[`${prefix}purposes`] = `unknown purpose: ${p}`;
        }
      }
    }
    if (!isValidDate(until)) {
      errors[`${prefix}until`] = "enter a DD/MM/YYYY date";
    }
    conditions.forEach((row, i) => {
      if (!this.vocabulary.items.includes(row.item)) {
        errors[`${prefix}conditions[${i}].item`] = row.item
          ? `unknown data item: ${row.item}`
          : "select a data item";
      }
      if (!PREDICATES.includes(row.predicate as (typeof PREDICATES)[number])) {
        errors[`${prefix}conditions[${i}].predicate`] = "pick a predicate";
      }
      if (row.value.trim() === "") {
        errors[`${prefix}conditions[${i}].value`] = "enter a value";
      }
    });
  }

  fieldErrors(): Record<string, string> {
    const errors: Record<string, string> = {};
    if (!this.vocabulary.datatypes.includes(this.datatype)) {
      errors["datatype"] = this.datatype
        ? `unknown datatype: ${this.datatype}`
        : "select a datatype";
    }
    this.ruleErrors("", this.entity, this.purposes, this.until, this.conditions, errors);
    this.transfers.forEach((block, i) => {
      this.ruleErrors(
        `transfers[${i}].`,
        block.entity,
        block.purposes,
        block.until,
        block.conditions,
        errors,
      );
    });
    return errors;
  }

  isSubmittable(): boolean {
    return Object.keys(this.fieldErrors()).length === 0;
  }

  toPolicy(): PolicyJson {
    if (!this.isSubmittable()) {
      throw new Error("the form does not map to a well-formed policy yet");
    }
    const rule = (
      entity: string,
      purposes: string[],
      until: string,
      conditions: ConditionRow[],
    ): RuleJson => {
      const out: RuleJson = {
        entity,
        purposes: [...purposes].sort(),
        until,
      };
      const condition = renderCondition(conditions);
      if (condition !== undefined) {
        out.condition = condition;
      }
      return out;
    };
    return {
      datatype: this.datatype,
      collection: rule(this.entity, this.purposes, this.until, this.conditions),
      transfers: this.transfers.map((block) =>
        rule(block.entity, block.purposes, block.until, block.conditions),
      ),
    };
  }
}
