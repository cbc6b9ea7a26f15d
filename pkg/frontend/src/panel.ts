// Question panel state: per-question verdict status, the selected risk
// assumptions, and verify orchestration. Whenever the submitted policy or
// the assumption selection changes, every status falls back to
// "Not Analyzed" and stale in-flight results are dropped.

import type { ApiClient } from "./api.js";
import { ApiError } from "./api.js";
import type { EventJson, PolicyJson, VerifyResponse } from "./types.js";

export type Status = "Not Analyzed" | "Yes" | "No";

export interface QuestionView {
  name: string;
  text: string;
  status: Status;
  respected: "green" | "red" | null;
  witness: EventJson[] | null;
  byOwnership: boolean;
  expanded: boolean;
  error: string | null;
}

export interface PanelListener {
  (): void;
}

export class QuestionPanelModel {
  readonly questions: QuestionView[];
  readonly assumptions = new Set<string>();
  private policy: PolicyJson | null = null;
  private policyTargets: string[] = [];
  private readonly inflight = new Set<string>();
  private epoch = 0;
  private listeners: PanelListener[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly scenarioId: string,
    questions: { name: string; text: string }[],
  ) {
    this.questions = questions.map((q) => ({
      name: q.name,
      text: q.text,
      status: "Not Analyzed",
      respected: null,
      witness: null,
      byOwnership: false,
      expanded: false,
      error: null,
    }));
  }

  onChange(listener: PanelListener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  get submittedPolicy(): PolicyJson | null {
    return this.policy;
  }

  question(name: string): QuestionView {
    const found = this.questions.find((q) => q.name === name);
    if (!found) throw new Error(`unknown question: ${name}`);
    return found;
  }

  /** Install the submitted policy and the devices it applies to. */
  setPolicy(policy: PolicyJson | null, targets: string[]): void {
    this.policy = policy;
    this.policyTargets = [...new Set(targets)];
    this.resetStatuses();
  }

  toggleAssumption(id: string): void {
    if (this.assumptions.has(id)) {
      this.assumptions.delete(id);
    } else {
      this.assumptions.add(id);
    }
    this.resetStatuses();
  }

  resetStatuses(): void {
    this.epoch += 1;
    for (const q of this.questions) {
      q.status = "Not Analyzed";
      q.respected = null;
      q.witness = null;
      q.byOwnership = false;
      q.expanded = false;
      q.error = null;
    }
    this.notify();
  }

  toggleWitness(name: string): void {
    const q = this.question(name);
    q.expanded = !q.expanded;
    this.notify();
  }

  isVerifying(name: string): boolean {
    return this.inflight.has(name);
  }

  /** Run one verification; at most one in flight per question. */
  async verify(name: string): Promise<void> {
    const q = this.question(name);
    if (this.policy === null) {
      q.error = "submit a policy first";
      this.notify();
      return;
    }
    if (this.inflight.has(name)) {
      return;
    }
    this.inflight.add(name);
    const startedEpoch = this.epoch;
    q.error = null;
    this.notify();
    try {
      const policies: Record<string, PolicyJson[]> = {};
      for (const device of this.policyTargets) {
        policies[device] = [this.policy];
      }
      const response = await this.api.verify(this.scenarioId, {
        question: name,
        policies,
        assumptions: [...this.assumptions].sort(),
      });
      if (this.epoch === startedEpoch) {
        this.applyVerdict(q, response);
      }
    } catch (err) {
      if (this.epoch === startedEpoch) {
        q.status = "Not Analyzed";
        q.error = err instanceof ApiError ? err.message : "verification failed";
      }
    } finally {
      this.inflight.delete(name);
      this.notify();
    }
  }

  private applyVerdict(q: QuestionView, response: VerifyResponse): void {
    // displayed verdicts are the service response, verbatim
    q.status = response.answer === "yes" ? "Yes" : "No";
    q.respected = response.respected;
    q.witness = response.witness;
    q.byOwnership = response.by_ownership;
    q.error = null;
  }
}
