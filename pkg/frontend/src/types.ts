// Payload shapes of the HTTP API the client consumes.

export interface HierarchyJson {
  labels: string[];
  edges: [string, string][];
}

export interface RuleJson {
  entity: string;
  purposes: string[];
  until: string;
  condition?: string;
}

export interface PolicyJson {
  datatype: string;
  collection: RuleJson;
  transfers: RuleJson[];
}

export interface EventJson {
  kind:
    | "request"
    | "send"
    | "transfer"
    | "use"
    | "illegal_transfer"
    | "illegal_use";
  timestamp: string;
  text: string;
  sender?: string;
  receiver?: string;
  device?: string;
  item?: string;
  datatype?: string;
  purpose?: string;
  policy?: PolicyJson;
}

export interface VerifyRequest {
  question: string;
  policy_variant?: string;
  policies?: Record<string, PolicyJson[]>;
  assumptions: string[];
}

export interface VerifyResponse {
  answer: "yes" | "no";
  respected: "green" | "red";
  witness: EventJson[] | null;
  states_explored: number;
  by_ownership: boolean;
  question: string;
  record: string;
}

export interface ScenarioInfo {
  id: string;
  name: string;
  questions: string[];
}

export interface ItemJson {
  id: string;
  datatype: string;
  owner: string;
  value: string | number | null;
}

export interface DeviceJson {
  id: string;
  entity: string;
  kind: "DS" | "DC";
}

export interface QuestionJson {
  name: string;
  kind: string;
  entity: string;
  item: string;
  purpose?: string;
  other_than?: string[];
  text?: string;
}

export interface ScenarioJson {
  id: string;
  name: string;
  hierarchies: {
    entities: HierarchyJson;
    datatypes: HierarchyJson;
    purposes: HierarchyJson;
  };
  devices: DeviceJson[];
  items: ItemJson[];
  questions: QuestionJson[];
  now: string;
}

export interface AssumptionInfo {
  id: string;
  kind: "illegal_transfer" | "illegal_use";
  description: string;
}

export interface ParseResponse {
  policy: PolicyJson;
  rendered: string;
}

export interface RenderResponse {
  text: string;
  policy: PolicyJson;
}
