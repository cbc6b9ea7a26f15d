// Test doubles: the vehicle-tracking scenario as the service serves it,
// and a fake fetch speaking just enough of the API for the client.

import type {
  AssumptionInfo,
  PolicyJson,
  ScenarioJson,
  VerifyRequest,
  VerifyResponse,
} from "../src/types.js";

export const SCENARIO: ScenarioJson = {
  id: "anpr-test-id",
  name: "anpr",
  hierarchies: {
    entities: { labels: ["Alice", "CarInsure", "Parket", "ParketWW"], edges: [] },
    datatypes: { labels: ["number_plate"], edges: [] },
    purposes: { labels: ["commercial_offers", "profiling"], edges: [] },
  },
  devices: [
    { id: "Alice", entity: "Alice", kind: "DS" },
    { id: "CarInsure", entity: "CarInsure", kind: "DC" },
    { id: "Parket", entity: "Parket", kind: "DC" },
    { id: "ParketWW", entity: "ParketWW", kind: "DC" },
  ],
  items: [{ id: "plate_Alice", datatype: "number_plate", owner: "Alice", value: "GD-042-PR" }],
  questions: [
    { name: "q1_receive_parket", kind: "can_receive", entity: "Parket", item: "plate_Alice", text: "Can Parket receive Alice's data?" },
    { name: "q2_receive_parketww", kind: "can_receive", entity: "ParketWW", item: "plate_Alice", text: "Can ParketWW receive Alice's data?" },
    { name: "q3_receive_carinsure", kind: "can_receive", entity: "CarInsure", item: "plate_Alice", text: "Can CarInsure receive Alice's data?" },
  ],
  now: "01/03/2019",
};

export const ASSUMPTIONS: AssumptionInfo[] = [
  {
    id: "parketww_to_carinsure",
    kind: "illegal_transfer",
    description: "ParketWW may transfer number_plate data to CarInsure disregarding policies",
  },
  {
    id: "carinsure_profiling",
    kind: "illegal_use",
    description: "CarInsure may use number_plate data for profiling disregarding policies",
  },
];

export const P_TRANS: PolicyJson = {
  datatype: "number_plate",
  collection: { entity: "Parket", purposes: ["commercial_offers"], until: "21/03/2019" },
  transfers: [{ entity: "ParketWW", purposes: ["commercial_offers"], until: "26/04/2019" }],
};

// Answers frozen from the verification service for the submitted p_trans
// policy mirrored onto Alice and Parket (first matrix column when no
// assumptions are selected, third column with both).
const NO_ASSUMPTION_ANSWERS: Record<string, VerifyResponse> = {
  q1_receive_parket: {
    answer: "yes",
    respected: "green",
    witness: [
      { kind: "request", timestamp: "01/03/2019", text: "Parket requests number_plate data from Alice", sender: "Parket", receiver: "Alice", datatype: "number_plate", policy: P_TRANS },
      { kind: "send", timestamp: "01/03/2019", text: "Alice sends plate_Alice to Parket", sender: "Alice", receiver: "Parket", item: "plate_Alice" },
    ],
    states_explored: 896,
    by_ownership: false,
    question: "q1_receive_parket",
    record: "record-q1",
  },
  q2_receive_parketww: {
    answer: "yes",
    respected: "green",
    witness: [
      { kind: "request", timestamp: "01/03/2019", text: "Parket requests number_plate data from Alice", sender: "Parket", receiver: "Alice", datatype: "number_plate", policy: P_TRANS },
      { kind: "request", timestamp: "01/03/2019", text: "ParketWW requests number_plate data from Parket", sender: "ParketWW", receiver: "Parket", datatype: "number_plate" },
      { kind: "send", timestamp: "01/03/2019", text: "Alice sends plate_Alice to Parket", sender: "Alice", receiver: "Parket", item: "plate_Alice" },
      { kind: "transfer", timestamp: "01/03/2019", text: "Parket transfers plate_Alice to ParketWW", sender: "Parket", receiver: "ParketWW", item: "plate_Alice" },
    ],
    states_explored: 896,
    by_ownership: false,
    question: "q2_receive_parketww",
    record: "record-q2",
  },
  q3_receive_carinsure: {
    answer: "no",
    respected: "green",
    witness: null,
    states_explored: 896,
    by_ownership: false,
    question: "q3_receive_carinsure",
    record: "record-q3",
  },
};

const WITH_ASSUMPTION_ANSWERS: Record<string, VerifyResponse> = {
  ...NO_ASSUMPTION_ANSWERS,
  q3_receive_carinsure: {
    answer: "yes",
    respected: "red",
    witness: [
      { kind: "request", timestamp: "01/03/2019", text: "Parket requests number_plate data from Alice", sender: "Parket", receiver: "Alice", datatype: "number_plate", policy: P_TRANS },
      { kind: "request", timestamp: "01/03/2019", text: "ParketWW requests number_plate data from Parket", sender: "ParketWW", receiver: "Parket", datatype: "number_plate" },
      { kind: "send", timestamp: "01/03/2019", text: "Alice sends plate_Alice to Parket", sender: "Alice", receiver: "Parket", item: "plate_Alice" },
      { kind: "transfer", timestamp: "01/03/2019", text: "Parket transfers plate_Alice to ParketWW", sender: "Parket", receiver: "ParketWW", item: "plate_Alice" },
      { kind: "illegal_transfer", timestamp: "01/03/2019", text: "ParketWW illegally transfers plate_Alice to CarInsure", sender: "ParketWW", receiver: "CarInsure", item: "plate_Alice" },
    ],
    states_explored: 1024,
    by_ownership: false,
    question: "q3_receive_carinsure",
    record: "record-q3-risk",
  },
};

function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export interface FakeServer {
  fetch: (input: string, init?: RequestInit) => Promise<Response>;
  requests: { url: string; body: unknown }[];
  verifyDelay: () => Promise<void>;
}

/** In-memory stand-in for the verification service. */
export function fakeServer(): FakeServer {
  const requests: { url: string; body: unknown }[] = [];
  let release: (() => void) | null = null;

  const server: FakeServer = {
    requests,
    verifyDelay: async () => {},
    fetch: async (url, init) => {
      const body = init?.body ? JSON.parse(String(init.body)) : null;
      requests.push({ url, body });
      if (url.endsWith("/scenarios") && (!init || init.method === undefined)) {
        return jsonResponse([{ id: SCENARIO.id, name: SCENARIO.name, questions: SCENARIO.questions.map((q) => q.name) }]);
      }
      if (url.endsWith(`/scenarios/${SCENARIO.id}`)) {
        return jsonResponse(SCENARIO);
      }
      if (url.endsWith(`/scenarios/${SCENARIO.id}/assumptions`)) {
        return jsonResponse(ASSUMPTIONS);
      }
      if (url.endsWith("/policies/render")) {
        const policy = (body as { policy: PolicyJson }).policy;
        if (!["Alice", "CarInsure", "Parket", "ParketWW"].includes(policy.collection.entity)) {
          return jsonResponse({ error: "unknown-label", detail: `unknown entity: '${policy.collection.entity}'` }, 400);
        }
        return jsonResponse({ policy, text: "Parket may collect data of type number_plate..." });
      }
      if (url.endsWith(`/scenarios/${SCENARIO.id}/verify`)) {
        await server.verifyDelay();
        const request = body as VerifyRequest;
        const table = request.assumptions.length > 0 ? WITH_ASSUMPTION_ANSWERS : NO_ASSUMPTION_ANSWERS;
        const found = table[request.question];
        if (!found) {
          return jsonResponse({ error: "validation", detail: `unknown question: '${request.question}'` }, 400);
        }
        return jsonResponse(found);
      }
      return jsonResponse({ error: "store", detail: "not found" }, 404);
    },
  };
  return server;
}
