// Fixed event-to-sentence template table for witness traces. Items are
// displayed by their datatype name ("ParketWW illegally transfers
// number_plate to CarInsure"), falling back to the raw item id.

import type { EventJson } from "./types.js";

export type DatatypeOf = (item: string) => string;

const TEMPLATES: Record<EventJson["kind"], (e: EventJson, dt: DatatypeOf) => string> = {
  request: (e) => `${e.sender} requests ${e.datatype} data from ${e.receiver}`,
  send: (e, dt) => `${e.sender} sends ${dt(e.item!)} to ${e.receiver}`,
  transfer: (e, dt) => `${e.sender} transfers ${dt(e.item!)} to ${e.receiver}`,
  use: (e, dt) => `${e.device} uses ${dt(e.item!)} for ${e.purpose}`,
  illegal_transfer: (e, dt) =>
    `${e.sender} illegally transfers ${dt(e.item!)} to ${e.receiver}`,
  illegal_use: (e, dt) =>
    `${e.device} illegally uses ${dt(e.item!)} for ${e.purpose}`,
};

export function eventSentence(event: EventJson, datatypeOf: DatatypeOf): string {
  const template = TEMPLATES[event.kind];
  if (!template) {
    return event.text;
  }
  return template(event, datatypeOf);
}

export function witnessSentences(
  witness: EventJson[],
  itemDatatypes: Map<string, string>,
): string[] {
  const datatypeOf: DatatypeOf = (item) => itemDatatypes.get(item) ?? item;
  return witness.map((e, i) => `${i + 1}. ${eventSentence(e, datatypeOf)}`);
}
