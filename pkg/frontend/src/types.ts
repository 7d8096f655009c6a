/** Payload types for the session service HTTP+JSON API. */

export type Verdict = 'first' | 'second' | 'indifferent';

export interface AttributeValue {
  name: string;
  value: string;
}

/** One configuration as the server renders it for humans. */
export interface RenderedConfiguration {
  attributes: AttributeValue[];
  assignment: number[];
  /** Derived real attributes (e.g. price) appear as extra numeric fields. */
  [extra: string]: unknown;
}

export interface SpecSummary {
  id: string;
  attributes: { name: string; cardinality: number; values?: string[] }[];
  hasDerived: boolean;
}

export interface QueryPayload {
  pair: [RenderedConfiguration, RenderedConfiguration];
  iteration: number;
  answered: number;
  pending: number;
}

export interface AnswerPayload {
  status: string;
  answered: number;
}

export interface Recommendation {
  recommendation: RenderedConfiguration;
  weights: number[];
}

export type SessionStatus =
  | 'loading'
  | 'awaitingAnswer'
  | 'solving'
  | 'done'
  | 'error';

/** Client-side mirror of one elicitation session. */
export interface ViewSession {
  sessionId: string;
  status: SessionStatus;
  currentPair: [RenderedConfiguration, RenderedConfiguration] | null;
  answeredCount: number;
  pendingCount: number;
  iteration: number;
  recommendation: Recommendation | null;
  error: string | null;
}
