/**
 * Client-side session controller.
 *
 * The UI state is a pure function of the last server response; this class
 * never invents pairs locally. While the server reports "solving" it polls
 * with backoff (500 ms base, capped exponential growth). Only the allowed
 * verdicts {first, second, indifferent} can ever be submitted.
 */

import { ApiError, SessionApi } from './api';
import type { Verdict, ViewSession } from './types';

const VERDICTS: ReadonlySet<string> = new Set(['first', 'second', 'indifferent']);

export interface ControllerOptions {
  basePollMs?: number;
  maxPollMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class SessionController {
  private view: ViewSession;
  private readonly basePollMs: number;
  private readonly maxPollMs: number;
  private readonly sleep: (ms: number) => Promise<void>;
  private listeners: ((view: ViewSession) => void)[] = [];

  constructor(private readonly api: SessionApi, options: ControllerOptions = {}) {
    this.basePollMs = options.basePollMs ?? 500;
    this.maxPollMs = options.maxPollMs ?? 4000;
    this.sleep = options.sleep ?? defaultSleep;
    this.view = {
      sessionId: '',
      status: 'loading',
      currentPair: null,
      answeredCount: 0,
      pendingCount: 0,
      iteration: 0,
      recommendation: null,
      error: null,
    };
  }

  get state(): ViewSession {
    return { ...this.view };
  }

  onChange(listener: (view: ViewSession) => void): void {
    this.listeners.push(listener);
  }

  private update(patch: Partial<ViewSession>): void {
    this.view = { ...this.view, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  /** POST /sessions then poll until the first pair is available. */
  async start(specId: string, k: number, T: number): Promise<ViewSession> {
    try {
      const sessionId = await this.api.createSession(specId, k, T);
      this.update({ sessionId, status: 'solving' });
      await this.pollUntilReady();
    } catch (err) {
      this.fail(err);
    }
    return this.state;
  }

  /** Submit a verdict for the displayed pair, then fetch the next state. */
  async answer(verdict: Verdict): Promise<ViewSession> {
    if (!VERDICTS.has(verdict)) {
      throw new Error(`invalid verdict: ${verdict}`);
    }
    if (this.view.status !== 'awaitingAnswer' || !this.view.currentPair) {
      throw new Error('no pair is awaiting an answer');
    }
    try {
      const ack = await this.api.submitAnswer(this.view.sessionId, verdict);
      this.update({
        answeredCount: ack.answered,
        currentPair: null,
        status: ack.status === 'done' ? 'done' : 'solving',
      });
      if (ack.status === 'done') {
        const recommendation = await this.api.finish(this.view.sessionId);
        this.update({ status: 'done', recommendation });
      } else {
        await this.pollUntilReady();
      }
    } catch (err) {
      this.fail(err);
    }
    return this.state;
  }

  /** Stop early and fetch the current best recommendation. */
  async finish(): Promise<ViewSession> {
    try {
      const recommendation = await this.api.finish(this.view.sessionId);
      this.update({ status: 'done', recommendation, currentPair: null });
    } catch (err) {
      this.fail(err);
    }
    return this.state;
  }

  private async pollUntilReady(): Promise<void> {
    let delay = this.basePollMs;
    for (;;) {
      let payload;
      try {
        payload = await this.api.getQuery(this.view.sessionId);
      } catch (err) {
        if (err instanceof ApiError && err.status === 410) {
          // session finished server-side: surface the recommendation
          const recommendation = await this.api.finish(this.view.sessionId);
          this.update({ status: 'done', recommendation, currentPair: null });
          return;
        }
        throw err;
      }
      if (payload !== null) {
        this.update({
          status: 'awaitingAnswer',
          currentPair: payload.pair,
          pendingCount: payload.pending,
          iteration: payload.iteration,
          answeredCount: payload.answered,
        });
        return;
      }
      this.update({ status: 'solving' });
      await this.sleep(delay);
      delay = Math.min(delay * 1.5, this.maxPollMs);
    }
  }

  private fail(err: unknown): void {
    const message = err instanceof Error ? err.message : String(err);
    this.update({ status: 'error', error: message });
  }
}
