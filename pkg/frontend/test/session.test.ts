import { describe, expect, it } from 'vitest';

import { SessionApi } from '../src/api';
import { SessionController } from '../src/session';
import { diffAttributeNames } from '../src/ui';
import type { QueryPayload, RenderedConfiguration } from '../src/types';

function cfg(type: string, cpu: string, price: number): RenderedConfiguration {
  return {
    attributes: [
      { name: 'type', value: type },
      { name: 'cpu', value: cpu },
    ],
    assignment: [0, 0],
    price,
  };
}

type Route = (init?: RequestInit) => { status: number; body: unknown };

/** Minimal scripted server: maps "METHOD path" to a queue of responses. */
function fakeFetch(routes: Record<string, Route[] | Route>) {
  const calls: string[] = [];
  const impl = async (input: string, init?: RequestInit): Promise<Response> => {
    const key = `${init?.method ?? 'GET'} ${input}`;
    calls.push(key);
    const route = routes[key];
    if (!route) throw new Error(`unexpected request ${key}`);
    const handler = Array.isArray(route)
      ? (route.length > 1 ? route.shift()! : route[0])
      : route;
    const { status, body } = handler(init);
    return new Response(JSON.stringify(body), {
      status,
      headers: { 'content-type': 'application/json' },
    });
  };
  return { impl, calls };
}

const pairPayload: QueryPayload = {
  pair: [cfg('Laptop', 'fast', 1.2), cfg('Tower', 'slow', 0.9)],
  iteration: 1,
  answered: 0,
  pending: 1,
};

describe('SessionController', () => {
  it('starts a session and polls through 202 to the first pair', async () => {
    const { impl, calls } = fakeFetch({
      'POST /sessions': () => ({ status: 200, body: { sessionId: 'abc' } }),
      'GET /sessions/abc/query': [
        () => ({ status: 202, body: { status: 'solving' } }),
        () => ({ status: 200, body: pairPayload }),
      ],
    });
    const controller = new SessionController(new SessionApi('', impl), {
      sleep: async () => {},
    });
    const view = await controller.start('pc', 2, 10);
    expect(view.status).toBe('awaitingAnswer');
    expect(view.currentPair?.[0].attributes[0].value).toBe('Laptop');
    expect(calls.filter((c) => c.includes('/query')).length).toBe(2);
  });

  it('submits a verdict and advances to the next pair', async () => {
    const { impl } = fakeFetch({
      'POST /sessions': () => ({ status: 200, body: { sessionId: 's' } }),
      'GET /sessions/s/query': [
        () => ({ status: 200, body: pairPayload }),
        () => ({ status: 200, body: { ...pairPayload, answered: 1, iteration: 2 } }),
      ],
      'POST /sessions/s/answer': () => ({
        status: 200,
        body: { status: 'solving', answered: 1 },
      }),
    });
    const controller = new SessionController(new SessionApi('', impl), {
      sleep: async () => {},
    });
    await controller.start('pc', 2, 10);
    const view = await controller.answer('first');
    expect(view.answeredCount).toBe(1);
    expect(view.status).toBe('awaitingAnswer');
  });

  it('rejects verdicts outside the allowed set', async () => {
    const { impl } = fakeFetch({
      'POST /sessions': () => ({ status: 200, body: { sessionId: 's' } }),
      'GET /sessions/s/query': () => ({ status: 200, body: pairPayload }),
    });
    const controller = new SessionController(new SessionApi('', impl), {
      sleep: async () => {},
    });
    await controller.start('pc', 2, 10);
    await expect(
      controller.answer('best' as never),
    ).rejects.toThrow(/invalid verdict/);
  });

  it('switches to the recommendation view when the session is gone', async () => {
    const rec = { recommendation: cfg('Tower', 'fast', 2.0), weights: [1, 2] };
    const { impl } = fakeFetch({
      'POST /sessions': () => ({ status: 200, body: { sessionId: 's' } }),
      'GET /sessions/s/query': () => ({ status: 410, body: { detail: 'gone' } }),
      'POST /sessions/s/finish': () => ({ status: 200, body: rec }),
    });
    const controller = new SessionController(new SessionApi('', impl), {
      sleep: async () => {},
    });
    const view = await controller.start('pc', 2, 10);
    expect(view.status).toBe('done');
    expect(view.recommendation?.recommendation.attributes[0].value).toBe('Tower');
  });

  it('surfaces server errors without fabricating pairs', async () => {
    const { impl } = fakeFetch({
      'POST /sessions': () => ({ status: 404, body: { detail: 'unknown spec' } }),
    });
    const controller = new SessionController(new SessionApi('', impl), {
      sleep: async () => {},
    });
    const view = await controller.start('ghost', 2, 10);
    expect(view.status).toBe('error');
    expect(view.error).toContain('unknown spec');
    expect(view.currentPair).toBeNull();
  });
});

describe('diffAttributeNames', () => {
  it('flags only differing attributes', () => {
    const a = cfg('Laptop', 'fast', 1);
    const b = cfg('Laptop', 'slow', 1);
    expect(diffAttributeNames(a, b)).toEqual(new Set(['cpu']));
  });

  it('is empty for identical cards', () => {
    const a = cfg('Laptop', 'fast', 1);
    expect(diffAttributeNames(a, a).size).toBe(0);
  });
});
