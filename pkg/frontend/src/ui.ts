/**
 * DOM rendering: two configuration cards side by side with differing
 * attributes highlighted, verdict buttons, progress, and the final
 * recommendation card.
 */

import type { RenderedConfiguration, ViewSession } from './types';

function extraFields(config: RenderedConfiguration): [string, number][] {
  return Object.entries(config)
    .filter(([key, value]) => key !== 'attributes' && key !== 'assignment'
      && typeof value === 'number')
    .map(([key, value]) => [key, value as number]);
}

export function diffAttributeNames(
  a: RenderedConfiguration,
  b: RenderedConfiguration,
): Set<string> {
  const byName = new Map(b.attributes.map((attr) => [attr.name, attr.value]));
  const out = new Set<string>();
  for (const attr of a.attributes) {
    if (byName.get(attr.name) !== attr.value) out.add(attr.name);
  }
  return out;
}

export function configCard(
  config: RenderedConfiguration,
  highlight: Set<string>,
  title: string,
): HTMLElement {
  const card = document.createElement('section');
  card.className = 'card';
  const heading = document.createElement('h3');
  heading.textContent = title;
  card.appendChild(heading);
  const list = document.createElement('dl');
  for (const attr of config.attributes) {
    const dt = document.createElement('dt');
    dt.textContent = attr.name;
    const dd = document.createElement('dd');
    dd.textContent = attr.value;
    if (highlight.has(attr.name)) {
      dt.classList.add('diff');
      dd.classList.add('diff');
    }
    list.appendChild(dt);
    list.appendChild(dd);
  }
  for (const [name, value] of extraFields(config)) {
    const dt = document.createElement('dt');
    dt.textContent = name;
    const dd = document.createElement('dd');
    dd.textContent = value.toFixed(3);
    list.appendChild(dt);
    list.appendChild(dd);
  }
  card.appendChild(list);
  return card;
}

export function render(root: HTMLElement, view: ViewSession): void {
  root.replaceChildren();

  const status = document.createElement('p');
  status.className = 'status';
  root.appendChild(status);

  if (view.status === 'error') {
    status.textContent = `Something went wrong: ${view.error}. Retrying may help.`;
    status.classList.add('error');
    return;
  }
  if (view.status === 'loading') {
    status.textContent = 'Loading catalog…';
    return;
  }
  if (view.status === 'solving') {
    status.textContent = 'Computing the next options…';
    status.classList.add('solving');
    return;
  }
  if (view.status === 'done') {
    status.textContent = `Done after ${view.answeredCount} answers.`;
    if (view.recommendation) {
      const rec = configCard(view.recommendation.recommendation, new Set(), 'Recommended for you');
      rec.classList.add('recommendation');
      root.appendChild(rec);
    }
    return;
  }

  // awaitingAnswer
  status.textContent =
    `Comparison ${view.answeredCount + 1} (iteration ${view.iteration}, `
    + `${view.pendingCount} pending)`;
  if (!view.currentPair) return;
  const [left, right] = view.currentPair;
  const wrap = document.createElement('div');
  wrap.className = 'pair';
  wrap.appendChild(configCard(left, diffAttributeNames(left, right), 'Option A'));
  wrap.appendChild(configCard(right, diffAttributeNames(right, left), 'Option B'));
  root.appendChild(wrap);
}
