/** Page wiring: catalog picker, verdict buttons, session lifecycle. */

import { SessionApi } from './api';
import { SessionController } from './session';
import { render } from './ui';
import type { Verdict } from './types';

const api = new SessionApi('');
let controller: SessionController | null = null;

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

async function boot(): Promise<void> {
  const specSelect = byId<HTMLSelectElement>('spec');
  const startButton = byId<HTMLButtonElement>('start');
  const finishButton = byId<HTMLButtonElement>('finish');
  const stage = byId<HTMLDivElement>('stage');
  const answers = byId<HTMLDivElement>('answers');

  const specs = await api.listSpecs();
  for (const spec of specs) {
    const option = document.createElement('option');
    option.value = spec.id;
    option.textContent = spec.id;
    specSelect.appendChild(option);
  }

  const sync = () => {
    if (!controller) return;
    const view = controller.state;
    render(stage, view);
    answers.style.display = view.status === 'awaitingAnswer' ? 'flex' : 'none';
    finishButton.disabled = view.status === 'done' || view.status === 'loading';
  };

  startButton.addEventListener('click', async () => {
    controller = new SessionController(api);
    controller.onChange(sync);
    startButton.disabled = true;
    await controller.start(specSelect.value, 2, 20);
    startButton.disabled = false;
  });

  finishButton.addEventListener('click', async () => {
    if (controller) await controller.finish();
  });

  for (const verdict of ['first', 'indifferent', 'second'] as Verdict[]) {
    byId<HTMLButtonElement>(`answer-${verdict}`).addEventListener('click', async () => {
      if (controller) await controller.answer(verdict);
    });
  }
}

document.addEventListener('DOMContentLoaded', () => {
  boot().catch((err) => {
    const stage = document.getElementById('stage');
    if (stage) stage.textContent = `Failed to load: ${err}`;
  });
});
