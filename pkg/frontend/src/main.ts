// Console wiring: catalog-driven pickers, command submission, stream view.

import { ApiClient, CatalogPair, CatalogPlatform } from './api.js';
import { commandText, emptySelection, overflowLabel, Selection } from './command.js';
import { compassGrid, compassOption } from './compass.js';
import { View, Viewport } from './project.js';
import { drawScene } from './render.js';
import { connectStream, isStale, StreamHandle } from './stream.js';

const OVERFLOW_EXTRA = 5; // slider room past kmax for locomotion sizes

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const api = new ApiClient(window.location.origin);
const canvas = el<HTMLCanvasElement>('scene');
const ctx = canvas.getContext('2d')!;
const vp: Viewport = { width: canvas.width, height: canvas.height, scale: 220 };

let platform: CatalogPlatform | null = null;
let pair: CatalogPair | null = null;
let selection: Selection = emptySelection();
let stream: StreamHandle | null = null;
let sessionId: string | null = null;
let view: View = 'front';

function option(value: string, label = value): HTMLOptionElement {
  const o = document.createElement('option');
  o.value = value;
  o.textContent = label;
  return o;
}

function renderPairPicker(): void {
  const select = el<HTMLSelectElement>('pair');
  select.innerHTML = '';
  if (!platform) return;
  for (const p of platform.pairs) {
    select.append(option(`${p.origin}|${p.limb}`, `${p.limb} @ ${p.origin}`));
  }
  selectPair(platform.pairs[0] ?? null);
}

function selectPair(next: CatalogPair | null): void {
  pair = next;
  selection = emptySelection();
  if (pair) {
    selection.limb = pair.limb;
    selection.origin = pair.origin;
  }
  renderCompass();
  renderSize();
  renderSubmit();
}

function renderCompass(): void {
  const host = el<HTMLDivElement>('compass');
  host.innerHTML = '';
  if (!pair) return;
  for (const level of compassGrid()) {
    const grid = document.createElement('div');
    grid.className = 'level';
    for (const row of level) {
      for (const pull of row) {
        const opt = compassOption(pull, pair);
        const cell = document.createElement('button');
        cell.className = 'cell';
        cell.title = opt.name;
        cell.disabled = !opt.available;
        if (selection.direction === opt.name) cell.classList.add('active');
        cell.textContent = opt.available ? String(opt.kmax) : '';
        cell.onclick = () => {
          selection.direction = opt.name;
          renderCompass();
          renderSize();
          renderSubmit();
        };
        grid.append(cell);
      }
    }
    host.append(grid);
  }
}

function currentKmax(): number {
  if (!pair || !selection.direction) return 0;
  return pair.kmax[selection.direction] ?? 0;
}

function renderSize(): void {
  const slider = el<HTMLInputElement>('size');
  const label = el<HTMLSpanElement>('size-label');
  const kmax = currentKmax();
  const mobile = platform?.mobile ?? false;
  slider.min = '1';
  slider.max = String(Math.max(1, kmax + (mobile ? OVERFLOW_EXTRA : 0)));
  if (selection.size === null) selection.size = 1;
  if (selection.size > Number(slider.max)) {
    selection.size = Number(slider.max);
  }
  slider.value = String(selection.size);
  const over = overflowLabel(selection.size, kmax);
  label.textContent = over ? `${selection.size} (${over})` : String(selection.size);
}

function renderSubmit(): void {
  const button = el<HTMLButtonElement>('submit');
  const preview = el<HTMLElement>('preview');
  const text = commandText(selection);
  button.disabled = text === null || sessionId === null;
  preview.textContent = text ?? 'pick limb, direction and size';
}

function pushHistory(text: string, accepted: boolean, detail: string): void {
  const list = el<HTMLUListElement>('history');
  const item = document.createElement('li');
  item.className = accepted ? 'ok' : 'rejected';
  item.textContent = `${text}  ${detail}`;
  list.prepend(item);
}

async function submit(): Promise<void> {
  const text = commandText(selection);
  if (text === null || sessionId === null) return;
  const res = await api.submitCommand(sessionId, text);
  if (res.accepted && res.resolution) {
    const r = res.resolution;
    const extra = r.translate
      ? `, translate ${r.translate.direction} x${r.translate.x}`
      : '';
    pushHistory(text, true, `ok: ${r.steps} steps${extra}`);
  } else {
    pushHistory(text, false, `rejected: ${res.error ?? 'unknown error'}`);
  }
}

function redraw(): void {
  if (!platform) return;
  const state = stream?.state ?? null;
  drawScene(ctx, platform, state?.latest ?? null, view, vp,
    state ? isStale(state, Date.now()) : true);
}

async function start(): Promise<void> {
  const catalog = await api.getCatalog();
  const picker = el<HTMLSelectElement>('platform');
  picker.innerHTML = '';
  for (const p of catalog.platforms) picker.append(option(p.name));

  const activate = async (name: string) => {
    platform = catalog.platforms.find((p) => p.name === name) ?? null;
    if (!platform) return;
    stream?.close();
    const session = await api.createSession(platform.name);
    sessionId = session.session_id;
    stream = connectStream(api.streamUrl(sessionId), redraw);
    renderPairPicker();
    renderSubmit();
  };

  picker.onchange = () => activate(picker.value);
  el<HTMLSelectElement>('pair').onchange = (ev) => {
    const [origin, limb] = (ev.target as HTMLSelectElement).value.split('|');
    selectPair(
      platform?.pairs.find((p) => p.origin === origin && p.limb === limb)
      ?? null);
  };
  el<HTMLInputElement>('size').oninput = (ev) => {
    selection.size = Number((ev.target as HTMLInputElement).value);
    renderSize();
    renderSubmit();
  };
  el<HTMLButtonElement>('submit').onclick = () => void submit();
  el<HTMLButtonElement>('cancel').onclick = () => {
    if (sessionId) void api.cancel(sessionId);
  };
  for (const name of ['front', 'side', 'top'] as View[]) {
    el<HTMLButtonElement>(`view-${name}`).onclick = () => {
      view = name;
      redraw();
    };
  }

  if (catalog.platforms.length > 0) await activate(catalog.platforms[0].name);
  setInterval(redraw, 250); // staleness repaint even without messages
}

void start();
