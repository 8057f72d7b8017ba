// DOM wiring for the chat client. All edits happen server-side; this file
// only projects server state into the page and forwards user actions.

import { ApiClient, ApiError } from './api.js';
import {
  applyReply,
  applyUserMessage,
  canForget,
  UiSessionView,
  viewFromSession,
} from './state.js';

export class ChatApp {
  private view: UiSessionView | null = null;

  constructor(
    private api: ApiClient,
    private root: Document,
  ) {}

  mount(): void {
    const upload = this.el<HTMLInputElement>('upload');
    upload.addEventListener('change', () => {
      const file = upload.files?.[0];
      if (file) void this.start(file);
    });
    this.el<HTMLButtonElement>('send').addEventListener('click', () => void this.send());
    this.el<HTMLInputElement>('message').addEventListener('keydown', (e) => {
      if ((e as KeyboardEvent).key === 'Enter') void this.send();
    });
    this.el<HTMLButtonElement>('forget').addEventListener('click', () => void this.forget());
    this.el<HTMLButtonElement>('apply-guidance').addEventListener(
      'click',
      () => void this.applyGuidance(),
    );
    this.render();
  }

  async start(file: Blob | Uint8Array): Promise<void> {
    const state = await this.api.createSession(file);
    this.view = viewFromSession(state);
    this.render();
  }

  async reload(): Promise<void> {
    if (!this.view) return;
    const state = await this.api.getSession(this.view.sessionId);
    this.view = viewFromSession(state);
    this.render();
  }

  async send(text?: string): Promise<void> {
    if (!this.view || this.view.busy) return;
    const box = this.el<HTMLInputElement>('message');
    const body = text ?? box.value.trim();
    if (!body) return;
    box.value = '';
    this.view = applyUserMessage(this.view, body);
    this.render();
    try {
      const reply = await this.api.sendMessage(this.view.sessionId, body);
      this.view = applyReply(this.view, reply);
    } catch (err) {
      this.view = { ...this.view, busy: false };
      this.showError(err);
    }
    this.render();
  }

  async forget(): Promise<void> {
    if (!this.view || !canForget(this.view)) return;
    await this.send('forget');
  }

  async applyGuidance(): Promise<void> {
    if (!this.view) return;
    const g = {
      s_img: Number(this.el<HTMLInputElement>('s-img').value),
      s_text: Number(this.el<HTMLInputElement>('s-text').value),
      steps: Number(this.el<HTMLInputElement>('steps').value),
    };
    try {
      await this.api.setGuidance(this.view.sessionId, g);
      this.view = { ...this.view, guidance: g };
    } catch (err) {
      this.showError(err);
    }
    this.render();
  }

  currentView(): UiSessionView | null {
    return this.view;
  }

  private el<T extends HTMLElement>(id: string): T {
    const node = this.root.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
  }

  private showError(err: unknown): void {
    const bar = this.el<HTMLElement>('error');
    bar.textContent = err instanceof ApiError ? `${err.status}: ${err.message}` : String(err);
  }

  private render(): void {
    const v = this.view;
    this.el<HTMLElement>('chat-panel').hidden = v === null;
    if (!v) return;

    const log = this.el<HTMLElement>('messages');
    log.textContent = '';
    for (const m of v.messages) {
      const bubble = this.root.createElement('div');
      bubble.className = `bubble ${m.speaker}`;
      bubble.textContent = m.text;
      log.appendChild(bubble);
    }

    const timeline = this.el<HTMLElement>('timeline');
    timeline.textContent = '';
    v.timeline.forEach((hash, i) => {
      const img = this.root.createElement('img');
      img.className = i === v.currentIndex ? 'version current' : 'version';
      img.src = this.api.imageUrl(hash);
      img.title = `version ${i + 1}`;
      timeline.appendChild(img);
    });

    const main = this.el<HTMLImageElement>('current-image');
    main.src = this.api.imageUrl(v.timeline[v.currentIndex]);

    this.el<HTMLButtonElement>('send').disabled = v.busy;
    this.el<HTMLButtonElement>('forget').disabled = !canForget(v);
    this.el<HTMLInputElement>('s-img').value = String(v.guidance.s_img);
    this.el<HTMLInputElement>('s-text').value = String(v.guidance.s_text);
    this.el<HTMLInputElement>('steps').value = String(v.guidance.steps);
  }
}

export function boot(serviceUrl: string, doc: Document): ChatApp {
  const app = new ChatApp(new ApiClient(serviceUrl), doc);
  app.mount();
  return app;
}
