// End-to-end round trip against the real session service:
// upload -> ambiguous message -> clarify -> edit -> forget, then a reload
// comparison. The service runs as a child process with a tiny checkpoint.
import { spawn, spawnSync, type ChildProcess } from 'node:child_process';
import { mkdtempSync, readFileSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join, resolve } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { boot, ChatApp } from '../src/app.js';
import { viewFromSession, viewsEqual, type UiSessionView } from '../src/state.js';

const PKG_ROOT = resolve(__dirname, '../..');
const PORT = 8741;
const SERVICE = `http://127.0.0.1:${PORT}`;

// 1x1 red-pixel PNG
const TINY_PNG = Buffer.from(
  'iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR42mP8z8BQDwAEhQGAhKmMIQAAAABJRU5ErkJggg==',
  'base64',
);

let server: ChildProcess | null = null;
let workDir: string;

async function waitFor<T>(probe: () => T | Promise<T>, timeoutMs = 90_000): Promise<T> {
  const start = Date.now();
  let lastErr: unknown = new Error('timeout');
  while (Date.now() - start < timeoutMs) {
    try {
      const value = await probe();
      if (value) return value;
    } catch (err) {
      lastErr = err;
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  throw lastErr;
}

function domFromIndexHtml(): void {
  const html = readFileSync(join(PKG_ROOT, 'frontend', 'index.html'), 'utf-8');
  const body = html.slice(html.indexOf('<body>') + 6, html.indexOf('<script'));
  document.body.innerHTML = body;
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), 'chatbrush-ui-'));
  const mk = spawnSync('python3', [join(PKG_ROOT, 'scripts', 'make_tiny_ckpt.py'), workDir], {
    cwd: PKG_ROOT,
  });
  if (mk.status !== 0) throw new Error(`checkpoint build failed: ${mk.stderr}`);
  server = spawn(
    'python3',
    [
      '-m', 'chatbrush.cli', 'serve',
      '--checkpoint-dir', workDir,
      '--store', join(workDir, 'store'),
      '--port', String(PORT),
    ],
    { cwd: PKG_ROOT, stdio: 'inherit' },
  );
  await waitFor(async () => {
    const resp = await fetch(`${SERVICE}/sessions/does-not-exist`);
    return resp.status === 404;
  });
}, 180_000);

afterAll(() => {
  server?.kill('SIGTERM');
  rmSync(workDir, { recursive: true, force: true });
});

async function settled(app: ChatApp): Promise<UiSessionView> {
  return waitFor(() => {
    const v = app.currentView();
    return v && !v.busy ? v : null;
  }) as Promise<UiSessionView>;
}

describe('full UI round trip', () => {
  it('upload, clarify, edit, forget, reload', async () => {
    domFromIndexHtml();
    const app = boot(SERVICE, document);
    const api = new ApiClient(SERVICE);

    // upload -> timeline shows exactly 1 version
    await app.start(new Uint8Array(TINY_PNG));
    let view = await settled(app);
    expect(view.timeline.length).toBe(1);
    const originalHash = view.timeline[0];
    expect(document.querySelectorAll('#timeline img').length).toBe(1);
    const forgetButton = document.getElementById('forget') as HTMLButtonElement;
    expect(forgetButton.disabled).toBe(true);

    // fast sampling for the test: adjust guidance through the sliders
    (document.getElementById('s-img') as HTMLInputElement).value = '1.5';
    (document.getElementById('s-text') as HTMLInputElement).value = '4';
    (document.getElementById('steps') as HTMLInputElement).value = '2';
    await app.applyGuidance();
    const serverState = await api.getSession(view.sessionId);
    expect(serverState.guidance.steps).toBe(2);

    // ambiguous message -> question bubble, timeline unchanged
    const input = document.getElementById('message') as HTMLInputElement;
    input.value = 'change it to something else';
    (document.getElementById('send') as HTMLButtonElement).click();
    view = await waitFor(() => {
      const v = app.currentView();
      return v && !v.busy && v.messages.length >= 2 ? v : null;
    }) as UiSessionView;
    expect(view.messages.at(-1)?.speaker).toBe('system');
    expect(view.messages.at(-1)?.text.endsWith('?')).toBe(true);
    expect(view.timeline.length).toBe(1);

    // clarification completes the instruction -> edited, timeline grows
    input.value = 'the circle, to blue';
    (document.getElementById('send') as HTMLButtonElement).click();
    view = await waitFor(() => {
      const v = app.currentView();
      return v && !v.busy && v.timeline.length === 2 ? v : null;
    }) as UiSessionView;
    expect(view.messages.at(-1)?.text).toContain('recolor the circle to blue');
    expect(document.querySelectorAll('#timeline img').length).toBe(2);
    expect(forgetButton.disabled).toBe(false);

    // forget -> timeline back to 1, displayed image equals the original bytes
    forgetButton.click();
    view = await waitFor(() => {
      const v = app.currentView();
      return v && !v.busy && v.timeline.length === 1 ? v : null;
    }) as UiSessionView;
    expect(view.timeline).toEqual([originalHash]);
    const shown = document.getElementById('current-image') as HTMLImageElement;
    expect(shown.src).toBe(api.imageUrl(originalHash));
    const [a, b] = await Promise.all([
      fetch(api.imageUrl(originalHash)).then((r) => r.arrayBuffer()),
      fetch(shown.src).then((r) => r.arrayBuffer()),
    ]);
    expect(Buffer.from(a).equals(Buffer.from(b))).toBe(true);

    // reload: view rebuilt from server state equals the live view
    const rebuilt = viewFromSession(await api.getSession(view.sessionId));
    expect(viewsEqual(view, rebuilt)).toBe(true);
  }, 180_000);
});
