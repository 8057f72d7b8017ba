import { describe, expect, it } from 'vitest';

import type { MessageReply, SessionState } from '../src/api.js';
import {
  applyReply,
  applyUserMessage,
  canForget,
  viewFromSession,
  viewsEqual,
} from '../src/state.js';

function session(stack: string[], history: { speaker: 'user' | 'system'; text: string }[] = []): SessionState {
  return {
    id: 'abc',
    image_stack: stack,
    dialogue: { history, edit_count: stack.length - 1 },
    guidance: { s_img: 1.5, s_text: 7.5, steps: 20 },
    edit_count: stack.length - 1,
    current_image: stack[stack.length - 1],
  };
}

function reply(kind: MessageReply['kind'], image: string, depth: number): MessageReply {
  return { kind, text: 'ok', image, instruction: null, stack_depth: depth };
}

describe('view projection', () => {
  it('upload shows exactly one version', () => {
    const v = viewFromSession(session(['h0']));
    expect(v.timeline).toEqual(['h0']);
    expect(v.currentIndex).toBe(0);
    expect(v.messages).toEqual([]);
    expect(canForget(v)).toBe(false);
  });

  it('edited reply appends a timeline version', () => {
    let v = viewFromSession(session(['h0']));
    v = applyUserMessage(v, 'make the circle blue');
    expect(v.busy).toBe(true);
    v = applyReply(v, reply('edited', 'h1', 2));
    expect(v.timeline).toEqual(['h0', 'h1']);
    expect(v.currentIndex).toBe(1);
    expect(v.busy).toBe(false);
    expect(canForget(v)).toBe(true);
  });

  it('question leaves the timeline unchanged', () => {
    let v = viewFromSession(session(['h0']));
    v = applyUserMessage(v, 'change it');
    v = applyReply(v, { kind: 'question', text: 'which object?', image: 'h0', instruction: null, stack_depth: 1 });
    expect(v.timeline).toEqual(['h0']);
    expect(v.messages.at(-1)?.text).toBe('which object?');
  });

  it('forget shrinks the timeline by one', () => {
    let v = viewFromSession(session(['h0']));
    v = applyReply(applyUserMessage(v, 'make the background blue'), reply('edited', 'h1', 2));
    v = applyReply(applyUserMessage(v, 'forget'), reply('forget_ack', 'h0', 1));
    expect(v.timeline).toEqual(['h0']);
    expect(v.currentIndex).toBe(0);
    expect(canForget(v)).toBe(false);
  });

  it('rebuilding from server state matches the incremental view', () => {
    let v = viewFromSession(session(['h0']));
    v = applyUserMessage(v, 'make the background blue');
    v = applyReply(v, {
      kind: 'edited',
      text: 'okay, i will change the background to blue.',
      image: 'h1',
      instruction: 'change the background to blue',
      stack_depth: 2,
    });
    const rebuilt = viewFromSession(
      session(['h0', 'h1'], [
        { speaker: 'user', text: 'make the background blue' },
        { speaker: 'system', text: 'okay, i will change the background to blue.' },
      ]),
    );
    expect(viewsEqual(v, rebuilt)).toBe(true);
  });
});
