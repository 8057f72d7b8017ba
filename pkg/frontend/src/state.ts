// UI session view: a pure projection of server state plus the message log.
// A reload rebuilds the identical view from GET /sessions/{id}.

import type { MessageReply, SessionState } from './api.js';

export interface Message {
  speaker: 'user' | 'system';
  text: string;
}

export interface UiSessionView {
  sessionId: string;
  messages: Message[];
  timeline: string[]; // image hashes, index 0 = original upload
  currentIndex: number; // always the top of the stack
  guidance: { s_img: number; s_text: number; steps: number };
  busy: boolean; // one in-flight message at a time
}

export function viewFromSession(state: SessionState): UiSessionView {
  // message bubbles carry text only; imagery lives in the timeline, so the
  // view stays a pure projection of the server session
  const messages: Message[] = state.dialogue.history.map((turn) => ({
    speaker: turn.speaker,
    text: turn.text,
  }));
  return {
    sessionId: state.id,
    messages,
    timeline: [...state.image_stack],
    currentIndex: state.image_stack.length - 1,
    guidance: {
      s_img: state.guidance.s_img,
      s_text: state.guidance.s_text,
      steps: state.guidance.steps,
    },
    busy: false,
  };
}

export function applyUserMessage(view: UiSessionView, text: string): UiSessionView {
  return { ...view, messages: [...view.messages, { speaker: 'user', text }], busy: true };
}

export function applyReply(view: UiSessionView, reply: MessageReply): UiSessionView {
  const messages = [...view.messages, { speaker: 'system' as const, text: reply.text }];
  let timeline = view.timeline;
  if (reply.kind === 'edited') {
    timeline = [...view.timeline, reply.image];
  } else if (reply.kind === 'forget_ack') {
    timeline = view.timeline.slice(0, -1);
  }
  if (timeline.length !== reply.stack_depth) {
    // server is authoritative; truncate/extend defensively
    timeline = timeline.slice(0, reply.stack_depth);
  }
  return {
    ...view,
    messages,
    timeline,
    currentIndex: timeline.length - 1,
    busy: false,
  };
}

export function canForget(view: UiSessionView): boolean {
  return view.timeline.length > 1 && !view.busy;
}

export function viewsEqual(a: UiSessionView, b: UiSessionView): boolean {
  return (
    a.sessionId === b.sessionId &&
    a.timeline.join(',') === b.timeline.join(',') &&
    a.currentIndex === b.currentIndex &&
    a.messages.length === b.messages.length &&
    a.messages.every(
      (m, i) => m.speaker === b.messages[i].speaker && m.text === b.messages[i].text,
    ) &&
    a.guidance.s_img === b.guidance.s_img &&
    a.guidance.s_text === b.guidance.s_text &&
    a.guidance.steps === b.guidance.steps
  );
}
