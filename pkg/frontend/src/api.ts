// Typed client for the session service HTTP API. No extra endpoints:
// POST /sessions, POST /sessions/{id}/messages, POST /sessions/{id}/guidance,
// GET /sessions/{id}, GET /images/{hash}.png

export interface DialogueTurn {
  speaker: 'user' | 'system';
  text: string;
}

export interface GuidanceState {
  s_img: number;
  s_text: number;
  steps: number;
  eta?: number;
  seed?: number;
}

export interface SessionState {
  id: string;
  image_stack: string[];
  dialogue: { history: DialogueTurn[]; edit_count: number };
  guidance: GuidanceState;
  edit_count: number;
  current_image: string;
}

export type ReplyKind = 'question' | 'edited' | 'forget_ack' | 'chatter';

export interface MessageReply {
  kind: ReplyKind;
  text: string;
  image: string;
  instruction: string | null;
  stack_depth: number;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function parseOrThrow<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

// Multipart body built by hand: identical bytes in browsers and node, with
// no dependency on the runtime's FormData implementation.
export function multipartFile(
  data: Uint8Array,
  filename: string,
  contentType: string,
): { body: Uint8Array; contentType: string } {
  const boundary = `----chatbrush${Math.random().toString(36).slice(2)}`;
  const encoder = new TextEncoder();
  const head = encoder.encode(
    `--${boundary}\r\n` +
      `Content-Disposition: form-data; name="file"; filename="${filename}"\r\n` +
      `Content-Type: ${contentType}\r\n\r\n`,
  );
  const tail = encoder.encode(`\r\n--${boundary}--\r\n`);
  const body = new Uint8Array(head.length + data.length + tail.length);
  body.set(head, 0);
  body.set(data, head.length);
  body.set(tail, head.length + data.length);
  return { body, contentType: `multipart/form-data; boundary=${boundary}` };
}

export class ApiClient {
  constructor(private baseUrl: string) {}

  async createSession(file: Blob | Uint8Array, filename = 'upload.png'): Promise<SessionState> {
    const data = file instanceof Uint8Array ? file : new Uint8Array(await file.arrayBuffer());
    const type = file instanceof Uint8Array ? 'image/png' : file.type || 'image/png';
    const { body, contentType } = multipartFile(data, filename, type);
    const resp = await fetch(`${this.baseUrl}/sessions`, {
      method: 'POST',
      headers: { 'Content-Type': contentType },
      body: body as unknown as BodyInit,
    });
    return parseOrThrow<SessionState>(resp);
  }

  async getSession(id: string): Promise<SessionState> {
    return parseOrThrow<SessionState>(await fetch(`${this.baseUrl}/sessions/${id}`));
  }

  async sendMessage(id: string, text: string): Promise<MessageReply> {
    const resp = await fetch(`${this.baseUrl}/sessions/${id}/messages`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ text }),
    });
    return parseOrThrow<MessageReply>(resp);
  }

  async setGuidance(id: string, g: GuidanceState): Promise<void> {
    const resp = await fetch(`${this.baseUrl}/sessions/${id}/guidance`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ s_img: g.s_img, s_text: g.s_text, steps: g.steps, eta: g.eta ?? 0 }),
    });
    await parseOrThrow<unknown>(resp);
  }

  imageUrl(hash: string): string {
    return `${this.baseUrl}/images/${hash}.png`;
  }
}
