"""HTTP session service: dialogue -> explicit instruction -> guided edit.

Endpoints:
    POST /sessions                  multipart image upload -> new session
    POST /sessions/{id}/messages    {"text": ...} -> question | edited |
                                    forget_ack | chatter reply
    POST /sessions/{id}/guidance    {"s_img", "s_text", "steps"[, "eta"]}
    GET  /sessions/{id}             full session state
    GET  /images/{hash}.png         stored PNG bytes

Per-session edits are serialized with a lock; distinct sessions run in
parallel (endpoints are sync and execute on the thread pool).
"""
import threading

from fastapi import FastAPI, HTTPException, Request, Response, UploadFile
from pydantic import BaseModel

from chatbrush import DataError, ModelError
from chatbrush.dialogue import respond
from chatbrush.diffusion import GuidanceConfig, ddim_sample
from chatbrush.imaging import decode_upload, from_png_bytes, to_png_bytes

from .store import Store


class MessageBody(BaseModel):
    text: str


class GuidanceBody(BaseModel):
    s_img: float
    s_text: float
    steps: int
    eta: float = 0.0


def session_view(session):
    d = session.to_json()
    d["edit_count"] = session.edit_count
    d["current_image"] = session.image_stack[-1]
    return d


def create_app(stack, store_root, default_guidance=None, resolution=64):
    app = FastAPI(title="chatbrush session service")
    from fastapi.middleware.cors import CORSMiddleware
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    store = Store(store_root)
    default_guidance = default_guidance or GuidanceConfig()
    locks = {}
    locks_guard = threading.Lock()

    def lock_for(session_id):
        with locks_guard:
            return locks.setdefault(session_id, threading.Lock())

    def load_or_404(session_id):
        try:
            return store.load_session(session_id)
        except (KeyError, DataError):
            raise HTTPException(status_code=404, detail="unknown session")

    @app.post("/sessions", status_code=201)
    def create_session(file: UploadFile):
        raw = file.file.read()
        try:
            img = decode_upload(raw, resolution)
        except DataError as e:
            raise HTTPException(status_code=400, detail=str(e))
        upload_hash = store.put_upload(raw)
        image_hash = store.put_image(to_png_bytes(img))
        session = store.new_session(image_hash, default_guidance,
                                    original_upload=upload_hash)
        return session_view(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return session_view(load_or_404(session_id))

    @app.post("/sessions/{session_id}/guidance")
    def set_guidance(session_id: str, body: GuidanceBody):
        with lock_for(session_id):
            session = load_or_404(session_id)
            try:
                cfg = GuidanceConfig(s_img=body.s_img, s_text=body.s_text,
                                     steps=body.steps, eta=body.eta,
                                     seed=session.guidance.seed)
                cfg.validate()
            except DataError as e:
                raise HTTPException(status_code=400, detail=str(e))
            session.guidance = cfg
            store.save_session(session)
            return {"ok": True, "guidance": cfg.to_json()}

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageBody):
        with lock_for(session_id):
            session = load_or_404(session_id)
            turn, state, instr = respond(session.dialogue, body.text)
            reply = {"text": turn.text, "instruction": None,
                     "image": session.image_stack[-1]}
            if instr is None:
                reply["kind"] = "question" if turn.text.endswith("?") else "chatter"
            elif instr.forget:
                if len(session.image_stack) <= 1:
                    # dialogue state desynchronised from the stack; refuse
                    state.mark_forgotten()
                    reply["kind"] = "chatter"
                else:
                    session.image_stack.pop()
                    state.mark_forgotten()
                    reply["kind"] = "forget_ack"
                    reply["instruction"] = instr.text
                    reply["image"] = session.image_stack[-1]
            else:
                current = from_png_bytes(store.get_image(session.image_stack[-1]))
                try:
                    edited = ddim_sample(stack, current, instr.text, session.guidance)
                except ModelError as e:
                    raise HTTPException(status_code=503, detail=str(e))
                new_hash = store.put_image(to_png_bytes(edited))
                session.image_stack.append(new_hash)
                state.mark_applied()
                reply["kind"] = "edited"
                reply["instruction"] = instr.text
                reply["image"] = new_hash
            session.dialogue = state
            store.save_session(session)
            reply["stack_depth"] = len(session.image_stack)
            return reply

    @app.get("/images/{digest}.png")
    def get_image(digest: str):
        try:
            data = store.get_image(digest)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown image")
        return Response(content=data, media_type="image/png")

    @app.exception_handler(DataError)
    def data_error_handler(request: Request, exc: DataError):
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    app.state.store = store
    app.state.stack = stack
    return app
