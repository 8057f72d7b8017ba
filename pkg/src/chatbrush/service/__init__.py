from .app import create_app, session_view
from .store import DEFAULT_STORE, STORE_ENV, Session, Store, store_root_from_env
