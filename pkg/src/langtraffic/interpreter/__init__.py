"""Language interpretation: text -> structured scenario codes."""

from .client import ChatClient, HttpChatClient, OfflineEditClient, StubChatClient, TransportError
from .fallback import GrammarError, fallback_interpret
from .parser import (
    BlockParseError,
    clamp_vectors,
    extract_vectors,
    parse_structured_block,
    render_structured_block,
)
from .pipeline import (
    InterpreterOutput,
    ResponseParseError,
    interpret,
    interpret_edit,
)
from .templates import PromptMode, PromptTemplate, edit_request_text, load_template

__all__ = [
    "ChatClient",
    "HttpChatClient",
    "OfflineEditClient",
    "StubChatClient",
    "TransportError",
    "GrammarError",
    "fallback_interpret",
    "BlockParseError",
    "clamp_vectors",
    "extract_vectors",
    "parse_structured_block",
    "render_structured_block",
    "InterpreterOutput",
    "ResponseParseError",
    "interpret",
    "interpret_edit",
    "PromptMode",
    "PromptTemplate",
    "edit_request_text",
    "load_template",
]
