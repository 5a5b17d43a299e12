"""LLM-backed model generation with an error-repair loop.

The conversation with the provider is an append-only value: every step
yields a new ``Conversation`` and never mutates an old one, so a failed or
cancelled generation leaves the caller's conversation exactly as it was.

Providers are exchangeable behind a one-method interface. ``MockProvider``
replays scripted replies for tests and demos; ``HttpChatProvider`` speaks
the common chat-completions wire format. The API key is read from an
environment variable at call time and is never stored on any object that
could end up serialized.
"""

from __future__ import annotations

import json
import os
import re
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Protocol

import requests

from .convert import powl_to_pn
from .pcl import PclError, lexes, run_pcl
from .powl import PowlNode, validate
from .semantics import check_soundness

MAX_DESCRIPTION_CHARS = 50_000
DEFAULT_MAX_ITERATIONS = 5


class PromptError(Exception):
    """The process description cannot be turned into a prompt."""


class NoCodeFound(Exception):
    """A provider reply contains nothing that looks like a program."""


class ProviderError(Exception):
    """The provider failed to deliver a usable reply."""


class GenerationExhausted(Exception):
    """All repair iterations failed to produce a valid model."""

    def __init__(self, conversation: Conversation, attempts: int,
                 last_error: Exception | None):
        super().__init__(
            f"no valid model after {attempts} attempts"
            + (f": {last_error}" if last_error is not None else ""))
        self.conversation = conversation
        self.attempts = attempts
        self.last_error = last_error


@dataclass(frozen=True)
class Message:
    role: str  # "system" | "user" | "assistant"
    content: str


@dataclass(frozen=True)
class Conversation:
    """Immutable message history plus the number of repair iterations."""

    messages: tuple[Message, ...] = ()
    iteration_count: int = 0

    @classmethod
    def start(cls, system: str, initial_user: str) -> Conversation:
        return cls(messages=(Message("system", system),
                             Message("user", initial_user)))

    def with_message(self, role: str, content: str) -> Conversation:
        return Conversation(self.messages + (Message(role, content),),
                            self.iteration_count)

    def with_repair(self, content: str) -> Conversation:
        """Append a corrective user message and count the iteration."""
        return Conversation(self.messages + (Message("user", content),),
                            self.iteration_count + 1)

    def extends(self, other: Conversation) -> bool:
        """True if this conversation is ``other`` plus zero or more messages."""
        return self.messages[:len(other.messages)] == other.messages


@dataclass(frozen=True)
class ProviderConfig:
    """Connection settings for an HTTP chat provider.

    ``api_key_env`` holds the NAME of the environment variable with the
    key, never the key itself, so configs are safe to log and store.
    """

    endpoint: str
    model_name: str
    api_key_env: str = "LLM_API_KEY"
    temperature: float = 0.2
    timeout_s: float = 120.0
    transport_retries: int = 2

    def __post_init__(self):
        if not self.endpoint.strip():
            raise ValueError("endpoint must be non-empty")
        if not self.model_name.strip():
            raise ValueError("model_name must be non-empty")
        if not self.api_key_env.strip():
            raise ValueError("api_key_env must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature must be in [0, 2], "
                             f"got {self.temperature}")
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")
        if self.transport_retries < 0:
            raise ValueError("transport_retries must be non-negative")


@dataclass(frozen=True)
class GenerationResult:
    model: PowlNode
    source: str  # the accepted program text
    conversation: Conversation
    attempts: int  # provider calls made by this generate/refine call


class Provider(Protocol):
    def complete(self, conversation: Conversation) -> str: ...


# ---------------------------------------------------------------------------
# prompt assembly


def _load_template(name: str) -> str:
    return (resources.files(__package__) / "prompts" / name).read_text(
        encoding="utf-8")


def _render_examples() -> str:
    base = resources.files(__package__) / "prompts" / "examples"
    pairs = []
    for entry in sorted(base.iterdir(), key=lambda e: e.name):
        if entry.name.endswith("_description.txt"):
            stem = entry.name[:-len("_description.txt")]
            program = base / f"{stem}_program.pcl"
            pairs.append((entry.read_text(encoding="utf-8"),
                          program.read_text(encoding="utf-8")))
    chunks = []
    for i, (description, program) in enumerate(pairs, start=1):
        chunks.append(f"### Example {i}\n\n"
                      f"Description:\n\n{description}\n"
                      f"Program:\n\n```\n{program}```\n")
    return "\n".join(chunks)


def system_prompt() -> str:
    template = _load_template("system_prompt.md")
    return template.replace("<<EXAMPLES>>", _render_examples())


def build_initial_prompt(description: str) -> str:
    if not description.strip():
        raise PromptError("process description is empty")
    if len(description) > MAX_DESCRIPTION_CHARS:
        raise PromptError(
            f"process description has {len(description)} characters, "
            f"limit is {MAX_DESCRIPTION_CHARS}")
    return _load_template("initial_prompt.md").replace(
        "<<DESCRIPTION>>", description)


def build_error_prompt(error: PclError) -> str:
    location = f"line {error.line}, column {error.col}"
    return (_load_template("error_prompt.md")
            .replace("<<KIND>>", error.kind)
            .replace("<<LOCATION>>", location)
            .replace("<<MESSAGE>>", error.message))


def build_no_code_prompt() -> str:
    return _load_template("no_code_prompt.md")


def build_refine_prompt(feedback: str) -> str:
    if not feedback.strip():
        raise PromptError("feedback is empty")
    return _load_template("refine_prompt.md").replace("<<FEEDBACK>>", feedback)


# ---------------------------------------------------------------------------
# reply handling

_FENCED_BLOCK = re.compile(r"```[ \t]*[\w-]*[ \t]*\r?\n(.*?)```", re.DOTALL)
_OPEN_FENCE = re.compile(r"```[ \t]*[\w-]*[ \t]*\r?\n")


def extract_code(reply: str) -> str:
    """Pull the program text out of a provider reply.

    Preference order: the last complete fenced code block; then text after
    an unclosed fence; then the longest trailing run of lines that lexes as
    a program. Raises NoCodeFound when nothing qualifies.
    """
    blocks = _FENCED_BLOCK.findall(reply)
    if blocks:
        return blocks[-1]
    fences = list(_OPEN_FENCE.finditer(reply))
    if fences:
        tail = reply[fences[-1].end():]
        if tail.strip():
            return tail
    lines = reply.splitlines()
    for start in range(len(lines)):
        candidate = "\n".join(lines[start:]).strip("\n")
        if candidate.strip() and lexes(candidate):
            return candidate
    raise NoCodeFound("reply contains no code block and no trailing program")


# ---------------------------------------------------------------------------
# providers


class MockProvider:
    """Replays a fixed list of replies; used by tests, demos, and the CLI."""

    def __init__(self, replies: list[str]):
        self._replies = list(replies)
        self._next = 0
        self.requests: list[Conversation] = []

    @classmethod
    def from_file(cls, path: str) -> MockProvider:
        with open(path, encoding="utf-8") as fh:
            replies = json.load(fh)
        if (not isinstance(replies, list)
                or not all(isinstance(r, str) for r in replies)):
            raise ValueError(f"{path}: expected a JSON list of strings")
        return cls(replies)

    def complete(self, conversation: Conversation) -> str:
        self.requests.append(conversation)
        if self._next >= len(self._replies):
            raise ProviderError("mock provider ran out of scripted replies")
        reply = self._replies[self._next]
        self._next += 1
        return reply


_RETRY_STATUS = (429, 500, 502, 503, 504)


class HttpChatProvider:
    """Chat-completions client over HTTP with bearer-token auth."""

    def __init__(self, config: ProviderConfig,
                 session: requests.Session | None = None):
        self.config = config
        self._session = session or requests.Session()

    def _api_key(self) -> str:
        key = os.environ.get(self.config.api_key_env)
        if not key:
            raise ProviderError(
                f"environment variable {self.config.api_key_env} is not set")
        return key

    def complete(self, conversation: Conversation) -> str:
        payload = {
            "model": self.config.model_name,
            "messages": [{"role": m.role, "content": m.content}
                         for m in conversation.messages],
            "temperature": self.config.temperature,
        }
        headers = {
            "Authorization": f"Bearer {self._api_key()}",
            "Content-Type": "application/json",
        }
        last_failure = "no request made"
        for try_no in range(self.config.transport_retries + 1):
            if try_no:
                time.sleep(min(2.0 ** (try_no - 1), 8.0))
            try:
                response = self._session.post(
                    self.config.endpoint, json=payload, headers=headers,
                    timeout=self.config.timeout_s)
            except requests.RequestException as exc:
                # never interpolate the request: headers carry the key
                last_failure = f"transport error: {type(exc).__name__}"
                continue
            if response.status_code in _RETRY_STATUS:
                last_failure = f"provider returned HTTP {response.status_code}"
                continue
            if response.status_code != 200:
                raise ProviderError(
                    f"provider returned HTTP {response.status_code}")
            return self._parse_reply(response)
        raise ProviderError(f"provider unreachable after "
                            f"{self.config.transport_retries + 1} tries "
                            f"({last_failure})")

    @staticmethod
    def _parse_reply(response: requests.Response) -> str:
        try:
            data = response.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, LookupError, TypeError):
            raise ProviderError("malformed provider response: expected "
                                "choices[0].message.content") from None
        if not isinstance(content, str):
            raise ProviderError("malformed provider response: content "
                                "is not a string")
        return content


# ---------------------------------------------------------------------------
# generation loop


def _try_build(source: str) -> PowlNode:
    """Run a candidate program and re-verify the structural guarantees."""
    model = run_pcl(source)
    problems = validate(model)
    if problems:
        raise RuntimeError(f"internal error: interpreter produced an "
                           f"invalid model: {problems[0].message}")
    report = check_soundness(powl_to_pn(model))
    if not report.sound:
        raise RuntimeError("internal error: generated model translates "
                           "to an unsound net")
    return model


def _repair_loop(provider: Provider, conversation: Conversation,
                 max_iterations: int) -> GenerationResult:
    if max_iterations < 1:
        raise ValueError("max_iterations must be at least 1")
    last_error: Exception | None = None
    for attempt in range(1, max_iterations + 1):
        reply = provider.complete(conversation)
        conversation = conversation.with_message("assistant", reply)
        try:
            source = extract_code(reply)
        except NoCodeFound as err:
            last_error = err
            conversation = conversation.with_repair(build_no_code_prompt())
            continue
        try:
            model = _try_build(source)
        except PclError as err:
            last_error = err
            conversation = conversation.with_repair(build_error_prompt(err))
            continue
        return GenerationResult(model=model, source=source,
                                conversation=conversation, attempts=attempt)
    raise GenerationExhausted(conversation, attempts=max_iterations,
                              last_error=last_error)


def generate(provider: Provider, description: str, *,
             max_iterations: int = DEFAULT_MAX_ITERATIONS) -> GenerationResult:
    """Turn a process description into a validated model.

    Invalid candidate programs are bounced back to the provider with an
    error prompt, up to ``max_iterations`` provider calls in total.
    """
    conversation = Conversation.start(system_prompt(),
                                      build_initial_prompt(description))
    return _repair_loop(provider, conversation, max_iterations)


def refine(provider: Provider, conversation: Conversation, feedback: str, *,
           max_iterations: int = DEFAULT_MAX_ITERATIONS) -> GenerationResult:
    """Revise an accepted model according to user feedback.

    ``conversation`` is the history of the generation being revised. The
    returned conversation strictly extends it, so the whole exchange stays
    replayable.
    """
    extended = conversation.with_message("user", build_refine_prompt(feedback))
    return _repair_loop(provider, extended, max_iterations)
