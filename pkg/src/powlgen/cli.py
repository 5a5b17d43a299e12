"""Command line interface.

Verbs: generate (description -> model file), refine (session dir +
feedback), convert (between model formats), check (validation +
soundness, exit code), serve (HTTP service), oracle (print the trace
set, the desk-scale verification tool).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import llm
from .config import AppConfig, ConfigError, build_provider, load_config
from .convert import InvalidModelError, powl_to_bpmn, powl_to_pn
from .pcl import PclError, run_pcl
from .powl import ModelError, PowlNode, stats, validate
from .semantics import check_soundness, powl_traces
from .serialize import (InvalidNetError, MalformedDocumentError, bpmn_export,
                        emit_pcl, pnml_export, powl_json_export,
                        powl_json_import)
from .sessions import (Session, SessionDecodeError, UnknownSessionError,
                       read_session_dir, write_session_dir)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _load_model(path: str) -> tuple[PowlNode, str | None]:
    """Read a model file; the suffix picks the format."""
    text = _read_text(path)
    if path.endswith(".pcl"):
        return run_pcl(text), text
    if path.endswith(".json"):
        return powl_json_import(text), None
    raise ValueError(f"cannot tell the format of {path!r}; "
                     f"expected a .pcl or .powl.json file")


def _render(model: PowlNode, source: str | None, fmt: str) -> str:
    if fmt == "pnml":
        return pnml_export(powl_to_pn(model))
    if fmt == "bpmn":
        return bpmn_export(powl_to_bpmn(model))
    if fmt == "powl-json":
        return powl_json_export(model)
    if fmt == "pcl":
        return source if source is not None else emit_pcl(model)
    raise ValueError(f"unknown output format {fmt!r}")


_SUFFIX_FORMATS = [(".powl.json", "powl-json"), (".pnml", "pnml"),
                   (".bpmn", "bpmn"), (".pcl", "pcl"), (".json", "powl-json")]


def _format_for(path: str) -> str:
    for suffix, fmt in _SUFFIX_FORMATS:
        if path.endswith(suffix):
            return fmt
    raise ValueError(f"cannot tell the format of {path!r}; expected one of "
                     f"{', '.join(s for s, _ in _SUFFIX_FORMATS)}")


def _write_export(model: PowlNode, source: str | None, out: str) -> None:
    Path(out).write_text(_render(model, source, _format_for(out)),
                         encoding="utf-8")
    print(f"wrote {out}", file=sys.stderr)


def _provider_config(args) -> AppConfig:
    config = load_config(args.config) if args.config else AppConfig()
    overrides = {}
    for key in ("provider", "mock_script", "endpoint", "model_name",
                "api_key_env"):
        value = getattr(args, key, None)
        if value:
            overrides[key] = value
    if getattr(args, "max_iterations", None):
        overrides["max_iterations"] = args.max_iterations
    return replace(config, **overrides) if overrides else config


def _add_provider_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--provider", choices=("mock", "http"))
    parser.add_argument("--mock-script", dest="mock_script",
                        help="JSON list of scripted replies (mock provider)")
    parser.add_argument("--endpoint", help="chat-completions URL (http)")
    parser.add_argument("--model-name", dest="model_name")
    parser.add_argument("--api-key-env", dest="api_key_env",
                        help="NAME of the environment variable with the key")
    parser.add_argument("--max-iterations", dest="max_iterations", type=int)


def _summary(model: PowlNode, attempts: int, verb: str = "generated") -> str:
    s = stats(model)
    return (f"model {verb} after {attempts} attempt(s): "
            f"{s.activity_count} activities, {s.operator_count} operators, "
            f"depth {s.depth}")


def _cmd_generate(args) -> int:
    config = _provider_config(args)
    provider = build_provider(config)
    description = _read_text(args.description)
    result = llm.generate(provider, description,
                          max_iterations=config.max_iterations)
    print(_summary(result.model, result.attempts))
    if args.out:
        _write_export(result.model, result.source, args.out)
    if args.session:
        store_dir = Path(args.session)
        if (store_dir / "session.json").is_file():
            raise ValueError(f"{store_dir} already holds a session; "
                             f"use 'refine' to change it")
        session = Session(session_id=store_dir.name or "session",
                          description=description)
        session.conversation = result.conversation
        session.model = result.model
        session.source = result.source
        session.record("generated", result.attempts)
        write_session_dir(store_dir, session)
        print(f"session saved to {store_dir}", file=sys.stderr)
    return 0


def _cmd_refine(args) -> int:
    config = _provider_config(args)
    provider = build_provider(config)
    session = read_session_dir(args.session)
    if session.model is None:
        raise ValueError(f"session {args.session} has no model to refine")
    result = llm.refine(provider, session.conversation, args.feedback,
                        max_iterations=config.max_iterations)
    session.conversation = result.conversation
    session.model = result.model
    session.source = result.source
    session.record("refined", result.attempts, detail=args.feedback)
    write_session_dir(args.session, session)
    print(_summary(result.model, result.attempts, verb="refined"))
    if args.out:
        _write_export(result.model, result.source, args.out)
    return 0


def _cmd_convert(args) -> int:
    model, source = _load_model(args.infile)
    document = _render(model, source, args.to)
    if args.out:
        Path(args.out).write_text(document, encoding="utf-8")
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(document)
    return 0


def _cmd_check(args) -> int:
    model, _ = _load_model(args.infile)
    violations = validate(model)
    if violations:
        for v in violations:
            print(f"invalid: {v.path}: {v.message}")
        return 1
    report = check_soundness(powl_to_pn(model))
    if report.sound:
        print(f"sound, {len(report.dead_transitions)} dead transitions")
        return 0
    print("not sound:"
          f" option_to_complete={report.option_to_complete}"
          f" proper_completion={report.proper_completion}"
          f" dead_transitions={sorted(report.dead_transitions)}")
    return 1


def _cmd_oracle(args) -> int:
    model, _ = _load_model(args.infile)
    traces = powl_traces(model, args.max_len)
    for trace in sorted(traces):
        print(", ".join(trace) if trace else "<empty>")
    print(f"{len(traces)} trace(s) of length <= {args.max_len}",
          file=sys.stderr)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config) if args.config else AppConfig()
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_config=None)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powlgen",
        description="generate, refine, convert, and check POWL process "
                    "models")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("generate", help="description file -> model")
    p.add_argument("--description", required=True,
                   help="text file with the process description ('-' reads "
                        "standard input)")
    p.add_argument("--out", help="export file; suffix picks the format "
                                 "(.pnml, .bpmn, .powl.json, .pcl)")
    p.add_argument("--session", help="directory to save the session into "
                                     "(enables later 'refine')")
    _add_provider_args(p)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("refine", help="apply feedback to a saved session")
    p.add_argument("--session", required=True, help="session directory")
    p.add_argument("--feedback", required=True)
    p.add_argument("--out", help="export file; suffix picks the format")
    _add_provider_args(p)
    p.set_defaults(func=_cmd_refine)

    p = sub.add_parser("convert", help="convert a model file")
    p.add_argument("--in", dest="infile", required=True,
                   help="model file (.powl.json or .pcl)")
    p.add_argument("--to", required=True,
                   choices=("pnml", "bpmn", "pcl", "powl-json"))
    p.add_argument("--out", help="output file (default: standard output)")
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("check", help="validate a model and check soundness")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("oracle", help="print the trace set of a model")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--max-len", dest="max_len", type=int, default=8)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", help="key = value config file")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except llm.GenerationExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (PclError, ModelError, InvalidModelError, MalformedDocumentError,
            InvalidNetError, ConfigError, UnknownSessionError,
            SessionDecodeError, llm.ProviderError, llm.PromptError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
