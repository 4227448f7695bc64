"""Command-line entry point: ``atslens {analyze,classify,graph}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields

from .pipeline import (
    ConfigError,
    PipelineConfig,
    StageError,
    cmd_analyze,
    cmd_classify,
    cmd_graph,
    load_config_file,
)

EXIT_OK, EXIT_VALIDATION, EXIT_STAGE = 0, 1, 2

# flag -> PipelineConfig field
_FLAGS = {
    "--flow-log": "flow_log_path",
    "--flow-format": "flow_format",
    "--psl": "psl_path",
    "--browsers": "browser_list_path",
    "--stoplist": "stoplist_path",
    "--keywords": "keyword_reference_path",
    "--abp": "abp_list_path",
    "--hphosts": "hphosts_path",
    "--snapshot": "external_snapshot_path",
    "--non-ats-labels": "non_ats_labels_path",
    "--ambiguous-labels": "ambiguous_labels_path",
    "--negative-keywords": "negative_keywords_path",
    "--evidence-mode": "evidence_mode",
    "--evidence-dir": "evidence_fixture_dir",
    "--search-url": "search_url",
    "--snippets": "snippets_k",
    "--min-hits": "min_hits",
    "--workers": "workers",
    "--web-presence": "web_presence_path",
    "--universe-size": "universe_size",
    "--top-n-domains": "top_n_domains",
    "--top-n-apps": "top_n_apps",
    "--min-flows": "min_flows",
    "--out": "output_dir",
    "--format": "output_format",
}
_CHOICES = {
    "flow_format": ["jsonl", "csv"],
    "evidence_mode": ["fixture", "live"],
    "output_format": ["csv", "json", "markdown"],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atslens",
        description="Find advertising and tracking services in per-app mobile flow logs.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    types = {f.name: f.type for f in fields(PipelineConfig)}
    helps = {
        "analyze": "full pipeline: classifications, reports and run manifest",
        "classify": "write classifications.jsonl for third-party domains only",
        "graph": "write the app-domain graph and first/third-party listing",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", help="JSON file with PipelineConfig fields; flags override it")
        p.add_argument("--no-psl-private", dest="psl_private", action="store_false", default=None,
                       help="ignore the private section of the public suffix list")
        for flag, field in _FLAGS.items():
            kwargs = {"dest": field, "default": None}
            if field in _CHOICES:
                kwargs["choices"] = _CHOICES[field]
            elif types[field] == "int":
                kwargs["type"] = int
            p.add_argument(flag, **kwargs)
    return parser


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    data = load_config_file(args.config) if args.config else {}
    for f in fields(PipelineConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            data[f.name] = value
    return PipelineConfig.from_dict(data)


_COMMANDS = {"analyze": cmd_analyze, "classify": cmd_classify, "graph": cmd_graph}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = config_from_args(args)
        result = _COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"atslens: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except StageError as exc:
        print(f"atslens: {exc}", file=sys.stderr)
        return EXIT_STAGE
    counts = result.get("counts", {})
    for key in ("apps", "domains", "candidates", "first_party", "third_party", "ats", "non_ats"):
        if key in counts:
            print(f"{key}: {counts[key]}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
