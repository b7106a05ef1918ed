"""Marker protocol shared by prompts, backends and the response parser."""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import ProtocolError

CODE, METHOD, POSTCONDITION, VERDICT, TEST = (
    "[[CODE]]", "[[METHOD]]", "[[POSTCONDITION]]", "[[VERDICT]]", "[[TEST]]")
OK, FAILED = "OK", "FAILED"

_FENCE = re.compile(r"^\s*```[^\n]*\n(.*?)\n?```\s*$", re.S)
# the verdict token may come quoted, emphasised or wrapped in markers
_TOKEN = re.compile(r'^[\s:]*(?:\*\*|[\"\'“”‘’`]|\[\[)?\s*([A-Za-z]+)\s*(?:\*\*|[\"\'“”‘’`]|\]\])?')


@dataclass(frozen=True)
class RefinementVerdict:
    verdict: str
    test_source: str | None = None
    raw_response: str = field(default="", compare=False)
    reasoning: str | None = None

    def __post_init__(self):
        if self.verdict not in (OK, FAILED):
            raise ValueError(f"verdict must be OK or FAILED, not {self.verdict!r}")
        if self.verdict == FAILED and not self.test_source:
            raise ValueError("a FAILED verdict needs a test")
        if self.verdict == OK and self.test_source is not None:
            raise ValueError("an OK verdict carries no test")


def strip_fences(text: str) -> str:
    m = _FENCE.match(text)
    return (m.group(1) if m else text).strip()


def parse_response(raw: str) -> RefinementVerdict:
    """Decode a backend response; only the last verdict marker counts."""
    at = raw.rfind(VERDICT)
    if at < 0:
        raise ProtocolError(f"response has no {VERDICT} marker")
    reasoning = raw[:at].strip() or None
    tail = raw[at + len(VERDICT):]
    m = _TOKEN.match(tail)
    token = m.group(1).upper() if m else ""
    if token not in (OK, FAILED):
        shown = tail.strip().splitlines()[0][:40] if tail.strip() else ""
        raise ProtocolError(f"unrecognized verdict {shown!r}")
    if token == OK:
        return RefinementVerdict(OK, None, raw, reasoning)
    t = tail.find(TEST, m.end())
    if t < 0:
        raise ProtocolError(f"FAILED verdict without a {TEST} section")
    body = tail[t + len(TEST):]
    body = body[1:] if body.startswith(":") else body
    source = strip_fences(body.strip())
    if not source:
        raise ProtocolError(f"empty {TEST} section")
    return RefinementVerdict(FAILED, source, raw, reasoning)


def render_verdict(v: RefinementVerdict) -> str:
    head = f"{v.reasoning}\n" if v.reasoning else ""
    if v.verdict == OK:
        return f"{head}{VERDICT} OK\n"
    return f"{head}{VERDICT} FAILED\n{TEST}\n{v.test_source.strip()}\n"
